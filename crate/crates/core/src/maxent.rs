//! Maximum-entropy inference: from observables and their expectation values to
//! Lagrange multipliers and the generalized Gibbs reference state
//! `exp(-sum_i lambda_i O_i) / Z`.
//!
//! Multipliers are found by minimizing the convex dual
//! `f(lambda) = ln Z(lambda) + sum_i lambda_i t_i`, whose gradient is
//! `t_i - <O_i>` and whose Hessian is the Kubo-Mori covariance of the
//! observables in the reference state.

use nalgebra::{DMatrix, DVector};

use crate::error::{validation, Error, Result};
use crate::qcore::{
    eigh_raw, expectation, reconstruct, symmetrize, von_neumann_entropy, CMat, DensityMatrix,
    HermitianObservable, C64,
};

/// Largest admissible multiplier magnitude. Past this the reference state is
/// numerically pure and the target is treated as lying on the spectral boundary.
pub const LAMBDA_MAX: f64 = 50.0;

const HESSIAN_RIDGE: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;
const COMMUTE_TOL: f64 = 1e-10;
const DEGENERATE_SPREAD: f64 = 1e-12;

/// Nonempty set of same-dimension observables with unique labels.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    observables: Vec<HermitianObservable>,
    commuting: bool,
}

impl ObservableSet {
    pub fn new(observables: Vec<HermitianObservable>) -> Result<Self> {
        let Some(first) = observables.first() else {
            return validation("observable set must be nonempty");
        };
        let dim = first.dim();
        for o in &observables {
            if o.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: o.dim() });
            }
        }
        for (i, a) in observables.iter().enumerate() {
            if observables[..i].iter().any(|b| b.label() == a.label()) {
                return validation(format!("duplicate observable label '{}'", a.label()));
            }
        }
        let commuting = observables
            .iter()
            .enumerate()
            .all(|(i, a)| observables[i + 1..].iter().all(|b| a.commutes_with(b, COMMUTE_TOL)));
        Ok(Self { observables, commuting })
    }

    pub fn single(o: HermitianObservable) -> Self {
        Self { observables: vec![o], commuting: true }
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn commuting(&self) -> bool {
        self.commuting
    }

    pub fn iter(&self) -> std::slice::Iter<'_, HermitianObservable> {
        self.observables.iter()
    }

    pub fn get(&self, i: usize) -> &HermitianObservable {
        &self.observables[i]
    }

    pub fn labels(&self) -> Vec<String> {
        self.observables.iter().map(|o| o.label().to_string()).collect()
    }

    /// Expectation values of every member in `rho`.
    pub fn expectations(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.observables.iter().map(|o| expectation(rho, o)).collect()
    }
}

/// Lagrange multipliers, one per observable.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierVector(Vec<f64>);

impl MultiplierVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return validation("multipliers must be finite");
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// A reference state together with the data that defines it.
#[derive(Clone, Debug)]
pub struct MaxEntState {
    pub observables: ObservableSet,
    pub multipliers: MultiplierVector,
    /// `ln Z_r`.
    pub log_partition: f64,
    pub state: DensityMatrix,
    /// Expectation values of the observables in `state`.
    pub targets: Vec<f64>,
}

impl MaxEntState {
    /// Von Neumann entropy of the reference state, from its spectrum.
    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(&self.state)
    }

    /// `ln rho_r = -sum_i lambda_i O_i - ln Z_r`, exact even where `rho_r` has tiny eigenvalues.
    pub fn log_state(&self) -> CMat {
        let n = self.observables.dim();
        exponent(&self.observables, self.multipliers.values()) - CMat::identity(n, n).scale(self.log_partition)
    }

    /// `D[rho || rho_r]` using the exact logarithm of the reference state.
    pub fn divergence_from(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.observables.dim() {
            return Err(Error::DimensionMismatch { expected: self.observables.dim(), found: rho.dim() });
        }
        let cross = (rho.matrix() * self.log_state()).trace().re;
        Ok(-von_neumann_entropy(rho) - cross)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Convergence threshold on `max_i |<O_i> - target_i|`.
    pub tol: f64,
    pub max_iter: usize,
    pub lambda_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, lambda_max: LAMBDA_MAX }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub converged: bool,
    pub dual_value: f64,
    /// Dual objective at every accepted iterate, starting with the initial point.
    pub dual_history: Vec<f64>,
    /// Number of iterations that fell back to gradient descent.
    pub gradient_steps: usize,
}

/// Reference state quantities at one multiplier vector.
struct DualPoint {
    ln_z: f64,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
    probabilities: Vec<f64>,
    rho: CMat,
    expectations: Vec<f64>,
}

fn exponent(obs: &ObservableSet, lambda: &[f64]) -> CMat {
    let n = obs.dim();
    let mut k = CMat::zeros(n, n);
    for (o, &l) in obs.iter().zip(lambda) {
        k -= o.matrix().scale(l);
    }
    symmetrize(&k)
}

fn evaluate(obs: &ObservableSet, lambda: &[f64]) -> Result<DualPoint> {
    let (w, v) = eigh_raw(&exponent(obs, lambda))?;
    let shift = w[w.len() - 1];
    let weights: Vec<f64> = w.iter().map(|&x| (x - shift).exp()).collect();
    let z_shifted: f64 = weights.iter().sum();
    let ln_z = shift + z_shifted.ln();
    let probabilities: Vec<f64> = weights.iter().map(|x| x / z_shifted).collect();
    let rho = symmetrize(&reconstruct(&v, &probabilities));
    let trusted = DensityMatrix::from_trusted(rho.clone());
    let expectations = obs.iter().map(|o| expectation(&trusted, o)).collect::<Result<Vec<_>>>()?;
    Ok(DualPoint { ln_z, eigenvalues: w, eigenvectors: v, probabilities, rho, expectations })
}

fn dual_value(point: &DualPoint, lambda: &[f64], targets: &[f64]) -> f64 {
    point.ln_z + lambda.iter().zip(targets).map(|(l, t)| l * t).sum::<f64>()
}

/// Kubo-Mori covariance `d^2 ln Z / d lambda_i d lambda_j`, assembled in the
/// eigenbasis of the exponent with divided differences of `exp`.
fn kubo_mori_hessian(obs: &ObservableSet, point: &DualPoint) -> DMatrix<f64> {
    let k = obs.len();
    let n = point.eigenvalues.len();
    let v = &point.eigenvectors;
    let rotated: Vec<CMat> = obs.iter().map(|o| v.adjoint() * o.matrix() * v).collect();
    // phi[a][b] = (p_a - p_b) / (w_a - w_b), with the limit p_a on the diagonal.
    let mut phi = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let (lo, hi) = if point.eigenvalues[a] <= point.eigenvalues[b] { (a, b) } else { (b, a) };
            let gap = point.eigenvalues[hi] - point.eigenvalues[lo];
            let ratio = if gap < 1e-12 { 1.0 + 0.5 * gap } else { gap.exp_m1() / gap };
            phi[a][b] = point.probabilities[lo] * ratio;
        }
    }
    let mut h = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let prod: C64 = rotated[i][(a, b)] * rotated[j][(b, a)];
                    acc += prod.re * phi[a][b];
                }
            }
            let cov = acc - point.expectations[i] * point.expectations[j];
            h[(i, j)] = cov;
            h[(j, i)] = cov;
        }
    }
    h
}

fn spectral_spread(o: &HermitianObservable) -> Result<(f64, f64)> {
    let (w, _) = eigh_raw(o.matrix())?;
    Ok((w[0], w[w.len() - 1]))
}

fn is_proportional_to_identity(o: &HermitianObservable) -> Result<bool> {
    let (lo, hi) = spectral_spread(o)?;
    Ok(hi - lo <= DEGENERATE_SPREAD * hi.abs().max(lo.abs()).max(1.0))
}

/// Builds `exp(-sum_i lambda_i O_i) / Z`. `ln Z` is computed with the exponent's
/// spectrum shifted by its maximum, so large multipliers do not overflow.
pub fn build_reference(observables: &ObservableSet, lambda: &MultiplierVector) -> Result<MaxEntState> {
    if lambda.len() != observables.len() {
        return Err(Error::DimensionMismatch { expected: observables.len(), found: lambda.len() });
    }
    let point = evaluate(observables, lambda.values())?;
    Ok(MaxEntState {
        observables: observables.clone(),
        multipliers: lambda.clone(),
        log_partition: point.ln_z,
        state: DensityMatrix::from_trusted(point.rho),
        targets: point.expectations,
    })
}

/// Finds multipliers whose reference state reproduces `targets`, by damped Newton
/// descent on the dual with Armijo backtracking.
///
/// Returns a report with `converged == false` if `max_iter` is exhausted or the line
/// search stalls. A multiplier leaving `[-lambda_max, lambda_max]` is reported as
/// [`Error::BoundaryTarget`].
pub fn solve_multipliers(
    observables: &ObservableSet,
    targets: &[f64],
    init: &MultiplierVector,
    opts: &SolverOptions,
) -> Result<(MultiplierVector, SolveReport)> {
    let k = observables.len();
    if targets.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: targets.len() });
    }
    if init.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: init.len() });
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return validation("targets must be finite");
    }
    for o in observables.iter() {
        if is_proportional_to_identity(o)? {
            return Err(Error::UntunableConstraint(format!("observable '{}' is proportional to the identity", o.label())));
        }
    }

    let mut lambda = init.values().to_vec();
    let mut point = evaluate(observables, &lambda)?;
    let mut f = dual_value(&point, &lambda, targets);
    let mut history = vec![f];
    let mut gradient_steps = 0;
    let mut iterations = 0;

    let gradient = |p: &DualPoint| -> Vec<f64> { targets.iter().zip(&p.expectations).map(|(t, e)| t - e).collect() };
    let mut g = gradient(&point);
    let mut gnorm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    while gnorm > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let hess = kubo_mori_hessian(observables, &point) + DMatrix::identity(k, k) * HESSIAN_RIDGE;
        let grad = DVector::from_vec(g.clone());
        let newton = hess.cholesky().map(|c| -c.solve(&grad));
        let mut candidates: Vec<(DVector<f64>, bool)> = Vec::with_capacity(2);
        if let Some(d) = newton {
            if d.dot(&grad) < 0.0 && d.iter().all(|x| x.is_finite()) {
                candidates.push((d, false));
            }
        }
        candidates.push((-grad.clone(), true));

        let slack = 8.0 * f64::EPSILON * f.abs().max(1.0);
        let mut accepted = None;
        'directions: for (dir, is_gradient) in candidates {
            let slope = dir.dot(&grad);
            let mut step = 1.0;
            for _ in 0..60 {
                let trial: Vec<f64> = lambda.iter().zip(dir.iter()).map(|(l, d)| l + step * d).collect();
                let trial_point = evaluate(observables, &trial)?;
                let f_trial = dual_value(&trial_point, &trial, targets);
                if f_trial.is_finite() && f_trial <= f + ARMIJO * step * slope + slack {
                    accepted = Some((trial, trial_point, f_trial, is_gradient));
                    break 'directions;
                }
                step *= 0.5;
            }
        }

        let Some((next, next_point, f_next, was_gradient)) = accepted else {
            break;
        };
        if was_gradient {
            gradient_steps += 1;
        }
        lambda = next;
        point = next_point;
        f = f_next;
        history.push(f);
        let magnitude = lambda.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if magnitude > opts.lambda_max {
            return Err(Error::BoundaryTarget { magnitude, limit: opts.lambda_max });
        }
        g = gradient(&point);
        gnorm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    }

    let report = SolveReport {
        iterations,
        final_gradient_norm: gnorm,
        converged: gnorm <= opts.tol,
        dual_value: f,
        dual_history: history,
        gradient_steps,
    };
    Ok((MultiplierVector(lambda), report))
}

/// Solves for the multipliers and returns the reference state directly.
pub fn solve_reference(
    observables: &ObservableSet,
    targets: &[f64],
    init: &MultiplierVector,
    opts: &SolverOptions,
) -> Result<(MaxEntState, SolveReport)> {
    let (lambda, report) = solve_multipliers(observables, targets, init, opts)?;
    Ok((build_reference(observables, &lambda)?, report))
}

/// The variance operator `(O - mean)^2` used by the Gaussian reference.
pub fn variance_operator(o: &HermitianObservable, mean: f64) -> HermitianObservable {
    o.shifted(mean).squared(format!("({} - <{}>)^2", o.label(), o.label()))
}

/// Gaussian reference state `exp(-lambda_v (O - mean)^2) / Z` whose variance matches `var`.
pub fn gaussian_reference(o: &HermitianObservable, mean: f64, var: f64, tol: f64) -> Result<MaxEntState> {
    gaussian_reference_from(o, mean, var, 0.0, &SolverOptions::with_tol(tol)).map(|(s, _)| s)
}

/// As [`gaussian_reference`], warm-started from `init` and returning the solver report.
pub fn gaussian_reference_from(
    o: &HermitianObservable,
    mean: f64,
    var: f64,
    init: f64,
    opts: &SolverOptions,
) -> Result<(MaxEntState, SolveReport)> {
    let a = variance_operator(o, mean);
    let (lo, hi) = spectral_spread(&a)?;
    if is_proportional_to_identity(&a)? {
        return Err(Error::UntunableConstraint(format!(
            "variance operator of '{}' about {mean} is proportional to the identity",
            o.label()
        )));
    }
    if !(var > lo && var < hi) {
        return Err(Error::BoundaryTarget { magnitude: f64::INFINITY, limit: opts.lambda_max });
    }
    let set = ObservableSet::single(a);
    let (state, report) = solve_reference(&set, &[var], &MultiplierVector(vec![init]), opts)?;
    if !report.converged {
        log::warn!("gaussian reference did not converge: gradient {:e}", report.final_gradient_norm);
    }
    Ok((state, report))
}

/// `D[rho_S || rho_r]`, valid only when `rho_S` reproduces the reference targets
/// within `tol`. Cross-checks the result against `S_r - S`.
pub fn entropy_gap(rho_s: &DensityMatrix, reference: &MaxEntState, tol: f64) -> Result<f64> {
    let actual = reference.observables.expectations(rho_s)?;
    for ((a, t), o) in actual.iter().zip(&reference.targets).zip(reference.observables.iter()) {
        if (a - t).abs() > tol {
            return Err(Error::Precondition(format!(
                "<{}> = {a} differs from the reference target {t} by more than {tol:e}",
                o.label()
            )));
        }
    }
    let d = reference.divergence_from(rho_s)?;
    let residual = (reference.entropy() - von_neumann_entropy(rho_s)) - d;
    if residual.abs() > 1e-7 {
        return Err(Error::IdentityCheck { residual });
    }
    Ok(d)
}
