//! Charge, fluctuation and Landauer bounds evaluated along a trajectory.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{DrivenHamiltonian, Trajectory};
use crate::error::{Error, Result};
use crate::maxent::{
    build_reference, entropy_gap, gaussian_reference_from, solve_reference, MaxEntState, MultiplierVector,
    ObservableSet, SolverOptions,
};
use crate::qcore::{expectation, variance, von_neumann_entropy, DensityMatrix, HermitianObservable};

type SetFn = dyn Fn(f64) -> ObservableSet + Send + Sync;

/// Charges that are either fixed or re-evaluated at every time point.
#[derive(Clone)]
pub enum ChargeSchedule {
    Fixed(ObservableSet),
    Driven(Arc<SetFn>),
}

impl ChargeSchedule {
    pub fn driven(f: impl Fn(f64) -> ObservableSet + Send + Sync + 'static) -> Self {
        Self::Driven(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> ObservableSet {
        match self {
            Self::Fixed(s) => s.clone(),
            Self::Driven(f) => f(t),
        }
    }
}

impl From<ObservableSet> for ChargeSchedule {
    fn from(s: ObservableSet) -> Self {
        Self::Fixed(s)
    }
}

/// Observable whose variance is tracked by the fluctuation bound.
#[derive(Clone, Debug)]
pub enum ObservableSchedule {
    Fixed(HermitianObservable),
    Driven(DrivenHamiltonian),
}

impl ObservableSchedule {
    pub fn at(&self, t: f64) -> HermitianObservable {
        match self {
            Self::Fixed(o) => o.clone(),
            Self::Driven(h) => h.at(t),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BoundOptions {
    pub solver: SolverOptions,
    /// Margins below `-margin_tol` count as violations.
    pub margin_tol: f64,
    /// Re-solve every point from zero multipliers on the rayon pool.
    pub parallel: bool,
    /// Largest tolerated change of the initial multipliers when re-solving at `t0`.
    pub initial_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), margin_tol: 1e-7, parallel: false, initial_tol: 1e-6 }
    }
}

/// A time point where no reference state could be built.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesGap {
    pub index: usize,
    pub t: f64,
    /// Set when the multiplier clamp fired.
    pub clamped: bool,
    pub reason: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SolverTally {
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub gradient_steps: usize,
}

impl SolverTally {
    fn add(&mut self, iterations: usize, gradient_steps: usize) {
        self.total_iterations += iterations;
        self.max_iterations = self.max_iterations.max(iterations);
        self.gradient_steps += gradient_steps;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChargePoint {
    pub index: usize,
    pub t: f64,
    pub delta_c: Vec<f64>,
    pub delta_s: f64,
    pub remainder: f64,
    pub divergence: f64,
    pub upper: f64,
    pub lhs: f64,
    pub margin: f64,
    pub lambda: Vec<f64>,
    pub ln_z: f64,
    /// `delta_s - (lambda0 . delta_c + remainder - divergence)`.
    pub identity_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChargeBoundSeries {
    pub labels: Vec<String>,
    pub lambda0: Vec<f64>,
    pub ln_z0: f64,
    pub initial_divergence: f64,
    pub points: Vec<ChargePoint>,
    pub gaps: Vec<SeriesGap>,
    pub solver: SolverTally,
}

impl ChargeBoundSeries {
    pub fn min_margin(&self) -> f64 {
        self.points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min)
    }

    /// Largest `|margin - D|`.
    pub fn max_gap_residual(&self) -> f64 {
        self.points.iter().map(|p| (p.margin - p.divergence).abs()).fold(0.0, f64::max)
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.points.iter().map(|p| p.identity_residual.abs()).fold(0.0, f64::max)
    }

    pub fn violations(&self, tol: f64) -> usize {
        self.points.iter().filter(|p| p.margin < -tol).count()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FluctuationPoint {
    pub index: usize,
    pub t: f64,
    pub mean: f64,
    pub variance: f64,
    pub delta_var: f64,
    pub delta_s: f64,
    pub remainder: f64,
    pub lambda_v: f64,
    /// `(delta_s - remainder) / lambda_v0`.
    pub lower: f64,
    /// `delta_var - lower`.
    pub margin: f64,
    /// `lambda_v0 delta_var - (delta_s - remainder)`, valid for either sign of `lambda_v0`.
    pub scaled_margin: f64,
    pub divergence: f64,
    pub ln_z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FluctuationBoundSeries {
    pub label: String,
    pub lambda_v0: f64,
    /// `lambda_v0 < 0`: dividing by it flips the inequality, so `margin` is not a bound.
    pub inverted: bool,
    pub ln_z0: f64,
    pub initial_divergence: f64,
    pub points: Vec<FluctuationPoint>,
    pub gaps: Vec<SeriesGap>,
    pub solver: SolverTally,
}

impl FluctuationBoundSeries {
    pub fn min_margin(&self) -> f64 {
        self.points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn min_scaled_margin(&self) -> f64 {
        self.points.iter().map(|p| p.scaled_margin).fold(f64::INFINITY, f64::min)
    }

    /// Largest `|lambda_v0 (delta_var - lower) - D|`.
    pub fn max_gap_residual(&self) -> f64 {
        self.points.iter().map(|p| (self.lambda_v0 * p.margin - p.divergence).abs()).fold(0.0, f64::max)
    }

    /// Largest `|delta_s - (lambda_v0 delta_var + remainder - D)|`.
    pub fn max_identity_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.delta_s - (self.lambda_v0 * p.delta_var + p.remainder - p.divergence)).abs())
            .fold(0.0, f64::max)
    }

    pub fn clamped(&self) -> bool {
        self.gaps.iter().any(|g| g.clamped)
    }

    /// Counts `margin < -tol`; always zero for an inverted series.
    pub fn violations(&self, tol: f64) -> usize {
        if self.inverted {
            return 0;
        }
        self.points.iter().filter(|p| p.margin < -tol).count()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LandauerPoint {
    pub t: f64,
    pub bath_cost: f64,
    pub neg_delta_s: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LandauerSeries {
    pub points: Vec<LandauerPoint>,
}

impl LandauerSeries {
    pub fn violations(&self) -> usize {
        self.points.iter().filter(|p| !p.satisfied).count()
    }
}

fn gap(index: usize, t: f64, err: &Error) -> SeriesGap {
    SeriesGap { index, t, clamped: matches!(err, Error::BoundaryTarget { .. }), reason: err.to_string() }
}

/// Resolves the outcome of every point either sequentially (warm start) or in parallel (cold start).
fn sweep<T: Send>(
    n: usize,
    parallel: bool,
    init: Vec<f64>,
    solve: impl Fn(usize, &[f64]) -> Result<(T, Vec<f64>, usize, usize)> + Sync,
) -> Vec<Result<(T, usize, usize)>> {
    if parallel {
        let zeros = vec![0.0; init.len()];
        (0..n).into_par_iter().map(|k| solve(k, &zeros).map(|(p, _, i, g)| (p, i, g))).collect()
    } else {
        let mut warm = init;
        (0..n)
            .map(|k| {
                solve(k, &warm).map(|(p, lambda, i, g)| {
                    warm = lambda;
                    (p, i, g)
                })
            })
            .collect()
    }
}

fn converged_reference(
    set: &ObservableSet,
    targets: &[f64],
    init: &[f64],
    opts: &SolverOptions,
) -> Result<(MaxEntState, usize, usize)> {
    let (state, report) = solve_reference(set, targets, &MultiplierVector::new(init.to_vec())?, opts)?;
    if !report.converged {
        return Err(Error::Precondition(format!(
            "multiplier solve stalled after {} iterations (gradient {:e})",
            report.iterations, report.final_gradient_norm
        )));
    }
    Ok((state, report.iterations, report.gradient_steps))
}

/// Weighted charge cost `-sum lambda_i(0) delta C_i` against its upper bound `U_M = R - delta S`.
///
/// `lambda0` must be the multipliers of the initial reference state: re-solving at `t0`
/// from `lambda0` has to return `lambda0`.
pub fn charge_bounds(
    traj: &Trajectory,
    charges: &ChargeSchedule,
    lambda0: &MultiplierVector,
    opts: &BoundOptions,
) -> Result<ChargeBoundSeries> {
    let t0 = traj.grid.time(0);
    let rho0 = &traj.states[0];
    let set0 = charges.at(t0);
    let c0 = set0.expectations(rho0)?;
    let (check, _, _) = converged_reference(&set0, &c0, lambda0.values(), &opts.solver)
        .map_err(|e| Error::Precondition(format!("initial multipliers do not describe the initial state: {e}")))?;
    let drift = check.multipliers.values().iter().zip(lambda0.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if drift > opts.initial_tol {
        return Err(Error::Precondition(format!(
            "initial multipliers move by {drift:e} when re-solved at t0; they must come from the initial reference"
        )));
    }
    let ref0 = build_reference(&set0, lambda0)?;
    let s0 = von_neumann_entropy(rho0);
    let d0 = ref0.divergence_from(rho0)?;
    let l0 = lambda0.values();
    let entropy_tol = (10.0 * opts.solver.tol).max(1e-8);

    let outcomes = sweep(traj.len(), opts.parallel, l0.to_vec(), |k, init| {
        let t = traj.grid.time(k);
        let rho = &traj.states[k];
        let set = charges.at(t);
        let c = set.expectations(rho)?;
        let (reference, iters, grads) = converged_reference(&set, &c, init, &opts.solver)?;
        let d = entropy_gap(rho, &reference, entropy_tol)?;
        let lambda = reference.multipliers.values().to_vec();
        let delta_c: Vec<f64> = c.iter().zip(&c0).map(|(a, b)| a - b).collect();
        let delta_s = von_neumann_entropy(rho) - s0;
        let shift: f64 = c.iter().zip(lambda.iter().zip(l0)).map(|(ci, (l, l0))| ci * (l - l0)).sum();
        let remainder = shift + (reference.log_partition - ref0.log_partition) + d0;
        let weighted: f64 = l0.iter().zip(&delta_c).map(|(l, dc)| l * dc).sum();
        let lhs = -weighted;
        let upper = remainder - delta_s;
        let point = ChargePoint {
            index: k,
            t,
            delta_c,
            delta_s,
            remainder,
            divergence: d,
            upper,
            lhs,
            margin: upper - lhs,
            ln_z: reference.log_partition,
            identity_residual: delta_s - (weighted + remainder - d),
            lambda: lambda.clone(),
        };
        Ok((point, lambda, iters, grads))
    });

    let mut series = ChargeBoundSeries {
        labels: set0.labels(),
        lambda0: l0.to_vec(),
        ln_z0: ref0.log_partition,
        initial_divergence: d0,
        points: Vec::with_capacity(traj.len()),
        gaps: Vec::new(),
        solver: SolverTally::default(),
    };
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((p, iters, grads)) => {
                series.solver.add(iters, grads);
                series.points.push(p);
            }
            Err(e) => series.gaps.push(gap(k, traj.grid.time(k), &e)),
        }
    }
    if !series.gaps.is_empty() {
        log::warn!("charge bound series has {} gap(s)", series.gaps.len());
    }
    Ok(series)
}

/// Max `|delta S - (lambda0 . delta C + R - D)|` over the trajectory.
pub fn identity_audit(
    traj: &Trajectory,
    charges: &ChargeSchedule,
    lambda0: &MultiplierVector,
    opts: &BoundOptions,
) -> Result<f64> {
    Ok(charge_bounds(traj, charges, lambda0, opts)?.max_identity_residual())
}

/// Fluctuation cost `delta Var[O]` against the lower bound `L_v` from the Gaussian reference.
pub fn fluctuation_bounds(
    traj: &Trajectory,
    observable: &ObservableSchedule,
    opts: &BoundOptions,
) -> Result<FluctuationBoundSeries> {
    let t0 = traj.grid.time(0);
    let rho0 = &traj.states[0];
    let o0 = observable.at(t0);
    let mean0 = expectation(rho0, &o0)?;
    let var0 = variance(rho0, &o0)?;
    let (ref0, _) = gaussian_reference_from(&o0, mean0, var0, 0.0, &opts.solver)?;
    let lambda_v0 = ref0.multipliers.values()[0];
    let s0 = von_neumann_entropy(rho0);
    let d0 = ref0.divergence_from(rho0)?;
    let entropy_tol = (10.0 * opts.solver.tol).max(1e-8);
    if lambda_v0 < 0.0 {
        log::warn!("lambda_v(0) = {lambda_v0} is negative; the divided fluctuation bound is inverted");
    }

    let outcomes = sweep(traj.len(), opts.parallel, vec![lambda_v0], |k, init| {
        let t = traj.grid.time(k);
        let rho = &traj.states[k];
        let o = observable.at(t);
        let mean = expectation(rho, &o)?;
        let var = variance(rho, &o)?;
        let (reference, report) = gaussian_reference_from(&o, mean, var, init[0], &opts.solver)?;
        if !report.converged {
            return Err(Error::Precondition(format!(
                "gaussian reference stalled (gradient {:e})",
                report.final_gradient_norm
            )));
        }
        let d = entropy_gap(rho, &reference, entropy_tol)?;
        let lambda_v = reference.multipliers.values()[0];
        let delta_s = von_neumann_entropy(rho) - s0;
        let remainder = (lambda_v - lambda_v0) * var + (reference.log_partition - ref0.log_partition) + d0;
        let delta_var = var - var0;
        let lower = (delta_s - remainder) / lambda_v0;
        let point = FluctuationPoint {
            index: k,
            t,
            mean,
            variance: var,
            delta_var,
            delta_s,
            remainder,
            lambda_v,
            lower,
            margin: delta_var - lower,
            scaled_margin: lambda_v0 * delta_var - (delta_s - remainder),
            divergence: d,
            ln_z: reference.log_partition,
        };
        Ok((point, vec![lambda_v], report.iterations, report.gradient_steps))
    });

    let mut series = FluctuationBoundSeries {
        label: o0.label().to_string(),
        lambda_v0,
        inverted: lambda_v0 < 0.0,
        ln_z0: ref0.log_partition,
        initial_divergence: d0,
        points: Vec::with_capacity(traj.len()),
        gaps: Vec::new(),
        solver: SolverTally::default(),
    };
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((p, iters, grads)) => {
                series.solver.add(iters, grads);
                series.points.push(p);
            }
            Err(e) => series.gaps.push(gap(k, traj.grid.time(k), &e)),
        }
    }
    if series.clamped() {
        log::warn!("lambda_v clamp hit at {} point(s)", series.gaps.iter().filter(|g| g.clamped).count());
    }
    Ok(series)
}

/// `sum_i mu_i delta C_i^B(t) >= -delta S(t)` for supplied bath charge changes.
pub fn landauer_lower_bound(
    times: &[f64],
    bath_deltas: &[Vec<f64>],
    mu: &[f64],
    delta_s: &[f64],
) -> Result<LandauerSeries> {
    if bath_deltas.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: bath_deltas.len() });
    }
    if delta_s.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: delta_s.len() });
    }
    let points = times
        .iter()
        .zip(bath_deltas.iter().zip(delta_s))
        .map(|(&t, (deltas, &ds))| {
            if deltas.len() != mu.len() {
                return Err(Error::DimensionMismatch { expected: mu.len(), found: deltas.len() });
            }
            let bath_cost: f64 = mu.iter().zip(deltas).map(|(m, d)| m * d).sum();
            Ok(LandauerPoint { t, bath_cost, neg_delta_s: -ds, satisfied: bath_cost + ds >= -1e-12 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LandauerSeries { points })
}

/// Convenience: entropy change `S(rho(t)) - S(rho(t0))` along a trajectory.
pub fn entropy_change(states: &[DensityMatrix]) -> Vec<f64> {
    let s0 = von_neumann_entropy(&states[0]);
    states.iter().map(|s| von_neumann_entropy(s) - s0).collect()
}
