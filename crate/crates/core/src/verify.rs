//! Acceptance suites: the end-to-end checks behind `verify`.
//!
//! Random instances come from a fixed ChaCha seed, so every run sees the same draws.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{charge_bounds, BoundOptions, ChargeSchedule};
use crate::config::ScenarioConfig;
use crate::dynamics::{IntegrationDiagnostics, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::maxent::{
    build_reference, gaussian_reference, solve_multipliers, MultiplierVector, ObservableSet, SolverOptions,
};
use crate::qcore::{eigh_raw, pauli, relative_entropy, von_neumann_entropy, CMat, DensityMatrix, HermitianObservable, C64};
use crate::report::{Check, RunReport};
use crate::scenarios::{run, ScenarioId};

pub const SEED: u64 = 0x5eed_1f0c;
pub const RANDOM_INSTANCES: usize = 200;

/// One acceptance criterion.
#[derive(Clone, Copy, Debug)]
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    /// Suite selectors that include this criterion, besides `all`.
    pub suites: &'static [&'static str],
    run: fn() -> Result<Vec<Check>>,
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "quasistatic endpoint", suites: &["quasistatic"], run: quasistatic_endpoint },
    Criterion { id: 2, name: "two-qubit charge bound", suites: &["two_qubit_charges"], run: two_qubit_bound },
    Criterion { id: 3, name: "erasure fluctuation bound", suites: &["erasure"], run: erasure_bound },
    Criterion { id: 4, name: "double-dot fluctuation bound", suites: &["dqd"], run: dqd_bound },
    Criterion { id: 5, name: "qubit reset", suites: &["reset"], run: reset_values },
    Criterion { id: 6, name: "entropy identities", suites: &["identities"], run: entropy_identities },
    Criterion { id: 7, name: "multiplier round trip", suites: &["multipliers"], run: multiplier_round_trip },
    Criterion { id: 8, name: "closed-run conservation", suites: &["two_qubit_charges", "conservation"], run: conservation },
    Criterion { id: 9, name: "degradation", suites: &["erasure", "degradation"], run: degradation },
];

/// Outcome of one criterion.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

/// Every accepted suite selector.
pub fn suite_names() -> Vec<&'static str> {
    let mut names = vec!["all"];
    for c in &CRITERIA {
        for s in c.suites {
            if !names.contains(s) {
                names.push(s);
            }
        }
    }
    names
}

/// Criteria selected by `suite`; an unknown selector is a config error.
pub fn select(suite: &str) -> Result<Vec<Criterion>> {
    let picked: Vec<Criterion> =
        CRITERIA.iter().filter(|c| suite == "all" || c.suites.contains(&suite)).copied().collect();
    if picked.is_empty() {
        return Err(Error::Config(format!("unknown suite '{suite}' (expected one of {})", suite_names().join(", "))));
    }
    Ok(picked)
}

/// Runs the selected criteria on the rayon pool; results keep criterion order.
pub fn run_suite(suite: &str) -> Result<Vec<CriterionResult>> {
    Ok(select(suite)?.par_iter().map(evaluate).collect())
}

pub fn evaluate(c: &Criterion) -> CriterionResult {
    let start = Instant::now();
    let outcome = (c.run)();
    let seconds = start.elapsed().as_secs_f64();
    let (checks, error) = match outcome {
        Ok(checks) => (checks, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let passed = error.is_none() && checks.iter().all(|k| k.passed);
    CriterionResult { id: c.id, name: c.name.to_string(), passed, seconds, checks, error }
}

fn scenario(id: ScenarioId, overrides: &[&str]) -> Result<(RunReport, f64)> {
    let mut config = ScenarioConfig::new(id);
    config.apply_overrides(overrides.iter().copied())?;
    let start = Instant::now();
    let out = run(&config)?;
    Ok((out.report, start.elapsed().as_secs_f64()))
}

fn summary(r: &RunReport, key: &str) -> Result<f64> {
    r.summary.get(key).copied().ok_or_else(|| Error::Validation(format!("report of '{}' lacks '{key}'", r.scenario)))
}

fn quasistatic_endpoint() -> Result<Vec<Check>> {
    let (r, secs) = scenario(ScenarioId::Quasistatic, &["n_steps=10000"])?;
    Ok(vec![
        Check::at_most("analytic_residual", summary(&r, "analytic_residual")?.abs(), 1e-12),
        Check::at_most("discretized_gap", summary(&r, "gap")?.abs(), 5e-4),
        Check::at_most("runtime_s", secs, 1.0),
    ])
}

fn two_qubit_bound() -> Result<Vec<Check>> {
    let (r, secs) = scenario(ScenarioId::TwoQubitCharges, &[])?;
    let points = r.grid.map(|g| g.n_points).unwrap_or(0) - r.gaps.len();
    Ok(vec![
        Check::at_most("margin_minus_divergence", summary(&r, "max_gap_residual")?, 1e-7),
        Check::at_least("min_margin", summary(&r, "min_margin")?, -1e-7),
        Check::at_least("points_checked", points as f64, 2001.0),
        Check::at_most("runtime_s", secs, 10.0),
    ])
}

fn erasure_bound() -> Result<Vec<Check>> {
    let (r, secs) = scenario(ScenarioId::Erasure, &[])?;
    let trend = r.checks.iter().find(|c| c.name == "margin_trend_final_quarter").cloned();
    let mut checks = vec![
        Check::at_least("min_margin", summary(&r, "min_margin")?, -1e-7),
        Check::at_most("series_gaps", r.gaps.len() as f64, 0.0),
        Check::at_most("final_excited", summary(&r, "final_excited")?, 2e-2),
        Check::at_most("runtime_s", secs, 10.0),
    ];
    checks.extend(trend);
    Ok(checks)
}

fn dqd_bound() -> Result<Vec<Check>> {
    let (r, secs) = scenario(ScenarioId::Dqd, &[])?;
    Ok(vec![
        Check::at_least("min_margin", summary(&r, "min_margin")?, -1e-6),
        Check::at_most("series_gaps", r.gaps.len() as f64, 0.0),
        Check::at_most("trace_error", summary(&r, "max_trace_error")?.max(summary(&r, "max_substep_trace_deviation")?), 1e-8),
        Check::at_most("positivity_clamp_max", summary(&r, "positivity_clamp_max")?, 1e-4),
        Check::at_most("runtime_s", secs, 60.0),
    ])
}

fn reset_values() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let start = Instant::now();
    for omega in [1.0, 2.0] {
        let (r, _) = scenario(ScenarioId::Reset, &[&format!("omega={omega}")])?;
        checks.push(Check::at_most(&format!("dE_minus_half_omega[{omega}]"), (summary(&r, "dE")? - omega / 2.0).abs(), 1e-15));
        checks.push(Check::at_most(
            &format!("dVar_minus_quarter_omega_sq[{omega}]"),
            (summary(&r, "dVar")? - omega * omega / 4.0).abs(),
            1e-15,
        ));
    }
    checks.push(Check::at_most("runtime_s", start.elapsed().as_secs_f64(), 1.0));
    Ok(checks)
}

/// Full-rank state `(G G^dag + eps I) / Tr` from a complex Ginibre matrix.
pub fn random_state(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let g = CMat::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let mut m = &g * g.adjoint() + CMat::identity(dim, dim).scale(0.05 * dim as f64);
    let tr = m.trace();
    m /= tr;
    DensityMatrix::from_matrix(m).expect("ginibre state is a density matrix")
}

/// Hermitian matrix with Gaussian entries, scaled to unit spectral norm.
pub fn random_observable(rng: &mut impl Rng, dim: usize, label: &str) -> HermitianObservable {
    let g = CMat::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let h = (&g + g.adjoint()).scale(0.5);
    let (w, _) = eigh_raw(&h).expect("hermitian spectrum");
    let norm = w[0].abs().max(w[w.len() - 1].abs());
    HermitianObservable::from_matrix(label, h.scale(1.0 / norm)).expect("symmetrized matrix is hermitian")
}

/// Smallest eigenvalue ratio of the Gram matrix of traceless parts accepted by [`random_set`].
pub const MIN_GRAM_RATIO: f64 = 0.05;

/// Gram matrix `Tr[(O_i - tr O_i / d)(O_j - tr O_j / d)]` of the traceless parts.
pub fn traceless_gram(set: &ObservableSet) -> nalgebra::DMatrix<f64> {
    let d = set.dim();
    let parts: Vec<CMat> = set
        .iter()
        .map(|o| o.matrix() - CMat::identity(d, d) * (o.matrix().trace() / C64::new(d as f64, 0.0)))
        .collect();
    nalgebra::DMatrix::from_fn(set.len(), set.len(), |i, j| (&parts[i] * &parts[j]).trace().re)
}

/// Random observable set of `k` members whose traceless parts are well separated, so the
/// multipliers are identifiable. Rejected draws are counted in the second slot.
pub fn random_set(rng: &mut impl Rng, dim: usize, k: usize) -> (ObservableSet, usize) {
    let mut rejected = 0;
    loop {
        let obs = (0..k).map(|i| random_observable(rng, dim, &format!("O{i}"))).collect();
        let set = ObservableSet::new(obs).expect("random observables share a dimension");
        let w = traceless_gram(&set).symmetric_eigenvalues();
        let (lo, hi) = w.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
        if lo >= MIN_GRAM_RATIO * hi {
            return (set, rejected);
        }
        rejected += 1;
    }
}

fn instance_shape(rng: &mut impl Rng) -> (usize, usize) {
    let dim = rng.random_range(2..=4);
    let k = rng.random_range(1..=3usize).min(dim * dim - 1);
    (dim, k)
}

fn entropy_identities() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let opts = BoundOptions { solver: SolverOptions::with_tol(1e-12), ..BoundOptions::default() };
    let mut worst_deviation = 0.0f64;
    let mut worst_equality = 0.0f64;
    let mut non_commuting = 0;
    for _ in 0..RANDOM_INSTANCES {
        let (dim, k) = instance_shape(&mut rng);
        let (set, _) = random_set(&mut rng, dim, k);
        if !set.commuting() {
            non_commuting += 1;
        }
        let rho0 = random_state(&mut rng, dim);
        let rho1 = random_state(&mut rng, dim);

        let (lambda0, _) = solve_multipliers(&set, &set.expectations(&rho0)?, &MultiplierVector::zeros(k), &opts.solver)?;
        let reference = build_reference(&set, &lambda0)?;
        let d = relative_entropy(&rho0, &reference.state)?;
        let deviation = d - (von_neumann_entropy(&reference.state) - von_neumann_entropy(&rho0));
        worst_deviation = worst_deviation.max(deviation.abs());

        let grid = TimeGrid::new(0.0, 1.0, 2)?;
        let traj = Trajectory::new(grid, vec![rho0, rho1], IntegrationDiagnostics::default())?;
        let series = charge_bounds(&traj, &ChargeSchedule::from(set), &lambda0, &opts)?;
        if !series.gaps.is_empty() {
            return Err(Error::Precondition(format!("identity instance has gaps: {:?}", series.gaps)));
        }
        worst_equality = worst_equality.max(series.max_identity_residual());
    }
    Ok(vec![
        Check::at_most("divergence_equals_entropy_gap", worst_deviation, 1e-7),
        Check::at_most("entropy_change_identity", worst_equality, 1e-7),
        Check::at_least("non_commuting_instances", non_commuting as f64, 1.0),
    ])
}

/// Round-off tolerance on dual increases: the solver's 8-ulp acceptance slack plus one
/// ulp for the rounding of the difference.
pub const DUAL_ROUNDING_ULPS: f64 = 9.0;

fn multiplier_round_trip() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xa5a5);
    let opts = SolverOptions::with_tol(1e-12);
    let mut worst_error = 0.0f64;
    let mut worst_rise = 0.0f64;
    let mut unconverged = 0;
    for _ in 0..RANDOM_INSTANCES {
        let (dim, k) = instance_shape(&mut rng);
        let (set, _) = random_set(&mut rng, dim, k);
        let truth: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..=3.0)).collect();
        let reference = build_reference(&set, &MultiplierVector::new(truth.clone())?)?;
        let (found, report) = solve_multipliers(&set, &reference.targets, &MultiplierVector::zeros(k), &opts)?;
        if !report.converged {
            unconverged += 1;
        }
        let err = found.values().iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_error = worst_error.max(err);
        // Rises are measured in units of the line search's round-off slack.
        for w in report.dual_history.windows(2) {
            worst_rise = worst_rise.max((w[1] - w[0]) / (f64::EPSILON * w[0].abs().max(1.0)));
        }
    }
    Ok(vec![
        Check::at_most("recovery_error", worst_error, 1e-6),
        Check::at_most("dual_rise_ulps", worst_rise, DUAL_ROUNDING_ULPS),
        Check::at_most("unconverged", unconverged as f64, 0.0),
    ])
}

fn conservation() -> Result<Vec<Check>> {
    let (r, _) = scenario(ScenarioId::TwoQubitCharges, &[])?;
    Ok(vec![
        Check::at_most("energy_drift", summary(&r, "energy_drift")?, 1e-9),
        Check::at_most("number_drift", summary(&r, "number_drift")?, 1e-9),
        Check::at_most("entropy_drift", summary(&r, "entropy_drift")?, 1e-9),
    ])
}

/// Overrides that close the gap near `t = tau`, so `lambda_v` leaves the multiplier box.
pub const DEGRADED_ERASURE: [&str; 1] = ["eps_tau=0.05"];

fn degradation() -> Result<Vec<Check>> {
    let (r, _) = scenario(ScenarioId::Erasure, &DEGRADED_ERASURE)?;
    let clamped = r.flags.iter().any(|f| f == "lambda_clamp");
    let all_clamped = !r.gaps.is_empty() && r.gaps.iter().all(|g| g.clamped);
    let qubit_z = HermitianObservable::new("sigma_z", pauli::z())?;
    let untunable = matches!(gaussian_reference(&qubit_z, 0.0, 0.5, 1e-10), Err(Error::UntunableConstraint(_)));
    Ok(vec![
        Check::flag("lambda_clamp_flagged", clamped),
        Check::flag("gaps_are_clamps", all_clamped),
        Check::at_least("min_reported_margin", summary(&r, "min_margin")?, -1e-7),
        Check::flag("centered_qubit_untunable", untunable),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!(select("all").unwrap().len(), 9);
        let ids: Vec<usize> = select("erasure").unwrap().iter().map(|c| c.id).collect();
        assert_eq!(ids, vec![3, 9]);
        assert!(matches!(select("bogus"), Err(Error::Config(_))));
        for id in ScenarioId::ALL {
            assert!(!select(id.as_str()).unwrap().is_empty());
        }
    }

    #[test]
    fn random_draws_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in 2..=4 {
            let rho = random_state(&mut rng, dim);
            assert!(eigh_raw(rho.matrix()).unwrap().0[0] > 0.0);
            let o = random_observable(&mut rng, dim, "o");
            let (w, _) = eigh_raw(o.matrix()).unwrap();
            assert!((w[0].abs().max(w[dim - 1].abs()) - 1.0).abs() < 1e-12);
        }
    }
}
