use super::{mann_kendall, moving_average, params_json, RunSettings, ScenarioOutput};
use crate::bounds::{fluctuation_bounds, FluctuationBoundSeries, ObservableSchedule};
use crate::dynamics::{erasure_model, evolve_lindblad, thermal_state, ErasureParams, Trajectory};
use crate::error::Result;
use crate::plot::PlotSpec;
use crate::qcore::{eigh, DensityMatrix, HermitianObservable};
use crate::report::{Check, RunReport};
use crate::series::SeriesTable;

pub(super) const FLUCTUATION_COLUMNS: [&str; 10] =
    ["t", "dVar", "L_v", "margin", "scaled_margin", "dS", "R_v", "lambda_v", "D", "var"];

pub(super) fn fluctuation_table(b: &FluctuationBoundSeries, extra: &[(&str, &[f64])]) -> Result<SeriesTable> {
    let mut t = SeriesTable::new(FLUCTUATION_COLUMNS.iter().copied().chain(extra.iter().map(|(n, _)| *n)))?;
    for q in &b.points {
        let mut row = vec![
            q.t,
            q.delta_var,
            q.lower,
            q.margin,
            q.scaled_margin,
            q.delta_s,
            q.remainder,
            q.lambda_v,
            q.divergence,
            q.variance,
        ];
        row.extend(extra.iter().map(|(_, v)| v[q.index]));
        t.push_row(row)?;
    }
    Ok(t)
}

/// Shared margin checks of the fluctuation scenarios.
pub(super) fn fluctuation_checks(r: &mut RunReport, b: &FluctuationBoundSeries, tol: f64) {
    r.set("lambda_v0", b.lambda_v0);
    r.set("initial_divergence", b.initial_divergence);
    r.set("min_margin", b.min_margin());
    r.set("min_scaled_margin", b.min_scaled_margin());
    r.set("max_gap_residual", b.max_gap_residual());
    r.set("max_identity_residual", b.max_identity_residual());
    r.set("gaps", b.gaps.len() as f64);
    if b.inverted {
        r.flag("lambda_v0_negative");
        r.notes.push("lambda_v(0) < 0: the divided bound is inverted; only the scaled form is checked".into());
    } else {
        r.check(Check::at_least("margin_nonnegative", b.min_margin(), -tol));
    }
    r.check(Check::at_least("scaled_margin_nonnegative", b.min_scaled_margin(), -tol));
    r.check(Check::at_most("scaled_margin_equals_divergence", b.max_gap_residual(), 1e-7));
    r.check(Check::at_most("identity_residual", b.max_identity_residual(), 1e-7));
    r.solver = Some(b.solver.clone());
    r.absorb_gaps(&b.gaps);
}

/// Population of the upper instantaneous eigenstate of `h`.
pub(super) fn excited_population(rho: &DensityMatrix, h: &HermitianObservable) -> Result<f64> {
    let s = eigh(h)?;
    let top = s.eigenvector(s.dim() - 1);
    let v = nalgebra::DVector::from_vec(top);
    Ok((v.adjoint() * rho.matrix() * &v)[(0, 0)].re)
}

/// Trend of the 10-point moving average of a margin tail.
#[derive(Clone, Copy, Debug)]
pub struct MarginTrend {
    /// Number of step-to-step increases of the moving average.
    pub increases: usize,
    pub mann_kendall_s: f64,
    pub mann_kendall_z: f64,
    pub start: f64,
    pub end: f64,
}

impl MarginTrend {
    /// One-sided 5% critical value of the standard normal.
    pub const Z_CRITICAL: f64 = -1.6449;

    pub fn of(tail: &[f64]) -> Self {
        let ma = moving_average(tail, 10);
        let increases = ma.windows(2).filter(|w| w[1] > w[0]).count();
        let (mann_kendall_s, mann_kendall_z) = mann_kendall(&ma);
        let start = ma.first().copied().unwrap_or(f64::NAN);
        let end = ma.last().copied().unwrap_or(f64::NAN);
        Self { increases, mann_kendall_s, mann_kendall_z, start, end }
    }

    pub fn decreasing(&self) -> bool {
        self.mann_kendall_z <= Self::Z_CRITICAL
    }
}

#[derive(Clone, Debug)]
pub struct ErasureRun {
    pub trajectory: Trajectory,
    pub bounds: FluctuationBoundSeries,
    pub excited: Vec<f64>,
    pub final_excited: f64,
    pub trend: MarginTrend,
}

pub fn run_erasure(p: &ErasureParams, s: &RunSettings) -> Result<ErasureRun> {
    let (h, channels) = erasure_model(p)?;
    let rho0 = thermal_state(&h.at(s.grid.t0), p.temperature)?;
    let trajectory = evolve_lindblad(&h, &channels, &rho0, &s.grid, &s.integrator)?;
    let bounds = fluctuation_bounds(&trajectory, &ObservableSchedule::Driven(h.clone()), &s.bounds)?;
    let excited = trajectory
        .states
        .iter()
        .enumerate()
        .map(|(k, r)| excited_population(r, &h.at(s.grid.time(k))))
        .collect::<Result<Vec<_>>>()?;
    let final_excited = *excited.last().unwrap();

    let quarter = s.grid.t0 + 0.75 * (s.grid.t1 - s.grid.t0);
    let tail: Vec<f64> = bounds.points.iter().filter(|q| q.t >= quarter).map(|q| q.margin).collect();
    let trend = MarginTrend::of(&tail);
    Ok(ErasureRun { trajectory, bounds, excited, final_excited, trend })
}

impl ErasureRun {
    pub fn output(&self, p: &ErasureParams, s: &RunSettings) -> Result<ScenarioOutput> {
        let tol = s.bounds.margin_tol;
        let mut r = RunReport::new("erasure", params_json(p));
        r.grid = Some(s.grid);
        let series = fluctuation_table(&self.bounds, &[("p_excited", &self.excited)])?;
        r.columns = series.columns().to_vec();
        fluctuation_checks(&mut r, &self.bounds, tol);
        r.set("final_excited", self.final_excited);
        r.set("ground_fidelity", 1.0 - self.final_excited);
        r.set("trend_increases", self.trend.increases as f64);
        r.set("trend_mann_kendall_s", self.trend.mann_kendall_s);
        r.set("trend_start", self.trend.start);
        r.set("trend_end", self.trend.end);
        r.check(Check::at_most("final_excited_population", self.final_excited, 2e-2));
        r.check(Check::at_most("margin_trend_final_quarter", self.trend.mann_kendall_z, MarginTrend::Z_CRITICAL));
        r.absorb_diagnostics(&self.trajectory.diagnostics);
        r.finish();
        Ok(ScenarioOutput {
            report: r,
            series,
            plot: PlotSpec::new("t", &[&["dVar", "L_v"], &["margin"]], "erasure: fluctuation cost and lower bound"),
        })
    }
}
