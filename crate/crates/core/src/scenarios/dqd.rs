use super::erasure::{fluctuation_checks, fluctuation_table};
use super::{params_json, RunSettings, ScenarioOutput};
use crate::bounds::{fluctuation_bounds, FluctuationBoundSeries, ObservableSchedule};
use crate::dynamics::{dqd_model, dqd_number_operator, evolve_redfield, thermal_state, DqdParams, Trajectory};
use crate::error::Result;
use crate::plot::PlotSpec;
use crate::qcore::expectation;
use crate::report::{Check, RunReport};

#[derive(Clone, Debug)]
pub struct DqdRun {
    pub trajectory: Trajectory,
    pub bounds: FluctuationBoundSeries,
    pub electrons: Vec<f64>,
    /// Largest `|Tr rho - 1|` over stored states.
    pub max_trace_error: f64,
}

pub fn run_dqd(p: &DqdParams, s: &RunSettings) -> Result<DqdRun> {
    let model = dqd_model(p)?;
    let rho0 = thermal_state(&model.hamiltonian.at(s.grid.t0), p.t_0)?;
    let trajectory = evolve_redfield(&model, &rho0, &s.grid, &s.integrator)?;
    let bounds = fluctuation_bounds(&trajectory, &ObservableSchedule::Driven(model.hamiltonian.clone()), &s.bounds)?;
    let n = dqd_number_operator();
    let electrons = trajectory.states.iter().map(|r| expectation(r, &n)).collect::<Result<Vec<_>>>()?;
    let max_trace_error =
        trajectory.states.iter().map(|r| (r.matrix().trace().re - 1.0).abs()).fold(0.0, f64::max);
    Ok(DqdRun { trajectory, bounds, electrons, max_trace_error })
}

impl DqdRun {
    pub fn output(&self, p: &DqdParams, s: &RunSettings) -> Result<ScenarioOutput> {
        let mut r = RunReport::new("dqd", params_json(p));
        r.grid = Some(s.grid);
        let series = fluctuation_table(&self.bounds, &[("N", &self.electrons)])?;
        r.columns = series.columns().to_vec();
        fluctuation_checks(&mut r, &self.bounds, s.bounds.margin_tol);
        let d = &self.trajectory.diagnostics;
        r.set("max_trace_error", self.max_trace_error);
        r.set("max_substep_trace_deviation", d.max_trace_deviation);
        r.set("positivity_clamp_max", d.positivity_clamp_max);
        r.set("min_eigenvalue", d.min_eigenvalue);
        r.check(Check::at_most("trace_preserved", self.max_trace_error.max(d.max_trace_deviation), 1e-8));
        r.check(Check::at_most("positivity_clamp_small", d.positivity_clamp_max, 1e-4));
        r.flag("redfield_adiabatic_basis");
        r.notes.push("Redfield generator built in the instantaneous eigenbasis of H_DQD(t); Lamb shift dropped".into());
        r.absorb_diagnostics(d);
        r.finish();
        Ok(ScenarioOutput {
            report: r,
            series,
            plot: PlotSpec::new("t", &[&["dVar", "L_v"], &["margin"]], "double dot: fluctuation cost and lower bound"),
        })
    }
}
