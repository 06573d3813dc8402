//! The four model experiments plus the analytic reset example, as config-driven runs.

mod dqd;
mod erasure;
mod quasistatic;
mod reset;
mod two_qubit;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundOptions;
use crate::config::{GridSpec, OutputOptions, ScenarioConfig};
use crate::dynamics::{IntegratorOptions, TimeGrid};
use crate::error::{validation, Error, Result};
use crate::plot::PlotSpec;
use crate::report::RunReport;
use crate::series::SeriesTable;

pub use dqd::{run_dqd, DqdRun};
pub use erasure::{run_erasure, ErasureRun, MarginTrend};
pub use quasistatic::{quasistatic_analytic, run_quasistatic, QuasistaticAnalytic, QuasistaticParams, QuasistaticRun};
pub use reset::{reset_example, ResetParams, ResetReport};
pub use two_qubit::{run_two_qubit_charges, two_qubit_setup, TwoQubitParams, TwoQubitRun, TwoQubitSetup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    TwoQubitCharges,
    Quasistatic,
    Erasure,
    Dqd,
    Reset,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] =
        [Self::TwoQubitCharges, Self::Quasistatic, Self::Erasure, Self::Dqd, Self::Reset];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::TwoQubitCharges => "two_qubit_charges",
            Self::Quasistatic => "quasistatic",
            Self::Erasure => "erasure",
            Self::Dqd => "dqd",
            Self::Reset => "reset",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::TwoQubitCharges => "two exchanging qubits, charge-cost upper bound along closed evolution",
            Self::Quasistatic => "four-step quasi-static protocol, analytic and discretized tracks",
            Self::Erasure => "driven qubit erasure under Lindblad dynamics, fluctuation bound",
            Self::Dqd => "driven double quantum dot under Redfield dynamics, fluctuation bound",
            Self::Reset => "ideal qubit reset: energy and variance changes",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

impl std::fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a run writes: report, series and the default plot layout.
#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub report: RunReport,
    pub series: SeriesTable,
    pub plot: PlotSpec,
}

/// Grid and numerical settings shared by the trajectory scenarios.
#[derive(Clone, Copy, Debug)]
pub struct RunSettings {
    pub grid: TimeGrid,
    pub integrator: IntegratorOptions,
    pub bounds: BoundOptions,
}

impl RunSettings {
    pub fn new(grid: TimeGrid, max_step: f64) -> Self {
        Self { grid, integrator: IntegratorOptions::with_max_step(max_step), bounds: BoundOptions::default() }
    }

    fn resolve(
        spec: &GridSpec,
        output: &OutputOptions,
        t1: f64,
        n_points: usize,
        max_step: f64,
        margin_tol: f64,
    ) -> Result<Self> {
        let grid = TimeGrid::new(spec.t0.unwrap_or(0.0), spec.t1.unwrap_or(t1), spec.n_points.unwrap_or(n_points))?;
        let max_step = spec.max_step.unwrap_or(max_step);
        if !(max_step > 0.0 && max_step.is_finite()) {
            return validation(format!("grid.max_step must be positive, got {max_step}"));
        }
        let mut s = Self::new(grid, max_step);
        let tol = output.margin_tol.unwrap_or(margin_tol);
        if !(tol >= 0.0 && tol.is_finite()) {
            return validation("output.margin_tol must be finite and nonnegative");
        }
        s.bounds.margin_tol = tol;
        s.bounds.parallel = output.parallel;
        Ok(s)
    }
}

fn params_json<T: Serialize>(p: &T) -> serde_json::Value {
    serde_json::to_value(p).expect("params serialize")
}

fn no_grid(config: &ScenarioConfig) -> Result<()> {
    if config.grid != GridSpec::default() {
        return validation(format!("scenario {} takes no time grid", config.scenario));
    }
    Ok(())
}

/// Runs the configured scenario.
pub fn run(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    let out = &config.output;
    match config.scenario {
        ScenarioId::TwoQubitCharges => {
            let p: TwoQubitParams = config.typed_params()?;
            let s = RunSettings::resolve(&config.grid, out, 50.0, 2001, 0.0125, 1e-7)?;
            run_two_qubit_charges(&p, &s)?.output(&p, &s)
        }
        ScenarioId::Quasistatic => {
            no_grid(config)?;
            let p: QuasistaticParams = config.typed_params()?;
            run_quasistatic(&p)?.output(&p)
        }
        ScenarioId::Erasure => {
            let p: crate::dynamics::ErasureParams = config.typed_params()?;
            p.validate()?;
            let s = RunSettings::resolve(&config.grid, out, p.tau, 1001, 5e-3, 1e-7)?;
            run_erasure(&p, &s)?.output(&p, &s)
        }
        ScenarioId::Dqd => {
            let p: crate::dynamics::DqdParams = config.typed_params()?;
            let s = RunSettings::resolve(&config.grid, out, 30.0, 1501, 2.5e-3, 1e-6)?;
            run_dqd(&p, &s)?.output(&p, &s)
        }
        ScenarioId::Reset => {
            no_grid(config)?;
            let p: ResetParams = config.typed_params()?;
            reset_example(&p)?.output(&p)
        }
    }
}

/// Trailing moving average over `window` points.
pub(crate) fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    values.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect()
}

/// Mann-Kendall statistic `S` and its normal score `z` (no tie correction).
pub(crate) fn mann_kendall(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if values[j] > values[i] {
                s += 1.0;
            } else if values[j] < values[i] {
                s -= 1.0;
            }
        }
    }
    let nf = n as f64;
    let var = nf * (nf - 1.0) * (2.0 * nf + 5.0) / 18.0;
    let z = if s > 0.0 {
        (s - 1.0) / var.sqrt()
    } else if s < 0.0 {
        (s + 1.0) / var.sqrt()
    } else {
        0.0
    };
    (s, z)
}
