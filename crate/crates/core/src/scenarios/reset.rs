use serde::{Deserialize, Serialize};

use super::{params_json, ScenarioOutput};
use crate::error::{validation, Result};
use crate::plot::PlotSpec;
use crate::qcore::{expectation, pauli, variance, von_neumann_entropy, ComplexSquareMatrix, DensityMatrix, HermitianObservable};
use crate::report::{Check, RunReport};
use crate::series::SeriesTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResetParams {
    pub omega: f64,
    /// Initial excited-state population; 0.5 is the maximally mixed state.
    pub p_initial: f64,
}

impl Default for ResetParams {
    fn default() -> Self {
        Self { omega: 1.0, p_initial: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResetReport {
    /// `E_i - E_f`.
    pub delta_e: f64,
    /// `Var_i - Var_f`.
    pub delta_var: f64,
    pub entropy_change: f64,
    pub initial: [f64; 3],
    pub final_: [f64; 3],
}

/// Reset of a qubit with `H = omega sigma_z / 2` to its ground state.
pub fn reset_example(p: &ResetParams) -> Result<ResetReport> {
    if !p.omega.is_finite() {
        return validation("omega must be finite");
    }
    if !(0.0..=1.0).contains(&p.p_initial) {
        return validation(format!("p_initial must lie in [0, 1], got {}", p.p_initial));
    }
    let h = HermitianObservable::new("H_S", ComplexSquareMatrix::new(pauli::z().into_inner().scale(p.omega / 2.0))?)?;
    // sigma_z = +1 is index 0, so the ground state of omega sigma_z / 2 (omega > 0) is index 1.
    let ground = if p.omega >= 0.0 { 1 } else { 0 };
    let mut pops = [0.0; 2];
    pops[1 - ground] = p.p_initial;
    pops[ground] = 1.0 - p.p_initial;
    let rho_i = DensityMatrix::from_populations(&pops)?;
    let rho_f = DensityMatrix::basis_state(2, ground)?;
    let stats = |r: &DensityMatrix| -> Result<[f64; 3]> {
        Ok([expectation(r, &h)?, variance(r, &h)?, von_neumann_entropy(r)])
    };
    let initial = stats(&rho_i)?;
    let final_ = stats(&rho_f)?;
    Ok(ResetReport {
        delta_e: initial[0] - final_[0],
        delta_var: initial[1] - final_[1],
        entropy_change: final_[2] - initial[2],
        initial,
        final_,
    })
}

impl ResetReport {
    pub fn output(&self, p: &ResetParams) -> Result<ScenarioOutput> {
        let mut series = SeriesTable::new(["stage", "energy", "variance", "entropy"])?;
        series.push_row(vec![0.0, self.initial[0], self.initial[1], self.initial[2]])?;
        series.push_row(vec![1.0, self.final_[0], self.final_[1], self.final_[2]])?;
        let mut r = RunReport::new("reset", params_json(p));
        r.columns = series.columns().to_vec();
        r.set("dE", self.delta_e);
        r.set("dVar", self.delta_var);
        r.set("dS", self.entropy_change);
        if p.p_initial == 0.5 {
            let w = p.omega.abs();
            r.check(Check::at_most("energy_change_is_omega_over_2", (self.delta_e - w / 2.0).abs(), 1e-15));
            r.check(Check::at_most("variance_change_is_omega_sq_over_4", (self.delta_var - w * w / 4.0).abs(), 1e-15));
        }
        r.finish();
        Ok(ScenarioOutput {
            report: r,
            series,
            plot: PlotSpec::new("stage", &[&["energy"], &["variance"]], "qubit reset"),
        })
    }
}
