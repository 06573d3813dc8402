use serde::{Deserialize, Serialize};

use super::{params_json, RunSettings, ScenarioOutput};
use crate::bounds::{charge_bounds, landauer_lower_bound, ChargeBoundSeries, ChargeSchedule, LandauerSeries};
use crate::dynamics::{evolve_closed, Trajectory};
use crate::error::{validation, Result};
use crate::maxent::{build_reference, MultiplierVector, ObservableSet};
use crate::plot::PlotSpec;
use crate::qcore::{
    expectation, kron, partial_trace, pauli, von_neumann_entropy, ComplexSquareMatrix, DensityMatrix,
    HermitianObservable, Subsystem,
};
use crate::report::{Check, RunReport};
use crate::series::SeriesTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoQubitParams {
    #[serde(rename = "beta_A")]
    pub beta_a: f64,
    #[serde(rename = "beta_B")]
    pub beta_b: f64,
    #[serde(rename = "mu_A")]
    pub mu_a: f64,
    #[serde(rename = "mu_B")]
    pub mu_b: f64,
    pub eps: f64,
    pub eta: f64,
}

impl Default for TwoQubitParams {
    fn default() -> Self {
        Self { beta_a: 0.5, beta_b: 2.0, mu_a: 0.5, mu_b: 1.0, eps: 2.0, eta: 0.2 }
    }
}

impl TwoQubitParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.beta_a, self.beta_b, self.mu_a, self.mu_b, self.eps, self.eta];
        if all.iter().any(|x| !x.is_finite()) {
            return validation("two-qubit parameters must be finite");
        }
        if self.beta_a <= 0.0 || self.beta_b <= 0.0 {
            return validation("inverse temperatures must be positive");
        }
        if self.eps == 0.0 {
            return validation("eps = 0 leaves the energy charge proportional to the identity");
        }
        Ok(())
    }

    /// Initial multipliers `(beta_A, -beta_A mu_A)` of spin A.
    pub fn lambda0(&self) -> MultiplierVector {
        MultiplierVector::new(vec![self.beta_a, -self.beta_a * self.mu_a]).unwrap()
    }

    /// Bath weights `(beta_B, -beta_B mu_B)`.
    pub fn bath_mu(&self) -> [f64; 2] {
        [self.beta_b, -self.beta_b * self.mu_b]
    }
}

fn scaled(m: ComplexSquareMatrix, s: f64) -> ComplexSquareMatrix {
    ComplexSquareMatrix::new(m.into_inner().scale(s)).unwrap()
}

/// Operators and initial state of the two-qubit model.
#[derive(Clone, Debug)]
pub struct TwoQubitSetup {
    /// Single-spin charges `{H_j, N_j}` with `H_j = -(eps/2) sigma_z`, `N_j = (I - sigma_z)/2`.
    pub charges: ObservableSet,
    pub h_total: HermitianObservable,
    pub n_total: HermitianObservable,
    pub gamma_a: DensityMatrix,
    pub gamma_b: DensityMatrix,
    pub rho0: DensityMatrix,
}

pub fn two_qubit_setup(p: &TwoQubitParams) -> Result<TwoQubitSetup> {
    p.validate()?;
    let id = pauli::identity();
    let h = HermitianObservable::new("H_A", scaled(pauli::z(), -p.eps / 2.0))?;
    let n_mat = ComplexSquareMatrix::new((id.matrix() - pauli::z().matrix()).scale(0.5))?;
    let n = HermitianObservable::new("N_A", n_mat)?;
    let charges = ObservableSet::new(vec![h.clone(), n.clone()])?;

    let gamma_a = build_reference(&charges, &p.lambda0())?.state;
    let gamma_b = build_reference(&charges, &MultiplierVector::new(p.bath_mu().to_vec())?)?.state;
    let rho0 = DensityMatrix::new(kron(gamma_a.as_square(), gamma_b.as_square()))?;

    let h0 = kron(h.as_square(), &id).into_inner() + kron(&id, h.as_square()).into_inner();
    let xx = kron(&pauli::x(), &pauli::x()).into_inner();
    let yy = kron(&pauli::y(), &pauli::y()).into_inner();
    let hi = (xx + yy).scale(-p.eta / 2.0);
    let h_total = HermitianObservable::from_matrix("H", h0 + hi)?;
    let n_total = HermitianObservable::from_matrix(
        "N",
        kron(n.as_square(), &id).into_inner() + kron(&id, n.as_square()).into_inner(),
    )?;
    Ok(TwoQubitSetup { charges, h_total, n_total, gamma_a, gamma_b, rho0 })
}

#[derive(Clone, Debug)]
pub struct TwoQubitRun {
    pub global: Trajectory,
    pub spin_a: Trajectory,
    pub bounds: ChargeBoundSeries,
    pub landauer: LandauerSeries,
    pub energy_drift: f64,
    pub number_drift: f64,
    pub entropy_drift: f64,
    /// `|[H, rho0]|` entrywise max.
    pub initial_commutator: f64,
}

pub fn run_two_qubit_charges(p: &TwoQubitParams, s: &RunSettings) -> Result<TwoQubitRun> {
    let setup = two_qubit_setup(p)?;
    let global = evolve_closed(&setup.h_total, &setup.rho0, &s.grid)?;
    let spin_a = global.map_states(|r| partial_trace(r, (2, 2), Subsystem::A))?;

    let drift = |f: &dyn Fn(&DensityMatrix) -> f64| {
        let v0 = f(&global.states[0]);
        global.states.iter().map(|r| (f(r) - v0).abs()).fold(0.0, f64::max)
    };
    let energy_drift = drift(&|r| expectation(r, &setup.h_total).unwrap());
    let number_drift = drift(&|r| expectation(r, &setup.n_total).unwrap());
    let entropy_drift = drift(&|r| von_neumann_entropy(r));
    let comm = setup.h_total.matrix() * setup.rho0.matrix() - setup.rho0.matrix() * setup.h_total.matrix();
    let initial_commutator = comm.iter().fold(0.0f64, |m, z| m.max(z.norm()));

    let schedule = ChargeSchedule::from(setup.charges.clone());
    let bounds = charge_bounds(&spin_a, &schedule, &p.lambda0(), &s.bounds)?;

    let times: Vec<f64> = bounds.points.iter().map(|q| q.t).collect();
    let bath: Vec<Vec<f64>> = bounds.points.iter().map(|q| q.delta_c.iter().map(|d| -d).collect()).collect();
    let ds: Vec<f64> = bounds.points.iter().map(|q| q.delta_s).collect();
    let landauer = landauer_lower_bound(&times, &bath, &p.bath_mu(), &ds)?;

    Ok(TwoQubitRun { global, spin_a, bounds, landauer, energy_drift, number_drift, entropy_drift, initial_commutator })
}

impl TwoQubitRun {
    pub const COLUMNS: [&'static str; 9] = ["t", "lhs", "U_M", "margin", "dS", "D", "lnZr", "lambda0", "lambda1"];

    pub fn series(&self) -> Result<SeriesTable> {
        let mut t = SeriesTable::new(Self::COLUMNS)?;
        for q in &self.bounds.points {
            t.push_row(vec![q.t, q.lhs, q.upper, q.margin, q.delta_s, q.divergence, q.ln_z, q.lambda[0], q.lambda[1]])?;
        }
        Ok(t)
    }

    pub fn output(&self, p: &TwoQubitParams, s: &RunSettings) -> Result<ScenarioOutput> {
        let tol = s.bounds.margin_tol;
        let b = &self.bounds;
        let mut r = RunReport::new("two_qubit_charges", params_json(p));
        r.grid = Some(s.grid);
        r.columns = Self::COLUMNS.iter().map(|c| c.to_string()).collect();
        r.set("min_margin", b.min_margin());
        r.set("max_gap_residual", b.max_gap_residual());
        r.set("max_identity_residual", b.max_identity_residual());
        r.set("initial_divergence", b.initial_divergence);
        r.set("energy_drift", self.energy_drift);
        r.set("number_drift", self.number_drift);
        r.set("entropy_drift", self.entropy_drift);
        r.set("landauer_violations", self.landauer.violations() as f64);
        r.set("initial_commutator", self.initial_commutator);
        r.check(Check::at_least("margin_nonnegative", b.min_margin(), -tol));
        r.check(Check::at_most("margin_equals_divergence", b.max_gap_residual(), 1e-7));
        r.check(Check::at_most("identity_residual", b.max_identity_residual(), 1e-7));
        r.check(Check::at_most("energy_conserved", self.energy_drift, 1e-9));
        r.check(Check::at_most("number_conserved", self.number_drift, 1e-9));
        r.check(Check::at_most("global_entropy_conserved", self.entropy_drift, 1e-9));
        r.check(Check::flag("no_series_gaps", b.gaps.is_empty()));
        if self.landauer.violations() > 0 {
            r.flag("landauer_violations");
            r.notes.push(format!(
                "generalized Landauer bound violated at {} of {} points; reported, not enforced, for this finite bath",
                self.landauer.violations(),
                self.landauer.points.len()
            ));
        }
        if s.bounds.parallel {
            r.flag("parallel_cold_start");
        }
        r.solver = Some(b.solver.clone());
        r.absorb_gaps(&b.gaps);
        r.finish();
        Ok(ScenarioOutput {
            report: r,
            series: self.series()?,
            plot: PlotSpec::new("t", &[&["lhs", "U_M"], &["margin", "D"]], "weighted charge cost and upper bound"),
        })
    }
}
