use serde::{Deserialize, Serialize};

use super::{params_json, ScenarioOutput};
use crate::error::{validation, Result};
use crate::plot::PlotSpec;
use crate::qcore::{expectation, von_neumann_entropy, ComplexSquareMatrix, DensityMatrix, HermitianObservable};
use crate::report::{Check, RunReport};
use crate::series::SeriesTable;

/// `mu_1 eta_max - mu_1 eta` used when no cap is given; the dropped tail is below 1e-12.
const TAIL_SPAN: f64 = 28.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasistaticParams {
    pub eps: f64,
    #[serde(rename = "beta_B")]
    pub beta_b: f64,
    pub mu_1: f64,
    pub n_steps: usize,
    /// Final value of the charge eigenvalue in step (iv).
    pub eta_max: Option<f64>,
}

impl Default for QuasistaticParams {
    fn default() -> Self {
        Self { eps: 2.0, beta_b: 2.0, mu_1: 1.0, n_steps: 10_000, eta_max: None }
    }
}

impl QuasistaticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return validation(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.beta_b > 0.0 && self.beta_b.is_finite()) {
            return validation(format!("beta_B must be positive, got {}", self.beta_b));
        }
        if !(self.mu_1 != 0.0 && self.mu_1.is_finite()) {
            return validation("mu_1 must be finite and nonzero");
        }
        if self.n_steps == 0 {
            return validation("n_steps must be at least 1");
        }
        if let Some(cap) = self.eta_max {
            if !cap.is_finite() || self.mu_1 * (cap - self.eta()) <= 0.0 {
                return validation(format!("eta_max = {cap} does not lie beyond eta = {} in the direction of mu_1", self.eta()));
            }
        }
        Ok(())
    }

    /// `eta = beta_B eps / mu_1`.
    pub fn eta(&self) -> f64 {
        self.beta_b * self.eps / self.mu_1
    }

    pub fn resolved_eta_max(&self) -> f64 {
        self.eta_max.unwrap_or_else(|| (self.beta_b * self.eps).max(0.0) / self.mu_1 + TAIL_SPAN / self.mu_1)
    }
}

/// Closed forms of the four steps.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuasistaticAnalytic {
    pub w0: f64,
    pub q0: f64,
    pub w1: f64,
    pub q1: f64,
    pub delta_e_t1: f64,
    pub delta_e_t2: f64,
    pub delta_c1_t2: f64,
    /// `-beta Q0 - mu Q1 + beta dE(t2) + mu dC1(t2)`.
    pub lhs: f64,
    pub delta_s: f64,
    pub residual: f64,
}

/// Occupation of the upper level of a two-level thermal state with Boltzmann exponent `x`.
fn upper_occupation(x: f64) -> f64 {
    let e = (-x).exp();
    e / (1.0 + e)
}

pub fn quasistatic_analytic(p: &QuasistaticParams) -> QuasistaticAnalytic {
    let (b, mu, eps) = (p.beta_b, p.mu_1, p.eps);
    let eta = p.eta();
    let q = upper_occupation(b * eps);
    let w0 = (2.0 / (1.0 + (-b * eps).exp())).ln() / b;
    let delta_e_t1 = eps * q;
    let q0 = w0 - delta_e_t1;
    let s = upper_occupation(mu * eta);
    let w1 = (-mu * eta).exp().ln_1p() / mu;
    let q1 = w1 + eta * s;
    let delta_e_t2 = -delta_e_t1;
    let delta_c1_t2 = eta * s;
    let lhs = -b * q0 - mu * q1 + b * delta_e_t2 + mu * delta_c1_t2;
    let delta_s = -std::f64::consts::LN_2;
    QuasistaticAnalytic { w0, q0, w1, q1, delta_e_t1, delta_e_t2, delta_c1_t2, lhs, delta_s, residual: lhs - delta_s }
}

#[derive(Clone, Debug)]
pub struct QuasistaticRun {
    pub analytic: QuasistaticAnalytic,
    pub eta_max: f64,
    pub w0: f64,
    pub w1: f64,
    pub q0: f64,
    pub q1: f64,
    /// Heat/work route with Riemann-sum work.
    pub lhs: f64,
    /// `S(t_f) - S(0)` of the final four-level state.
    pub delta_s: f64,
    pub gap: f64,
    /// `sum lambda_i(0) delta C_i(t_f) + ln(Z_f / Z_0)` from the final state directly.
    pub state_lhs: f64,
    pub state_gap: f64,
    pub series: SeriesTable,
}

fn diag_obs(label: &str, d: [f64; 4]) -> HermitianObservable {
    HermitianObservable::new(label, ComplexSquareMatrix::diagonal(&d)).unwrap()
}

/// Basis `{|00>, |01>, |10>, |11>}`.
fn diag_state(p: [f64; 4]) -> Result<DensityMatrix> {
    DensityMatrix::from_populations(&p)
}

pub fn run_quasistatic(p: &QuasistaticParams) -> Result<QuasistaticRun> {
    p.validate()?;
    let analytic = quasistatic_analytic(p);
    let (b, mu, eps, n) = (p.beta_b, p.mu_1, p.eps, p.n_steps);
    let eta = p.eta();
    let eta_max = p.resolved_eta_max();
    let mut series = SeriesTable::new(["k", "stage", "control", "W", "lnZr"])?;

    // (i) rho(0) = (|00><00| + |10><10|)/2, Z_r(0) = 2.
    let rho0 = diag_state([0.5, 0.0, 0.5, 0.0])?;
    let ln_z0 = std::f64::consts::LN_2;

    // (ii) raise the |10> level 0 -> eps, left-endpoint work sums.
    let d_eps = eps / n as f64;
    let mut w0 = 0.0;
    for k in 0..n {
        let e = k as f64 * d_eps;
        w0 += upper_occupation(b * e) * d_eps;
        series.push_row(vec![k as f64, 2.0, e + d_eps, w0, (-b * (e + d_eps)).exp().ln_1p()])?;
    }
    let h_s = |level: f64| diag_obs("H_S", [0.0, 0.0, level, 0.0]);
    let qe = upper_occupation(b * eps);
    let rho_t1 = diag_state([1.0 - qe, 0.0, qe, 0.0])?;
    let delta_e_t1 = expectation(&rho_t1, &h_s(eps))? - expectation(&rho0, &h_s(0.0))?;
    let q0 = w0 - delta_e_t1;

    // The |01> level moves to eta at no cost, then SWAP |01> <-> |10>; the swapped
    // population carries charge eta and no energy.
    let c1 = |level: f64| diag_obs("C_1", [0.0, level, 0.0, 0.0]);
    let rho_t2 = diag_state([1.0 - qe, qe, 0.0, 0.0])?;
    let delta_e_t2 = expectation(&rho_t2, &h_s(0.0))? - expectation(&rho_t1, &h_s(eps))?;
    let delta_c1_t2 = expectation(&rho_t2, &c1(eta))? - expectation(&rho_t1, &c1(eta))?;

    // (iv) raise the |01> charge eigenvalue eta -> eta_max.
    let d_eta = (eta_max - eta) / n as f64;
    let mut w1 = 0.0;
    for k in 0..n {
        let x = eta + k as f64 * d_eta;
        w1 += upper_occupation(mu * x) * d_eta;
        let next = x + d_eta;
        series.push_row(vec![(n + k) as f64, 4.0, next, w1, (-mu * next).exp().ln_1p()])?;
    }
    let sf = upper_occupation(mu * eta_max);
    let rho_f = diag_state([1.0 - sf, sf, 0.0, 0.0])?;
    let q1 = w1 + eta * upper_occupation(mu * eta);

    let lhs = -b * q0 - mu * q1 + b * delta_e_t2 + mu * delta_c1_t2;
    let delta_s = von_neumann_entropy(&rho_f) - von_neumann_entropy(&rho0);

    let ln_zf = (-mu * eta_max).exp().ln_1p();
    let delta_e = expectation(&rho_f, &h_s(0.0))? - expectation(&rho0, &h_s(0.0))?;
    let delta_c = expectation(&rho_f, &c1(eta_max))? - expectation(&rho0, &c1(0.0))?;
    let state_lhs = b * delta_e + mu * delta_c + ln_zf - ln_z0;

    Ok(QuasistaticRun {
        analytic,
        eta_max,
        w0,
        w1,
        q0,
        q1,
        lhs,
        delta_s,
        gap: lhs - delta_s,
        state_lhs,
        state_gap: state_lhs - delta_s,
        series,
    })
}

impl QuasistaticRun {
    pub fn output(&self, p: &QuasistaticParams) -> Result<ScenarioOutput> {
        let a = &self.analytic;
        let mut params = params_json(p);
        params["eta_max"] = serde_json::Value::from(self.eta_max);
        let mut r = RunReport::new("quasistatic", params);
        r.columns = self.series.columns().to_vec();
        for (k, v) in [
            ("analytic_W0", a.w0),
            ("analytic_Q0", a.q0),
            ("analytic_W1", a.w1),
            ("analytic_Q1", a.q1),
            ("analytic_dE_t1", a.delta_e_t1),
            ("analytic_dE_t2", a.delta_e_t2),
            ("analytic_dC1_t2", a.delta_c1_t2),
            ("analytic_lhs", a.lhs),
            ("analytic_residual", a.residual),
            ("W0", self.w0),
            ("W1", self.w1),
            ("Q0", self.q0),
            ("Q1", self.q1),
            ("lhs_sum", self.lhs),
            ("dS", self.delta_s),
            ("gap", self.gap),
            ("state_lhs", self.state_lhs),
            ("state_gap", self.state_gap),
        ] {
            r.set(k, v);
        }
        r.check(Check::at_most("analytic_endpoint", a.residual.abs(), 1e-12));
        r.check(Check::at_most("discretized_gap", self.gap.abs(), 5e-4));
        r.check(Check::at_most("work_W0_converged", (self.w0 - a.w0).abs(), 5e-4));
        r.check(Check::at_most("work_W1_converged", (self.w1 - a.w1).abs(), 5e-4));
        r.check(Check::at_most("state_track_gap", self.state_gap.abs(), 1e-9));
        if p.eta_max.is_none() {
            r.flag("eta_cap_default");
        }
        r.finish();
        Ok(ScenarioOutput {
            report: r,
            series: self.series.clone(),
            plot: PlotSpec::new("k", &[&["W"], &["lnZr"]], "quasi-static protocol: cumulative work and ln Z_r"),
        })
    }
}
