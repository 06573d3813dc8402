use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::redfield::{bose_occupation, BathSpectrum, CouplingKind, RedfieldModel, SystemBathCoupling};
use super::{DrivenHamiltonian, JumpChannel, ProtocolDescriptor};
use crate::error::{validation, Result};
use crate::qcore::{kron, pauli, CMat, ComplexSquareMatrix, HermitianObservable, C64};

/// Driven erasure qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErasureParams {
    pub eps0: f64,
    pub eps_tau: f64,
    pub tau: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    #[serde(rename = "T_E")]
    pub temperature: f64,
}

impl Default for ErasureParams {
    fn default() -> Self {
        Self { eps0: 0.4, eps_tau: 4.0, tau: 10.0, gamma1: 0.2, gamma2: 0.2, temperature: 0.1 }
    }
}

impl ErasureParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.eps0, self.eps_tau, self.tau, self.gamma1, self.gamma2, self.temperature];
        if all.iter().any(|x| !x.is_finite()) {
            return validation("erasure parameters must be finite");
        }
        if self.tau <= 0.0 {
            return validation(format!("tau must be positive, got {}", self.tau));
        }
        if self.temperature <= 0.0 {
            return validation(format!("T_E must be positive, got {}", self.temperature));
        }
        if self.eps0 <= 0.0 || self.eps_tau <= 0.0 {
            return validation("gaps eps0 and eps_tau must be positive");
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return validation("damping rates must be nonnegative");
        }
        Ok(())
    }

    fn descriptor(&self) -> ProtocolDescriptor {
        ProtocolDescriptor::new(
            "erasure",
            &[
                ("eps0", self.eps0),
                ("eps_tau", self.eps_tau),
                ("tau", self.tau),
                ("gamma1", self.gamma1),
                ("gamma2", self.gamma2),
                ("T_E", self.temperature),
            ],
        )
    }
}

/// `eps(t) = eps0 + (eps_tau - eps0) sin^2(pi t / 2 tau)`.
pub fn erasure_gap(p: &ErasureParams, t: f64) -> f64 {
    let s = (PI * t / (2.0 * p.tau)).sin();
    p.eps0 + (p.eps_tau - p.eps0) * s * s
}

/// `theta(t) = pi (t / tau - 1)`.
pub fn erasure_angle(p: &ErasureParams, t: f64) -> f64 {
    PI * (t / p.tau - 1.0)
}

fn erasure_matrix(eps: f64, theta: f64) -> CMat {
    let (c, s) = (0.5 * eps * theta.cos(), 0.5 * eps * theta.sin());
    ComplexSquareMatrix::from_real_rows(2, &[c, s, s, -c]).unwrap().into_inner()
}

/// Excited and ground eigenvectors of the erasure Hamiltonian at angle `theta`.
fn erasure_basis(theta: f64) -> ([f64; 2], [f64; 2]) {
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    ([c, s], [-s, c])
}

fn outer(ket: [f64; 2], bra: [f64; 2], scale: f64) -> CMat {
    CMat::from_fn(2, 2, |i, j| C64::new(scale * ket[i] * bra[j], 0.0))
}

pub fn erasure_hamiltonian(p: &ErasureParams) -> DrivenHamiltonian {
    let q = *p;
    DrivenHamiltonian::new(2, p.descriptor(), move |t| {
        let m = erasure_matrix(erasure_gap(&q, t), erasure_angle(&q, t));
        HermitianObservable::from_matrix("H_S", m).expect("erasure hamiltonian")
    })
}

/// Erasure Hamiltonian and its two instantaneous-eigenbasis jump channels.
pub fn erasure_model(p: &ErasureParams) -> Result<(DrivenHamiltonian, Vec<JumpChannel>)> {
    p.validate()?;
    let q = *p;
    let down = JumpChannel::new("L1", p.gamma1, move |t| {
        let eps = erasure_gap(&q, t);
        let n = bose_occupation(eps, q.temperature);
        let (e, g) = erasure_basis(erasure_angle(&q, t));
        outer(g, e, (eps * (n + 1.0)).sqrt())
    })?;
    let up = JumpChannel::new("L2", p.gamma2, move |t| {
        let eps = erasure_gap(&q, t);
        let n = bose_occupation(eps, q.temperature);
        let (e, g) = erasure_basis(erasure_angle(&q, t));
        outer(e, g, (eps * n).sqrt())
    })?;
    Ok((erasure_hamiltonian(p), vec![down, up]))
}

/// Driven double quantum dot with two fermionic leads and a phonon bath.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqdParams {
    #[serde(rename = "mu_L")]
    pub mu_l: f64,
    #[serde(rename = "mu_R")]
    pub mu_r: f64,
    #[serde(rename = "Omega")]
    pub omega: f64,
    #[serde(rename = "eps_L0")]
    pub eps_l0: f64,
    #[serde(rename = "eps_R0")]
    pub eps_r0: f64,
    #[serde(rename = "eps_Ltau")]
    pub eps_l_tau: f64,
    #[serde(rename = "eps_Rtau")]
    pub eps_r_tau: f64,
    pub phi: f64,
    #[serde(rename = "Gamma_L")]
    pub gamma_l: f64,
    #[serde(rename = "Gamma_R")]
    pub gamma_r: f64,
    #[serde(rename = "Gamma_ph")]
    pub gamma_ph: f64,
    pub delta: f64,
    #[serde(rename = "T_L")]
    pub t_l: f64,
    #[serde(rename = "T_R")]
    pub t_r: f64,
    #[serde(rename = "T_ph")]
    pub t_ph: f64,
    /// Temperature of the initial Gibbs state of `H_DQD(0)`.
    #[serde(rename = "T_0")]
    pub t_0: f64,
}

impl Default for DqdParams {
    fn default() -> Self {
        Self {
            mu_l: 0.0,
            mu_r: 0.0,
            omega: 1.0,
            eps_l0: 2.0,
            eps_r0: 2.0,
            eps_l_tau: 1.5,
            eps_r_tau: 1.5,
            phi: PI / 4.0,
            gamma_l: 0.1,
            gamma_r: 0.1,
            gamma_ph: 0.1,
            delta: 0.2,
            t_l: 0.2,
            t_r: 0.3,
            t_ph: 0.4,
            t_0: 0.25,
        }
    }
}

impl DqdParams {
    pub fn eps_l(&self, t: f64) -> f64 {
        self.eps_l0 + self.eps_l_tau * (self.omega * t).sin()
    }

    pub fn eps_r(&self, t: f64) -> f64 {
        self.eps_r0 + self.eps_r_tau * (self.omega * t + self.phi).sin()
    }

    fn as_pairs(&self) -> [(&'static str, f64); 16] {
        [
            ("mu_L", self.mu_l),
            ("mu_R", self.mu_r),
            ("Omega", self.omega),
            ("eps_L0", self.eps_l0),
            ("eps_R0", self.eps_r0),
            ("eps_Ltau", self.eps_l_tau),
            ("eps_Rtau", self.eps_r_tau),
            ("phi", self.phi),
            ("Gamma_L", self.gamma_l),
            ("Gamma_R", self.gamma_r),
            ("Gamma_ph", self.gamma_ph),
            ("delta", self.delta),
            ("T_L", self.t_l),
            ("T_R", self.t_r),
            ("T_ph", self.t_ph),
            ("T_0", self.t_0),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.as_pairs() {
            if !v.is_finite() {
                return validation(format!("DQD parameter {name} must be finite"));
            }
        }
        for (name, v) in [("T_L", self.t_l), ("T_R", self.t_r), ("T_ph", self.t_ph), ("T_0", self.t_0)] {
            if v <= 0.0 {
                return validation(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("Gamma_L", self.gamma_l), ("Gamma_R", self.gamma_r), ("Gamma_ph", self.gamma_ph)] {
            if v < 0.0 {
                return validation(format!("{name} must be nonnegative, got {v}"));
            }
        }
        Ok(())
    }
}

/// Fock-space operators of the double dot. Basis index `2 n_L + n_R`.
#[derive(Clone, Debug)]
pub struct DqdOperators {
    pub d_l: CMat,
    pub d_r: CMat,
    pub n_l: CMat,
    pub n_r: CMat,
    /// `d_L^dagger d_R + d_R^dagger d_L`.
    pub hopping: CMat,
}

impl DqdOperators {
    pub fn new() -> Self {
        let a = pauli::lowering();
        let d_l = kron(&a, &pauli::identity()).into_inner();
        // Jordan-Wigner string on the left dot keeps the modes anticommuting.
        let d_r = kron(&pauli::z(), &a).into_inner();
        let n_l = d_l.adjoint() * &d_l;
        let n_r = d_r.adjoint() * &d_r;
        let lr = d_l.adjoint() * &d_r;
        let hopping = &lr + lr.adjoint();
        Self { d_l, d_r, n_l, n_r, hopping }
    }

    fn hamiltonian(&self, eps_l: f64, eps_r: f64, delta: f64) -> HermitianObservable {
        let m = self.n_l.scale(eps_l) + self.n_r.scale(eps_r) + self.hopping.scale(delta);
        HermitianObservable::from_matrix("H_DQD", m).expect("dqd hamiltonian")
    }
}

impl Default for DqdOperators {
    fn default() -> Self {
        Self::new()
    }
}

/// Total electron number `n_L + n_R`.
pub fn dqd_number_operator() -> HermitianObservable {
    let ops = DqdOperators::new();
    HermitianObservable::from_matrix("N", ops.n_l + ops.n_r).unwrap()
}

pub fn dqd_model(p: &DqdParams) -> Result<RedfieldModel> {
    p.validate()?;
    let ops = DqdOperators::new();
    let q = *p;
    let h_ops = ops.clone();
    let descriptor = ProtocolDescriptor::new("dqd", &p.as_pairs());
    let hamiltonian =
        DrivenHamiltonian::new(4, descriptor, move |t| h_ops.hamiltonian(q.eps_l(t), q.eps_r(t), q.delta));

    let left = BathSpectrum::fermionic("left", p.gamma_l, p.t_l, p.mu_l)?;
    let right = BathSpectrum::fermionic("right", p.gamma_r, p.t_r, p.mu_r)?;
    let phonon = BathSpectrum::bosonic("phonon", p.gamma_ph, p.t_ph)?;
    let couplings = vec![
        SystemBathCoupling::new(ops.d_l.adjoint(), left.clone(), CouplingKind::Creation)?,
        SystemBathCoupling::new(ops.d_l.clone(), left, CouplingKind::Annihilation)?,
        SystemBathCoupling::new(ops.d_r.adjoint(), right.clone(), CouplingKind::Creation)?,
        SystemBathCoupling::new(ops.d_r.clone(), right, CouplingKind::Annihilation)?,
        SystemBathCoupling::new(ops.hopping.clone(), phonon, CouplingKind::Displacement)?,
    ];
    RedfieldModel::new(hamiltonian, couplings)
}
