use serde::Serialize;

use super::integrator::{integrate, IntegratorOptions, PositivityPolicy};
use super::{commutator, superoperator_matrix, DrivenHamiltonian, TimeGrid, Trajectory};
use crate::error::{validation, Error, Result};
use crate::qcore::{eigh_raw, CMat, DensityMatrix, C64};

const REDFIELD_POSITIVITY: PositivityPolicy = PositivityPolicy { warn_below: -1e-4, fail_below: -5e-2 };

/// Below this Bohr frequency the bosonic emission factor uses its classical limit.
const ZERO_FREQUENCY: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Statistics {
    Fermionic { mu: f64 },
    Bosonic,
}

/// Flat (wide-band) bath spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BathSpectrum {
    pub label: String,
    pub statistics: Statistics,
    pub hybridization: f64,
    pub temperature: f64,
}

impl BathSpectrum {
    pub fn new(label: &str, statistics: Statistics, hybridization: f64, temperature: f64) -> Result<Self> {
        if !(hybridization >= 0.0 && hybridization.is_finite()) {
            return validation(format!("bath '{label}': hybridization must be finite and nonnegative"));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return validation(format!("bath '{label}': temperature must be positive"));
        }
        if let Statistics::Fermionic { mu } = statistics {
            if !mu.is_finite() {
                return validation(format!("bath '{label}': chemical potential must be finite"));
            }
        }
        Ok(Self { label: label.to_string(), statistics, hybridization, temperature })
    }

    pub fn fermionic(label: &str, hybridization: f64, temperature: f64, mu: f64) -> Result<Self> {
        Self::new(label, Statistics::Fermionic { mu }, hybridization, temperature)
    }

    pub fn bosonic(label: &str, hybridization: f64, temperature: f64) -> Result<Self> {
        Self::new(label, Statistics::Bosonic, hybridization, temperature)
    }
}

/// Role of the system operator in `V = sum A (x) B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    /// `A = d^dagger`: the bath absorbs an electron from the lead.
    Creation,
    /// `A = d`.
    Annihilation,
    /// Hermitian `A` coupled to a bosonic displacement.
    Displacement,
}

#[derive(Clone, Debug)]
pub struct SystemBathCoupling {
    pub operator: CMat,
    pub bath: BathSpectrum,
    pub kind: CouplingKind,
}

impl SystemBathCoupling {
    pub fn new(operator: CMat, bath: BathSpectrum, kind: CouplingKind) -> Result<Self> {
        if !operator.is_square() {
            return validation("coupling operator must be square");
        }
        match (kind, bath.statistics) {
            (CouplingKind::Displacement, Statistics::Bosonic) => {}
            (CouplingKind::Creation | CouplingKind::Annihilation, Statistics::Fermionic { .. }) => {}
            _ => return validation(format!("coupling kind {kind:?} does not match bath '{}'", bath.label)),
        }
        Ok(Self { operator, bath, kind })
    }

    /// Weights `(G(omega), G'(omega))` of the partner-operator element at Bohr frequency
    /// `omega = E_b - E_a`.
    fn weights(&self, omega: f64) -> (f64, f64) {
        let b = &self.bath;
        let half = 0.5 * b.hybridization;
        match (self.kind, b.statistics) {
            (CouplingKind::Creation, Statistics::Fermionic { mu }) => {
                let f = fermi_occupation(omega, mu, b.temperature);
                (half * (1.0 - f), half * f)
            }
            (CouplingKind::Annihilation, Statistics::Fermionic { mu }) => {
                let f = fermi_occupation(-omega, mu, b.temperature);
                (half * f, half * (1.0 - f))
            }
            _ => (half * emission_factor(omega, b.temperature), half * emission_factor(-omega, b.temperature)),
        }
    }
}

/// `1 / (exp((e - mu)/T) + 1)` without overflow.
pub fn fermi_occupation(e: f64, mu: f64, temperature: f64) -> f64 {
    let x = (e - mu) / temperature;
    if x > 0.0 {
        let q = (-x).exp();
        q / (1.0 + q)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `1 / (exp(e/T) - 1)` for `e > 0`.
pub fn bose_occupation(e: f64, temperature: f64) -> f64 {
    1.0 / (e / temperature).exp_m1()
}

fn emission_factor(omega: f64, temperature: f64) -> f64 {
    if omega.abs() < ZERO_FREQUENCY {
        temperature
    } else if omega > 0.0 {
        1.0 + bose_occupation(omega, temperature)
    } else {
        bose_occupation(-omega, temperature)
    }
}

/// Redfield model in the instantaneous eigenbasis of `H(t)` with Lamb shifts dropped.
#[derive(Clone, Debug)]
pub struct RedfieldModel {
    pub hamiltonian: DrivenHamiltonian,
    pub couplings: Vec<SystemBathCoupling>,
}

impl RedfieldModel {
    pub fn new(hamiltonian: DrivenHamiltonian, couplings: Vec<SystemBathCoupling>) -> Result<Self> {
        for c in &couplings {
            if c.operator.nrows() != hamiltonian.dim() {
                return Err(Error::DimensionMismatch { expected: hamiltonian.dim(), found: c.operator.nrows() });
            }
        }
        Ok(Self { hamiltonian, couplings })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Dressed operators `(Lambda, Lambda')` for every coupling at time `t`.
    fn dressed(&self, t: f64) -> (CMat, Vec<(CMat, CMat)>) {
        let h = self.hamiltonian.at(t).matrix().clone();
        let (w, v) = eigh_raw(&h).expect("hermitian hamiltonian");
        let vd = v.adjoint();
        let n = w.len();
        let dressed = self
            .couplings
            .iter()
            .map(|c| {
                let partner = vd.clone() * c.operator.adjoint() * &v;
                let mut lam = CMat::zeros(n, n);
                let mut lam_p = CMat::zeros(n, n);
                for a in 0..n {
                    for b in 0..n {
                        let p = partner[(a, b)];
                        if p.norm() == 0.0 {
                            continue;
                        }
                        let (g, gp) = c.weights(w[b] - w[a]);
                        lam[(a, b)] = p * g;
                        lam_p[(a, b)] = p * gp;
                    }
                }
                (&v * lam * &vd, &v * lam_p * &vd)
            })
            .collect();
        (h, dressed)
    }

    fn apply(&self, h: &CMat, dressed: &[(CMat, CMat)], rho: &CMat) -> CMat {
        let mut out = commutator(h, rho) * C64::new(0.0, -1.0);
        for (c, (lam, lam_p)) in self.couplings.iter().zip(dressed) {
            let a = &c.operator;
            out -= commutator(a, &(lam * rho));
            out += commutator(a, &(rho * lam_p));
        }
        out
    }

    pub fn rhs(&self, t: f64, rho: &CMat) -> CMat {
        let (h, dressed) = self.dressed(t);
        self.apply(&h, &dressed, rho)
    }

    /// Vectorized generator at time `t` (column-major `vec(rho)`).
    pub fn generator_matrix(&self, t: f64) -> CMat {
        let (h, dressed) = self.dressed(t);
        superoperator_matrix(self.dim(), |rho| self.apply(&h, &dressed, rho))
    }
}

pub fn evolve_redfield(
    model: &RedfieldModel,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if model.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: rho0.dim() });
    }
    integrate(|t, rho| model.rhs(t, rho), rho0, grid, opts, REDFIELD_POSITIVITY)
}
