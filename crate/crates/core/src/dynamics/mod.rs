//! Trajectories of the reduced state for closed, Lindblad and Redfield dynamics.

mod closed;
mod integrator;
mod lindblad;
mod models;
mod redfield;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{validation, Result};
use crate::qcore::{DensityMatrix, HermitianObservable, CMat, ComplexSquareMatrix, C64};

pub use closed::evolve_closed;
pub use integrator::IntegratorOptions;
pub use lindblad::{evolve_lindblad, lindblad_rhs};
pub use models::{
    dqd_model, dqd_number_operator, erasure_angle, erasure_gap, erasure_hamiltonian, erasure_model, DqdOperators,
    DqdParams, ErasureParams,
};
pub use redfield::{
    bose_occupation, evolve_redfield, fermi_occupation, BathSpectrum, CouplingKind, RedfieldModel, Statistics,
    SystemBathCoupling,
};

/// Uniform time grid `t0, ..., t1` with `n_points` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n_points: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() {
            return validation("time grid bounds must be finite");
        }
        if t1 <= t0 {
            return validation(format!("time grid needs t1 > t0 (got {t0}..{t1})"));
        }
        if n_points < 2 {
            return validation("time grid needs at least two points");
        }
        Ok(Self { t0, t1, n_points })
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.n_points - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            self.t1
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.time(k)).collect()
    }
}

/// Bookkeeping from the integrators.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IntegrationDiagnostics {
    pub substeps_per_interval: usize,
    pub step_size: f64,
    pub refinements: usize,
    /// Largest `|Tr rho - 1|` seen before renormalizing a substep.
    pub max_trace_deviation: f64,
    pub total_renormalization: f64,
    /// Largest negative eigenvalue magnitude removed when storing a state.
    pub positivity_clamp_max: f64,
    pub positivity_clamps: usize,
    pub positivity_warnings: usize,
    pub min_eigenvalue: f64,
}

/// States on a time grid plus named per-point scalars.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
    pub channels: BTreeMap<String, Vec<f64>>,
    pub diagnostics: IntegrationDiagnostics,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, states: Vec<DensityMatrix>, diagnostics: IntegrationDiagnostics) -> Result<Self> {
        if states.len() != grid.n_points {
            return validation(format!("trajectory has {} states for {} grid points", states.len(), grid.n_points));
        }
        Ok(Self { grid, states, channels: BTreeMap::new(), diagnostics })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    /// Evaluates a scalar at every point and stores it under `label`.
    pub fn fill_channel(&mut self, label: &str, f: impl Fn(f64, &DensityMatrix) -> Result<f64>) -> Result<&[f64]> {
        let values = self.states.iter().enumerate().map(|(k, s)| f(self.grid.time(k), s)).collect::<Result<Vec<_>>>()?;
        self.channels.insert(label.to_string(), values);
        Ok(&self.channels[label])
    }

    /// Applies `f` to every state, returning a trajectory on the same grid.
    pub fn map_states(&self, f: impl Fn(&DensityMatrix) -> Result<DensityMatrix>) -> Result<Trajectory> {
        let states = self.states.iter().map(f).collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.grid, states, self.diagnostics.clone())
    }
}

/// Named protocol and parameter record describing a Hamiltonian.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ProtocolDescriptor {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl ProtocolDescriptor {
    pub fn new(name: &str, params: &[(&str, f64)]) -> Self {
        Self { name: name.to_string(), params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }
}

type HamiltonianFn = dyn Fn(f64) -> HermitianObservable + Send + Sync;
type OperatorFn = dyn Fn(f64) -> CMat + Send + Sync;

/// A time-dependent Hamiltonian `t -> H(t)`.
#[derive(Clone)]
pub struct DrivenHamiltonian {
    dim: usize,
    evaluator: Arc<HamiltonianFn>,
    descriptor: ProtocolDescriptor,
}

impl DrivenHamiltonian {
    pub fn new(
        dim: usize,
        descriptor: ProtocolDescriptor,
        evaluator: impl Fn(f64) -> HermitianObservable + Send + Sync + 'static,
    ) -> Self {
        Self { dim, evaluator: Arc::new(evaluator), descriptor }
    }

    pub fn constant(h: HermitianObservable) -> Self {
        let dim = h.dim();
        let descriptor = ProtocolDescriptor::new("constant", &[]);
        Self::new(dim, descriptor, move |_| h.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, t: f64) -> HermitianObservable {
        (self.evaluator)(t)
    }

    pub fn descriptor(&self) -> &ProtocolDescriptor {
        &self.descriptor
    }
}

impl fmt::Debug for DrivenHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DrivenHamiltonian").field("dim", &self.dim).field("descriptor", &self.descriptor).finish()
    }
}

/// Jump operator `L(t)` with damping rate `gamma`.
#[derive(Clone)]
pub struct JumpChannel {
    pub label: String,
    rate: f64,
    operator: Arc<OperatorFn>,
}

impl JumpChannel {
    pub fn new(label: &str, rate: f64, operator: impl Fn(f64) -> CMat + Send + Sync + 'static) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return validation(format!("jump rate for '{label}' must be finite and nonnegative, got {rate}"));
        }
        Ok(Self { label: label.to_string(), rate, operator: Arc::new(operator) })
    }

    pub fn constant(label: &str, rate: f64, operator: ComplexSquareMatrix) -> Result<Self> {
        let m = operator.into_inner();
        Self::new(label, rate, move |_| m.clone())
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn operator_at(&self, t: f64) -> CMat {
        (self.operator)(t)
    }
}

impl fmt::Debug for JumpChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JumpChannel").field("label", &self.label).field("rate", &self.rate).finish()
    }
}

/// Matrix of a linear map on `dim x dim` matrices acting on column-major `vec(rho)`.
pub fn superoperator_matrix(dim: usize, map: impl Fn(&CMat) -> CMat) -> CMat {
    let n = dim * dim;
    let mut s = CMat::zeros(n, n);
    for j in 0..dim {
        for i in 0..dim {
            let mut basis = CMat::zeros(dim, dim);
            basis[(i, j)] = C64::new(1.0, 0.0);
            let image = map(&basis);
            let col = i + j * dim;
            for (row, z) in image.iter().enumerate() {
                s[(row, col)] = *z;
            }
        }
    }
    s
}

/// Largest `|Tr L(E_ij)|` over matrix units: zero for a trace-preserving generator.
pub fn trace_defect(dim: usize, superop: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for col in 0..superop.ncols() {
        let mut tr = C64::new(0.0, 0.0);
        for k in 0..dim {
            tr += superop[(k + k * dim, col)];
        }
        worst = worst.max(tr.norm());
    }
    worst
}

pub(crate) fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub(crate) fn gibbs_state(h: &HermitianObservable, temperature: f64) -> Result<DensityMatrix> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return validation(format!("temperature must be positive, got {temperature}"));
    }
    let set = crate::maxent::ObservableSet::single(h.clone());
    let lambda = crate::maxent::MultiplierVector::new(vec![1.0 / temperature])?;
    Ok(crate::maxent::build_reference(&set, &lambda)?.state)
}

/// Gibbs state `exp(-H/T) / Z`.
pub fn thermal_state(h: &HermitianObservable, temperature: f64) -> Result<DensityMatrix> {
    gibbs_state(h, temperature)
}
