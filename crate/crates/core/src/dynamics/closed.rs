use super::{IntegrationDiagnostics, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::qcore::{eigh_raw, propagate_in_eigenbasis, symmetrize, DensityMatrix, HermitianObservable};

/// Exact unitary evolution `rho(t) = U rho0 U^dagger`, `U = exp(-i H (t - t0))`.
pub fn evolve_closed(h: &HermitianObservable, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Trajectory> {
    if h.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho0.dim() });
    }
    let (w, v) = eigh_raw(h.matrix())?;
    let rho_eig = v.adjoint() * rho0.matrix() * &v;
    let states = grid
        .times()
        .into_iter()
        .map(|t| DensityMatrix::from_matrix(symmetrize(&propagate_in_eigenbasis(&w, &v, &rho_eig, t - grid.t0))))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(*grid, states, IntegrationDiagnostics::default())
}
