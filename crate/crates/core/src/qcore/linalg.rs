use nalgebra::SymmetricEigen;

use super::matrix::{hermitian_defect, C64, CMat, ComplexSquareMatrix, DensityMatrix, HermitianObservable, Spectrum, HERMITIAN_TOL};
use crate::error::{validation, Error, Result};

const PHASE_TOL: f64 = 1e-12;

/// Eigendecomposition of a matrix assumed Hermitian. Eigenvalues ascend; each
/// eigenvector's first component with modulus above 1e-12 is made real-positive.
pub(crate) fn eigh_raw(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = h.nrows();
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let pivot = col.iter().find(|z| z.norm() > PHASE_TOL).copied().unwrap_or(C64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase / norm;
        }
    }
    Ok((values, vectors))
}

/// `V diag(w) V^dagger`.
pub(crate) fn reconstruct(v: &CMat, w: &[f64]) -> CMat {
    let n = v.nrows();
    let mut scaled = v.clone();
    for j in 0..n {
        let s = w[j];
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled * v.adjoint()
}

/// Applies a scalar function through the eigendecomposition of a Hermitian matrix.
pub(crate) fn funm_raw(h: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (w, v) = eigh_raw(h)?;
    let fw: Vec<f64> = w.iter().map(|&x| f(x)).collect();
    Ok(reconstruct(&v, &fw))
}

pub fn eigh(a: &HermitianObservable) -> Result<Spectrum> {
    let (eigenvalues, v) = eigh_raw(a.matrix())?;
    Ok(Spectrum { eigenvalues, eigenvectors: ComplexSquareMatrix::new(v)? })
}

/// Eigendecomposition of an arbitrary square matrix, rejecting non-Hermitian input.
pub fn eigh_checked(a: &ComplexSquareMatrix) -> Result<Spectrum> {
    let defect = hermitian_defect(a.matrix());
    if defect > HERMITIAN_TOL {
        return validation(format!("eigh needs a Hermitian matrix (defect {defect:e})"));
    }
    let (eigenvalues, v) = eigh_raw(a.matrix())?;
    Ok(Spectrum { eigenvalues, eigenvectors: ComplexSquareMatrix::new(v)? })
}

pub fn expm_hermitian(a: &HermitianObservable) -> Result<ComplexSquareMatrix> {
    ComplexSquareMatrix::new(funm_raw(a.matrix(), f64::exp)?)
}

pub fn kron(a: &ComplexSquareMatrix, b: &ComplexSquareMatrix) -> ComplexSquareMatrix {
    ComplexSquareMatrix::new(a.matrix().kronecker(b.matrix())).expect("kronecker product of finite matrices is finite")
}

/// Which factor of a bipartite system to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
    let (da, db) = dims;
    if da == 0 || db == 0 || da * db != rho.dim() {
        return Err(Error::DimensionMismatch { expected: da * db, found: rho.dim() });
    }
    let m = rho.matrix();
    let reduced = match keep {
        Subsystem::A => CMat::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::B => CMat::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    };
    DensityMatrix::from_matrix(reduced)
}

/// Exact unitary propagation `exp(-iHt) rho exp(iHt)` given the spectrum of `H`.
pub(crate) fn propagate_in_eigenbasis(w: &[f64], v: &CMat, rho_eig: &CMat, t: f64) -> CMat {
    let n = w.len();
    let evolved = CMat::from_fn(n, n, |a, b| rho_eig[(a, b)] * C64::from_polar(1.0, -(w[a] - w[b]) * t));
    v * evolved * v.adjoint()
}
