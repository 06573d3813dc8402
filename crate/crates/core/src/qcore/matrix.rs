use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{validation, Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Entrywise tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue a density matrix may carry.
pub const POSITIVITY_TOL: f64 = -1e-9;

/// Dense complex square matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSquareMatrix(CMat);

impl ComplexSquareMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return validation(format!("matrix must be square and nonempty, got {}x{}", m.nrows(), m.ncols()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return validation("matrix has non-finite entries");
        }
        Ok(Self(m))
    }

    /// Builds from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Self::new(CMat::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(dim, &c)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMat::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMat::zeros(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self(CMat::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_hermitian_defect() <= tol
    }
}

impl From<ComplexSquareMatrix> for CMat {
    fn from(m: ComplexSquareMatrix) -> Self {
        m.0
    }
}

pub(crate) fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// A labeled Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianObservable {
    label: String,
    matrix: ComplexSquareMatrix,
}

impl HermitianObservable {
    pub fn new(label: impl Into<String>, matrix: ComplexSquareMatrix) -> Result<Self> {
        let defect = matrix.max_hermitian_defect();
        if defect > HERMITIAN_TOL {
            return validation(format!("observable is not Hermitian (defect {defect:e})"));
        }
        Ok(Self { label: label.into(), matrix })
    }

    /// Wraps a matrix that is Hermitian up to rounding, replacing it by its Hermitian part.
    pub fn from_matrix(label: impl Into<String>, m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return validation("observable must be square");
        }
        let defect = hermitian_defect(&m);
        let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
        if defect > HERMITIAN_TOL * scale {
            return validation(format!("observable is not Hermitian (defect {defect:e})"));
        }
        Self::new(label, ComplexSquareMatrix::new(symmetrize(&m))?)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.matrix.matrix()
    }

    pub fn as_square(&self) -> &ComplexSquareMatrix {
        &self.matrix
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `self * self`, kept Hermitian.
    pub fn squared(&self, label: impl Into<String>) -> Self {
        let sq = self.matrix() * self.matrix();
        Self { label: label.into(), matrix: ComplexSquareMatrix(symmetrize(&sq)) }
    }

    /// `self - shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.matrix().clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= C64::new(shift, 0.0);
        }
        Self { label: self.label.clone(), matrix: ComplexSquareMatrix(m) }
    }

    pub fn commutes_with(&self, other: &Self, tol: f64) -> bool {
        let a = self.matrix();
        let b = other.matrix();
        let c = a * b - b * a;
        c.iter().all(|z| z.norm() <= tol)
    }
}

/// A normalized positive-semidefinite state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexSquareMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexSquareMatrix) -> Result<Self> {
        let defect = matrix.max_hermitian_defect();
        if defect > HERMITIAN_TOL {
            return validation(format!("density matrix is not Hermitian (defect {defect:e})"));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return validation(format!("density matrix trace is {tr}, expected 1"));
        }
        let (w, _) = super::linalg::eigh_raw(&symmetrize(matrix.matrix()))?;
        if w[0] < POSITIVITY_TOL {
            return validation(format!("density matrix has negative eigenvalue {:e}", w[0]));
        }
        Ok(Self { matrix })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(ComplexSquareMatrix::new(m)?)
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexSquareMatrix(CMat::identity(dim, dim).scale(1.0 / dim as f64)) }
    }

    /// Projector onto basis state `index`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return validation(format!("basis index {index} out of range for dimension {dim}"));
        }
        let mut m = CMat::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: ComplexSquareMatrix(m) })
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return validation("state vector must be nonzero");
        }
        let n = psi.len();
        let m = CMat::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / norm2);
        Self::from_matrix(m)
    }

    /// Diagonal state with the given (normalized) populations.
    pub fn from_populations(p: &[f64]) -> Result<Self> {
        Self::new(ComplexSquareMatrix::diagonal(p))
    }

    /// Projects a Hermitian, approximately normalized matrix onto the state space:
    /// negative eigenvalues are set to zero and the trace renormalized. Returns the
    /// state and the magnitude of the most negative eigenvalue removed (0 if none).
    pub fn clamp_from(m: &CMat) -> Result<(Self, f64)> {
        let h = symmetrize(m);
        let (w, v) = super::linalg::eigh_raw(&h)?;
        let clamp = if w[0] < 0.0 { -w[0] } else { 0.0 };
        let clipped: Vec<f64> = w.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return validation("matrix has no positive spectral weight");
        }
        let scaled: Vec<f64> = clipped.iter().map(|x| x / total).collect();
        let rebuilt = super::linalg::reconstruct(&v, &scaled);
        Ok((Self { matrix: ComplexSquareMatrix::new(symmetrize(&rebuilt))? }, clamp))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.matrix.matrix()
    }

    pub fn as_square(&self) -> &ComplexSquareMatrix {
        &self.matrix
    }

    /// Diagonal entries in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix()[(i, i)].re).collect()
    }

    pub(crate) fn from_trusted(m: CMat) -> Self {
        Self { matrix: ComplexSquareMatrix(m) }
    }
}

/// Full eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors.
    pub eigenvectors: ComplexSquareMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> CMat {
        super::linalg::reconstruct(self.eigenvectors.matrix(), &self.eigenvalues)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.matrix().column(k).iter().copied().collect()
    }
}
