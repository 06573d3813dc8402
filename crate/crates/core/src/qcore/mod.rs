//! Dense complex linear algebra and quantum-information primitives.
//!
//! Every matrix function (exponential, logarithm, entropy) goes through the
//! Hermitian eigendecomposition; the dimensions used here never exceed 16.

mod info;
mod linalg;
mod matrix;

pub use info::{expectation, relative_entropy, shannon_entropy, variance, von_neumann_entropy, LOG_CLAMP};
pub use linalg::{eigh, eigh_checked, expm_hermitian, kron, partial_trace, Subsystem};
pub use matrix::{
    ComplexSquareMatrix, DensityMatrix, HermitianObservable, Spectrum, C64, CMat, HERMITIAN_TOL, POSITIVITY_TOL,
    TRACE_TOL,
};

pub(crate) use linalg::{eigh_raw, propagate_in_eigenbasis, reconstruct};
pub(crate) use matrix::symmetrize;

/// Pauli matrices and small operator builders.
pub mod pauli {
    use super::{ComplexSquareMatrix, C64};

    pub fn identity() -> ComplexSquareMatrix {
        ComplexSquareMatrix::identity(2)
    }

    pub fn x() -> ComplexSquareMatrix {
        ComplexSquareMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> ComplexSquareMatrix {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        ComplexSquareMatrix::from_rows(2, &[z, -i, i, z]).unwrap()
    }

    pub fn z() -> ComplexSquareMatrix {
        ComplexSquareMatrix::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// Fermionic lowering operator `|0><1|` on a single mode (basis: empty, occupied).
    pub fn lowering() -> ComplexSquareMatrix {
        ComplexSquareMatrix::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
    }
}
