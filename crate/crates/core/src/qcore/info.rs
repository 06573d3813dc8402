use super::linalg::eigh_raw;
use super::matrix::{symmetrize, C64, DensityMatrix, HermitianObservable};
use crate::error::{validation, Error, Result};

/// Eigenvalues below this are treated as zero inside logarithms.
pub const LOG_CLAMP: f64 = 1e-12;

fn entropy_term(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if p < LOG_CLAMP {
        0.0
    } else {
        -p * p.ln()
    }
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let (w, _) = eigh_raw(&symmetrize(rho.matrix())).expect("density matrix spectrum");
    w.iter().map(|&p| entropy_term(p)).sum()
}

/// Entropy of a probability vector, same clamping as [`von_neumann_entropy`].
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().map(|&x| entropy_term(x)).sum()
}

/// Quantum relative entropy `Tr[rho (ln rho - ln sigma)]` in nats.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let (p, _) = eigh_raw(&symmetrize(rho.matrix()))?;
    let neg_entropy: f64 = -p.iter().map(|&x| entropy_term(x)).sum::<f64>();

    let (s, v) = eigh_raw(&symmetrize(sigma.matrix()))?;
    // Weight of rho along each eigenvector of sigma.
    let rho_in_sigma = v.adjoint() * rho.matrix() * &v;
    let mut cross = 0.0;
    for (j, &sj) in s.iter().enumerate() {
        let weight = rho_in_sigma[(j, j)].re;
        if sj < LOG_CLAMP {
            if weight > LOG_CLAMP {
                return Err(Error::InfiniteDivergence { eigenvalue: sj, weight });
            }
            continue;
        }
        cross += weight * sj.min(1.0).ln();
    }
    Ok(neg_entropy - cross)
}

fn trace_product(rho: &DensityMatrix, o: &HermitianObservable) -> Result<C64> {
    if rho.dim() != o.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: o.dim() });
    }
    let a = rho.matrix();
    let b = o.matrix();
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

/// `Re Tr[rho O]`.
pub fn expectation(rho: &DensityMatrix, o: &HermitianObservable) -> Result<f64> {
    let z = trace_product(rho, o)?;
    let scale = 1.0 + o.matrix().iter().fold(0.0f64, |m, x| m.max(x.norm()));
    if z.im.abs() > 1e-10 * scale {
        return validation(format!("expectation of '{}' has imaginary part {:e}", o.label(), z.im));
    }
    Ok(z.re)
}

/// `Tr[rho (O - <O>)^2]`.
pub fn variance(rho: &DensityMatrix, o: &HermitianObservable) -> Result<f64> {
    let mean = expectation(rho, o)?;
    let centered = o.shifted(mean).squared("centered");
    expectation(rho, &centered)
}
