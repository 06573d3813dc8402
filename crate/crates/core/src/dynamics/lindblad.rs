use super::integrator::{integrate, IntegratorOptions, PositivityPolicy};
use super::{commutator, DrivenHamiltonian, JumpChannel, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::qcore::{CMat, DensityMatrix, C64};

const LINDBLAD_POSITIVITY: PositivityPolicy = PositivityPolicy { warn_below: -1e-9, fail_below: -1e-6 };

/// `-i[H(t), rho] + sum_mu gamma_mu D[L_mu(t)] rho`.
pub fn lindblad_rhs(h: &DrivenHamiltonian, channels: &[JumpChannel], t: f64, rho: &CMat) -> CMat {
    let hm = h.at(t);
    let mut out = commutator(hm.matrix(), rho) * C64::new(0.0, -1.0);
    for ch in channels {
        if ch.rate() == 0.0 {
            continue;
        }
        let l = ch.operator_at(t);
        let ld = l.adjoint();
        let ldl = &ld * &l;
        out += (&l * rho * &ld - (&ldl * rho + rho * &ldl).scale(0.5)).scale(ch.rate());
    }
    out
}

/// Integrates the Lindblad equation with fixed-step RK4.
pub fn evolve_lindblad(
    h: &DrivenHamiltonian,
    channels: &[JumpChannel],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if h.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho0.dim() });
    }
    for ch in channels {
        let d = ch.operator_at(grid.t0).nrows();
        if d != h.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), found: d });
        }
    }
    integrate(|t, rho| lindblad_rhs(h, channels, t, rho), rho0, grid, opts, LINDBLAD_POSITIVITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{
        superoperator_matrix, thermal_state, trace_defect, erasure_model, evolve_closed, ErasureParams,
    };
    use crate::qcore::{pauli, ComplexSquareMatrix, HermitianObservable};
    use nalgebra::DVector;

    fn max_diff(a: &CMat, b: &CMat) -> f64 {
        (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn static_qubit(gap: f64, temperature: f64, gamma: f64) -> (DrivenHamiltonian, Vec<JumpChannel>) {
        let h = HermitianObservable::new("H", ComplexSquareMatrix::new(pauli::z().into_inner().scale(-gap / 2.0)).unwrap())
            .unwrap();
        let n = crate::dynamics::bose_occupation(gap, temperature);
        // Basis order (excited, ground) for H = -(gap/2) sigma_z... ground is index 0.
        let lower = ComplexSquareMatrix::new(pauli::lowering().into_inner().scale((gap * (n + 1.0)).sqrt())).unwrap();
        let raise = ComplexSquareMatrix::new(pauli::lowering().into_inner().adjoint().scale((gap * n).sqrt())).unwrap();
        let channels = vec![JumpChannel::constant("down", gamma, lower).unwrap(), JumpChannel::constant("up", gamma, raise).unwrap()];
        (DrivenHamiltonian::constant(h), channels)
    }

    #[test]
    fn zero_rates_match_closed_evolution() {
        let h = HermitianObservable::from_matrix(
            "H",
            ComplexSquareMatrix::from_real_rows(2, &[0.3, 0.7, 0.7, -0.4]).unwrap().into_inner(),
        )
        .unwrap();
        let s = 0.6f64.sqrt();
        let rho0 = DensityMatrix::pure(&[C64::new(s, 0.0), C64::new(0.0, (1.0 - s * s).sqrt())]).unwrap();
        let grid = TimeGrid::new(0.0, 5.0, 51).unwrap();
        let exact = evolve_closed(&h, &rho0, &grid).unwrap();
        let (_, mut channels) = static_qubit(0.4, 0.1, 0.0);
        channels.truncate(1);
        let rk = evolve_lindblad(&DrivenHamiltonian::constant(h), &channels, &rho0, &grid, &IntegratorOptions::default()).unwrap();
        for (a, b) in exact.states.iter().zip(&rk.states) {
            assert!(max_diff(a.matrix(), b.matrix()) < 1e-8);
        }
    }

    #[test]
    fn static_qubit_relaxes_to_gibbs() {
        let (gap, temperature) = (0.4, 0.1);
        let (h, channels) = static_qubit(gap, temperature, 0.2);
        let gen = superoperator_matrix(2, |r| lindblad_rhs(&h, &channels, 0.0, r));
        assert!(trace_defect(2, &gen) < 1e-12);

        // Null space of the generator with the trace row imposed.
        let mut a = gen.clone();
        let mut rhs = DVector::from_element(4, C64::new(0.0, 0.0));
        for col in 0..4 {
            a[(0, col)] = C64::new(0.0, 0.0);
        }
        a[(0, 0)] = C64::new(1.0, 0.0);
        a[(0, 3)] = C64::new(1.0, 0.0);
        rhs[0] = C64::new(1.0, 0.0);
        let steady = a.lu().solve(&rhs).unwrap();
        let gibbs = thermal_state(&h.at(0.0), temperature).unwrap();
        for k in 0..4 {
            assert!((steady[k] - gibbs.matrix()[(k % 2, k / 2)]).norm() < 1e-12);
        }

        let rho0 = DensityMatrix::maximally_mixed(2);
        let grid = TimeGrid::new(0.0, 400.0, 401).unwrap();
        let traj = evolve_lindblad(&h, &channels, &rho0, &grid, &IntegratorOptions::with_max_step(0.05)).unwrap();
        assert!(max_diff(traj.states.last().unwrap().matrix(), gibbs.matrix()) < 1e-6);
    }

    #[test]
    fn erasure_step_halving() {
        let p = ErasureParams::default();
        let (h, channels) = erasure_model(&p).unwrap();
        let rho0 = thermal_state(&h.at(0.0), p.temperature).unwrap();
        let grid = TimeGrid::new(0.0, p.tau, 201).unwrap();
        let coarse = evolve_lindblad(&h, &channels, &rho0, &grid, &IntegratorOptions::with_max_step(5e-3)).unwrap();
        let fine = evolve_lindblad(&h, &channels, &rho0, &grid, &IntegratorOptions::with_max_step(2.5e-3)).unwrap();
        for (a, b) in coarse.states.iter().zip(&fine.states) {
            assert!(max_diff(a.matrix(), b.matrix()) < 1e-6);
        }
        for s in &coarse.states {
            assert!((s.matrix().trace().re - 1.0).abs() < 1e-8);
        }
    }
}
