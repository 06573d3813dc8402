use super::{IntegrationDiagnostics, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::qcore::{eigh_raw, symmetrize, CMat, DensityMatrix};

/// Fixed-step RK4 settings.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorOptions {
    /// Upper bound on the RK4 substep.
    pub max_step: f64,
    /// Largest `|Tr rho - 1|` tolerated after one substep before refining.
    pub trace_tol: f64,
    pub max_refinements: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { max_step: 5e-3, trace_tol: 1e-8, max_refinements: 8 }
    }
}

impl IntegratorOptions {
    pub fn with_max_step(max_step: f64) -> Self {
        Self { max_step, ..Self::default() }
    }
}

/// What to do with negative eigenvalues of an integrated state.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PositivityPolicy {
    pub warn_below: f64,
    pub fail_below: f64,
}

fn rk4_step(rhs: &impl Fn(f64, &CMat) -> CMat, t: f64, h: f64, rho: &CMat) -> CMat {
    let k1 = rhs(t, rho);
    let k2 = rhs(t + 0.5 * h, &(rho + k1.scale(0.5 * h)));
    let k3 = rhs(t + 0.5 * h, &(rho + k2.scale(0.5 * h)));
    let k4 = rhs(t + h, &(rho + k3.scale(h)));
    rho + (k1 + (k2 + k3).scale(2.0) + k4).scale(h / 6.0)
}

/// Integrates `d rho / dt = rhs(t, rho)` across the grid. The raw state is carried
/// between grid points; stored states have negative eigenvalues projected out.
pub(crate) fn integrate(
    rhs: impl Fn(f64, &CMat) -> CMat,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &IntegratorOptions,
    policy: PositivityPolicy,
) -> Result<Trajectory> {
    let dt = grid.step();
    let mut n_sub = ((dt / opts.max_step).ceil() as usize).max(1);
    let mut diag = IntegrationDiagnostics { min_eigenvalue: f64::INFINITY, ..Default::default() };
    let mut raw = rho0.matrix().clone();
    let mut states = Vec::with_capacity(grid.n_points);
    states.push(rho0.clone());
    track_spectrum(&mut diag, rho0.matrix());

    for k in 0..grid.n_points - 1 {
        let t_start = grid.time(k);
        let interval = grid.time(k + 1) - t_start;
        let mut attempt = 0;
        let next = loop {
            let h = interval / n_sub as f64;
            let mut state = raw.clone();
            let mut renorm = 0.0;
            let mut worst = 0.0f64;
            let mut drifted = false;
            for s in 0..n_sub {
                state = rk4_step(&rhs, t_start + s as f64 * h, h, &state);
                let tr = state.trace();
                let dev = (tr.re - 1.0).abs().max(tr.im.abs());
                worst = worst.max(dev);
                if dev > opts.trace_tol {
                    drifted = true;
                    break;
                }
                renorm += dev;
                state /= tr;
            }
            if !drifted {
                diag.max_trace_deviation = diag.max_trace_deviation.max(worst);
                diag.total_renormalization += renorm;
                break state;
            }
            attempt += 1;
            if attempt > opts.max_refinements {
                return Err(Error::Integration(format!(
                    "trace drift {worst:e} persists after {attempt} refinements near t = {t_start}"
                )));
            }
            n_sub *= 2;
            diag.refinements += 1;
        };
        raw = symmetrize(&next);
        states.push(store(&raw, grid.time(k + 1), policy, &mut diag)?);
    }
    diag.substeps_per_interval = n_sub;
    diag.step_size = dt / n_sub as f64;
    if diag.total_renormalization > 0.0 {
        log::debug!("trace renormalization total {:e}", diag.total_renormalization);
    }
    Trajectory::new(*grid, states, diag)
}

fn track_spectrum(diag: &mut IntegrationDiagnostics, m: &CMat) -> f64 {
    let (w, _) = eigh_raw(m).expect("hermitian spectrum");
    diag.min_eigenvalue = diag.min_eigenvalue.min(w[0]);
    w[0]
}

fn store(raw: &CMat, t: f64, policy: PositivityPolicy, diag: &mut IntegrationDiagnostics) -> Result<DensityMatrix> {
    let lowest = track_spectrum(diag, raw);
    if lowest < policy.fail_below {
        return Err(Error::Integration(format!(
            "state lost positivity at t = {t} (eigenvalue {lowest:e}); use a finer grid"
        )));
    }
    if lowest < policy.warn_below {
        diag.positivity_warnings += 1;
        log::warn!("negative eigenvalue {lowest:e} at t = {t}");
    }
    if lowest < -1e-12 {
        let (state, clamp) = DensityMatrix::clamp_from(raw)?;
        diag.positivity_clamps += 1;
        diag.positivity_clamp_max = diag.positivity_clamp_max.max(clamp);
        Ok(state)
    } else {
        DensityMatrix::from_matrix(raw.clone())
    }
}
