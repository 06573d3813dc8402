use infocost::bounds::{
    charge_bounds, fluctuation_bounds, identity_audit, landauer_lower_bound, BoundOptions, ChargeSchedule,
    ObservableSchedule,
};
use infocost::dynamics::{
    dqd_model, evolve_closed, evolve_redfield, thermal_state, DqdParams, ErasureParams, IntegratorOptions, TimeGrid,
};
use infocost::maxent::{MultiplierVector, ObservableSet};
use infocost::qcore::{partial_trace, pauli, ComplexSquareMatrix, HermitianObservable, Subsystem};
use infocost::scenarios::{run_erasure, run_two_qubit_charges, two_qubit_setup, RunSettings, TwoQubitParams};

fn two_qubit_settings(t1: f64, n: usize) -> RunSettings {
    RunSettings::new(TimeGrid::new(0.0, t1, n).unwrap(), 0.0125)
}

#[test]
fn charge_bound_starts_at_zero() {
    let run = run_two_qubit_charges(&TwoQubitParams::default(), &two_qubit_settings(5.0, 51)).unwrap();
    let q = &run.bounds.points[0];
    assert_eq!(q.t, 0.0);
    assert!(q.lhs.abs() < 1e-14 && q.upper.abs() < 1e-10 && q.margin.abs() < 1e-10);
    assert!(q.divergence.abs() < 1e-10);
    assert!(run.bounds.initial_divergence.abs() < 1e-12);
}

#[test]
fn fluctuation_bound_starts_at_zero() {
    let p = ErasureParams::default();
    let run = run_erasure(&p, &RunSettings::new(TimeGrid::new(0.0, p.tau, 201).unwrap(), 5e-3)).unwrap();
    let q = &run.bounds.points[0];
    assert_eq!(q.delta_var, 0.0);
    assert_eq!(q.delta_s, 0.0);
    assert!(q.scaled_margin.abs() < 1e-10);
    assert!((q.scaled_margin - q.divergence).abs() < 1e-10);
}

#[test]
fn gibbs_state_of_a_closed_system_is_stationary() {
    let h = HermitianObservable::new("H", ComplexSquareMatrix::diagonal(&[-1.0, 0.0, 0.5])).unwrap();
    let rho0 = thermal_state(&h, 0.7).unwrap();
    let grid = TimeGrid::new(0.0, 10.0, 101).unwrap();
    let traj = evolve_closed(&h, &rho0, &grid).unwrap();
    let charges = ChargeSchedule::from(ObservableSet::single(h));
    let lambda0 = MultiplierVector::new(vec![1.0 / 0.7]).unwrap();
    let b = charge_bounds(&traj, &charges, &lambda0, &BoundOptions::default()).unwrap();
    for q in &b.points {
        assert!(q.lhs.abs() < 1e-13 && q.upper.abs() < 1e-10);
    }
    assert!(b.max_identity_residual() < 1e-12);
}

#[test]
fn equal_baths_exchange_nothing() {
    let p = TwoQubitParams { beta_b: 0.5, mu_b: 0.5, ..Default::default() };
    let run = run_two_qubit_charges(&p, &two_qubit_settings(20.0, 201)).unwrap();
    assert!(run.initial_commutator < 1e-14);
    for q in &run.bounds.points {
        assert!(q.delta_c.iter().all(|d| d.abs() <= 1e-8));
    }
}

#[test]
fn zero_coupling_freezes_spin_a() {
    let p = TwoQubitParams { eta: 0.0, ..Default::default() };
    let run = run_two_qubit_charges(&p, &two_qubit_settings(20.0, 101)).unwrap();
    for q in &run.bounds.points {
        assert!(q.lhs.abs() < 1e-12 && q.margin.abs() < 1e-9 && q.delta_s.abs() < 1e-12);
    }
}

#[test]
fn landauer_hand_values() {
    let times = [0.0, 1.0, 2.0];
    let deltas = vec![vec![0.0, 0.0], vec![0.5, -0.25], vec![-1.0, 0.0]];
    let mu = [2.0, 4.0];
    let ds = [0.0, -0.1, 0.5];
    let s = landauer_lower_bound(&times, &deltas, &mu, &ds).unwrap();
    // Costs 0, 0 and -2 against -dS of 0, 0.1 and -0.5.
    let costs: Vec<f64> = s.points.iter().map(|p| p.bath_cost).collect();
    assert_eq!(costs, vec![0.0, 0.0, -2.0]);
    assert_eq!(s.points.iter().map(|p| p.satisfied).collect::<Vec<_>>(), vec![true, false, false]);
    assert_eq!(s.violations(), 2);
    assert!(landauer_lower_bound(&times, &deltas[..2], &mu, &ds).is_err());
}

#[test]
fn default_two_qubit_run_may_violate_landauer() {
    let run = run_two_qubit_charges(&TwoQubitParams::default(), &two_qubit_settings(50.0, 2001)).unwrap();
    // Reported, not enforced; the charge bound itself must hold.
    assert_eq!(run.landauer.points.len(), 2001);
    assert!(run.bounds.min_margin() >= -1e-7);
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    let p = TwoQubitParams::default();
    let seq = two_qubit_settings(20.0, 201);
    let mut par = seq;
    par.bounds.parallel = true;
    let a = run_two_qubit_charges(&p, &seq).unwrap();
    let b = run_two_qubit_charges(&p, &par).unwrap();
    for (x, y) in a.bounds.points.iter().zip(&b.bounds.points) {
        assert!((x.margin - y.margin).abs() < 1e-8);
    }
}

#[test]
fn erasure_divergence_is_positive_midway() {
    let p = ErasureParams::default();
    let run = run_erasure(&p, &RunSettings::new(TimeGrid::new(0.0, p.tau, 201).unwrap(), 5e-3)).unwrap();
    let mid = &run.bounds.points[100];
    assert!((mid.t - p.tau / 2.0).abs() < 1e-12);
    assert!(mid.divergence > 0.0);
}

#[test]
fn spin_a_identity_holds_at_unit_time() {
    let p = TwoQubitParams::default();
    let setup = two_qubit_setup(&p).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
    let global = evolve_closed(&setup.h_total, &setup.rho0, &grid).unwrap();
    let spin_a = global.map_states(|r| partial_trace(r, (2, 2), Subsystem::A)).unwrap();
    let charges = ChargeSchedule::from(setup.charges.clone());
    let b = charge_bounds(&spin_a, &charges, &p.lambda0(), &BoundOptions::default()).unwrap();
    assert!(b.points[1].divergence >= -1e-12, "{}", b.points[1].divergence);
    assert!(identity_audit(&spin_a, &charges, &p.lambda0(), &BoundOptions::default()).unwrap() < 1e-10);
}

#[test]
fn wrong_initial_multipliers_are_rejected() {
    let p = TwoQubitParams::default();
    let setup = two_qubit_setup(&p).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 3).unwrap();
    let global = evolve_closed(&setup.h_total, &setup.rho0, &grid).unwrap();
    let spin_a = global.map_states(|r| partial_trace(r, (2, 2), Subsystem::A)).unwrap();
    let wrong = MultiplierVector::new(vec![1.0, 0.3]).unwrap();
    assert!(charge_bounds(&spin_a, &ChargeSchedule::from(setup.charges), &wrong, &BoundOptions::default()).is_err());
}

#[test]
fn uncoupled_dot_fluctuation_identity() {
    let p = DqdParams { gamma_l: 0.0, gamma_r: 0.0, gamma_ph: 0.0, ..Default::default() };
    let model = dqd_model(&p).unwrap();
    let rho0 = thermal_state(&model.hamiltonian.at(0.0), p.t_0).unwrap();
    let grid = TimeGrid::new(0.0, 10.0, 101).unwrap();
    let traj = evolve_redfield(&model, &rho0, &grid, &IntegratorOptions::with_max_step(2.5e-3)).unwrap();
    let b = fluctuation_bounds(&traj, &ObservableSchedule::Driven(model.hamiltonian.clone()), &BoundOptions::default())
        .unwrap();
    assert!(b.points.iter().all(|q| q.delta_s.abs() < 1e-9));
    assert!(b.max_identity_residual() <= 1e-7);
}

#[test]
fn fixed_observable_schedule() {
    let o = HermitianObservable::new("Z", pauli::z()).unwrap();
    let h = HermitianObservable::new("X", pauli::x()).unwrap();
    let rho0 = thermal_state(&o, 1.0).unwrap();
    let traj = evolve_closed(&h, &rho0, &TimeGrid::new(0.0, 1.0, 11).unwrap()).unwrap();
    let b = fluctuation_bounds(&traj, &ObservableSchedule::Fixed(o), &BoundOptions::default()).unwrap();
    assert!(b.max_identity_residual() < 1e-9);
    assert!(b.max_gap_residual() < 1e-7);
}
