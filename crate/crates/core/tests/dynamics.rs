use std::f64::consts::PI;

use qbattery::dynamics::{
    derivative_convergence, exchange_interaction, ground_excited_state, propagate,
    trajectory_report, HamiltonianSpec, TimeGrid,
};
use qbattery::ensembles::{ginibre_mixed, gue_hermitian, haar_pure, SeedSpec};
use qbattery::operator::{embed_battery_op, pauli};
use qbattery::{HermitianOperator, TensorStructure};

fn exchange() -> (qbattery::DensityMatrix, HamiltonianSpec) {
    let s = TensorStructure::new(2, 2, 1, 1).unwrap();
    let h = HamiltonianSpec::interaction_only(exchange_interaction(1.0, &s).unwrap(), s).unwrap();
    (ground_excited_state(&s).unwrap(), h)
}

#[test]
fn derivative_matches_power_to_second_order() {
    let (rho0, h) = exchange();
    let steps = (PI / 1e-3).round() as usize;
    let c = derivative_convergence(
        &rho0,
        &h,
        &pauli::z(),
        TimeGrid {
            t0: 0.0,
            t1: PI,
            steps,
        },
    )
    .unwrap();
    assert!(c.coarse_error <= 1e-5, "{c:?}");
    assert!((3.5..=4.5).contains(&c.ratio), "{c:?}");
}

#[test]
fn exchange_power_matches_closed_form() {
    // ⟨F⟩(t) = −cos 2t, so P(t) = 2 sin 2t and Tr ρ_W² = 1 − 2 sin²t cos²t.
    let (rho0, h) = exchange();
    let grid = TimeGrid {
        t0: 0.0,
        t1: PI,
        steps: 400,
    }
    .points()
    .unwrap();
    let traj = trajectory_report(&rho0, &h, &pauli::z(), &grid).unwrap();
    for r in &traj.records {
        let t = r.t;
        assert!((r.report.power - 2.0 * (2.0 * t).sin()).abs() <= 1e-10);
        assert!((r.mean_f + (2.0 * t).cos()).abs() <= 1e-10);
        let p = t.sin().powi(2);
        assert!((r.battery_purity - (p * p + (1.0 - p) * (1.0 - p))).abs() <= 1e-10);
    }
    assert!(traj.bound_holds());
}

#[test]
fn entanglement_onset() {
    let (rho0, h) = exchange();
    let grid = TimeGrid {
        t0: 0.1,
        t1: PI / 2.0,
        steps: 2000,
    }
    .points()
    .unwrap();
    let traj = trajectory_report(&rho0, &h, &pauli::z(), &grid).unwrap();
    let interior = &traj.records[1..traj.records.len() - 1];
    assert!(interior.iter().all(|r| r.battery_purity < 1.0 - 1e-6));
    let min = interior
        .iter()
        .map(|r| r.battery_purity)
        .fold(f64::INFINITY, f64::min);
    assert!((min - 0.5).abs() <= 1e-6);
}

#[test]
fn unitarity_and_bound_on_random_scenarios() {
    let shapes = [[2, 2, 1, 1], [2, 2, 2, 1], [2, 2, 2, 2], [4, 2, 1, 1]];
    for k in 0..100u64 {
        let s = TensorStructure::try_from(shapes[k as usize % shapes.len()]).unwrap();
        let d = s.total_dim();
        let seed = |j: u64| SeedSpec::new(77, 5 * k + j);
        let rho0 = if k % 2 == 0 {
            haar_pure(d, seed(0)).unwrap()
        } else {
            ginibre_mixed(d, 2, seed(0)).unwrap()
        };
        let h0 = gue_hermitian(d, 0.5, seed(1)).unwrap();
        let v = gue_hermitian(d, 1.0, seed(2)).unwrap();
        let f = gue_hermitian(s.d_w(), 1.0, seed(3)).unwrap();
        let h = HamiltonianSpec::new(h0, v, s).unwrap();
        let grid = TimeGrid {
            t0: 0.0,
            t1: 2.0,
            steps: 8,
        }
        .points()
        .unwrap();
        let traj = trajectory_report(&rho0, &h, &f, &grid).unwrap();
        assert!(traj.bound_holds());
        for r in &traj.records {
            r.report.check().unwrap();
            let pw = r.battery_purity;
            assert!(pw >= 1.0 / s.d_w() as f64 - 1e-9 && pw <= 1.0 + 1e-9);
            let rho = propagate(&rho0, &h, r.t).unwrap();
            for (a, b) in rho.eigenvalues().iter().zip(rho0.eigenvalues()) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn commuting_h0_keeps_derivative_check() {
    // H₀ = ω σ_z ⊗ 1 + 1 ⊗ ω σ_z commutes with F = σ_z on the battery.
    let s = TensorStructure::new(2, 2, 1, 1).unwrap();
    let local = embed_battery_op(&pauli::z(), &s).unwrap();
    let h0 = local
        .add(&pauli::identity().kron(&pauli::z()))
        .unwrap()
        .scale(0.7);
    let h = HamiltonianSpec::new(h0, exchange_interaction(1.0, &s).unwrap(), s).unwrap();
    let rho0 = ground_excited_state(&s).unwrap();
    let grid = TimeGrid {
        t0: 0.0,
        t1: 2.0,
        steps: 2000,
    }
    .points()
    .unwrap();
    let traj = trajectory_report(&rho0, &h, &pauli::z(), &grid).unwrap();
    assert!(traj.commuting);
    assert!(traj.max_derivative_error.unwrap() <= 1e-5);
}

#[test]
fn zero_hamiltonian_trajectory() {
    let s = TensorStructure::new(2, 2, 1, 1).unwrap();
    let h = HamiltonianSpec::interaction_only(HermitianOperator::zeros(4), s).unwrap();
    let rho0 = ginibre_mixed(4, 3, SeedSpec::new(5, 5)).unwrap();
    let grid = TimeGrid {
        t0: 0.0,
        t1: 5.0,
        steps: 10,
    }
    .points()
    .unwrap();
    let traj = trajectory_report(&rho0, &h, &pauli::z(), &grid).unwrap();
    let p0 = traj.records[0].battery_purity;
    for r in &traj.records {
        assert_eq!(r.report.power, 0.0);
        assert!((r.battery_purity - p0).abs() <= 1e-12);
    }
}
