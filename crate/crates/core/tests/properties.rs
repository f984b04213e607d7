use proptest::prelude::*;

use qbattery::classical::{classical_run, integrate};
use qbattery::metrics::{charging_metrics, collective_advantage, fit_power_law, max_average_power};
use qbattery::model::{
    initial_state_classical, initial_state_quantum, natural_timescale, ModelKind, ModelSpec, NumericsConfig,
    PhasePoint, Side,
};
use qbattery::quantum::hamiltonian::expectation;
use qbattery::quantum::{build_hamiltonians, collective_spin_ops, quantum_run, SparseOperator};

fn kind() -> impl Strategy<Value = ModelKind> {
    prop_oneof![Just(ModelKind::Harmonic), Just(ModelKind::Spin), Just(ModelKind::Dicke)]
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Quantum), Just(Side::Classical)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn natural_timescale_is_homogeneous(kind in kind(), n in 1usize..200, g in 0.01f64..5.0, w in 0.1f64..10.0) {
        let a = natural_timescale(&ModelSpec::new(kind, Side::Quantum, n, g)).unwrap();
        let b = natural_timescale(&ModelSpec::new(kind, Side::Quantum, n, 2.0 * g).with_omega0(w)).unwrap();
        prop_assert!((a / b - 2.0).abs() < 1e-14);
    }

    #[test]
    fn quantum_initial_energies(kind in kind(), n in 1usize..30, w in 0.2f64..5.0) {
        let spec = ModelSpec::new(kind, Side::Quantum, n, 0.3).with_omega0(w);
        let h = build_hamiltonians(&spec).unwrap();
        let psi = initial_state_quantum(&spec).unwrap();
        let scale = n as f64 * w;
        prop_assert!((expectation(&h.h_a, &psi).unwrap() - scale).abs() < 1e-12 * scale);
        prop_assert!(expectation(&h.h_b, &psi).unwrap().abs() < 1e-12 * scale);
        prop_assert!((psi.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classical_harmonic_initial_energies(n in 1usize..50, w in 0.2f64..5.0) {
        let spec = ModelSpec::new(ModelKind::Harmonic, Side::Classical, n, 0.3).with_omega0(w);
        let PhasePoint::Harmonic(x) = initial_state_classical(&spec).unwrap() else { unreachable!() };
        // p_a = q_a = sqrt(N) is exact only up to rounding of the root
        let scale = n as f64 * w;
        prop_assert!((w * (x.p_a * x.p_a + x.q_a * x.q_a) / 2.0 - scale).abs() <= 4.0 * f64::EPSILON * scale);
        prop_assert!(x.p_b.iter().chain(&x.q_b).all(|&v| v == 0.0));
    }

    #[test]
    fn spin_algebra(n in 1usize..24) {
        let (jx, jy, jz) = collective_spin_ops(n);
        let comm = jx.commutator(&jy);
        let ijz = jz.scale_complex(num_complex::Complex64::new(0.0, 1.0));
        prop_assert!(comm.max_abs_diff(&ijz) < 1e-12);
        let j = n as f64 / 2.0;
        let casimir = jx.matmul(&jx).add(&jy.matmul(&jy)).add(&jz.matmul(&jz));
        prop_assert!(casimir.max_abs_diff(&SparseOperator::identity(n + 1).scale(j * (j + 1.0))) < 1e-10);
    }

    #[test]
    fn single_unit_advantage_is_one(kind in kind(), side in side(), g in 0.05f64..2.0) {
        let r = collective_advantage(&ModelSpec::new(kind, side, 1, g), 1).unwrap();
        prop_assert_eq!(r.gamma, 1.0);
    }

    #[test]
    fn charging_metrics_are_consistent(kind in kind(), side in side(), n in 1usize..8, g in 0.05f64..2.0) {
        let m = charging_metrics(&ModelSpec::new(kind, side, n, g)).unwrap().metrics;
        prop_assert!(m.tau_bar > 0.0);
        prop_assert!((m.p_bar - m.e_bar / m.tau_bar).abs() <= 1e-12 * m.p_bar);
    }

    #[test]
    fn power_law_fit_recovers_exact_data(alpha in -1.5f64..2.0, c in 0.05f64..20.0) {
        let points: Vec<(f64, f64)> = [3.0, 5.0, 8.0, 13.0, 21.0].iter().map(|&n: &f64| (n, c * n.powf(alpha))).collect();
        let fit = fit_power_law(&points).unwrap();
        prop_assert!((fit.alpha - alpha).abs() < 1e-10);
        prop_assert!((fit.prefactor / c - 1.0).abs() < 1e-10);
    }

    #[test]
    fn classical_spins_stay_on_the_sphere(kind in prop_oneof![Just(ModelKind::Spin), Just(ModelKind::Dicke)], n in 1usize..20, g in 0.05f64..2.0) {
        let spec = ModelSpec::new(kind, Side::Classical, n, g);
        let (_, path, _) = classical_run(&spec).unwrap();
        prop_assert!(path.max_abs_cos_theta() <= 1.0 + 1e-12);
        prop_assert!(path.energy_drift() < 1e-8 * n as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gamma_is_invariant_under_time_units(kind in prop_oneof![Just(ModelKind::Harmonic), Just(ModelKind::Spin)], side in side(), n in 2usize..10, g in 0.05f64..1.0, w in 0.3f64..4.0) {
        let base = collective_advantage(&ModelSpec::new(kind, side, n, g), n).unwrap().gamma;
        let scaled = collective_advantage(&ModelSpec::new(kind, side, n, g * w).with_omega0(w), n).unwrap().gamma;
        prop_assert!((base / scaled - 1.0).abs() < 1e-6, "{base} vs {scaled}");
    }

    #[test]
    fn spin_quantum_gamma_depends_on_gt_only(n in 2usize..16, g in 0.02f64..0.5) {
        let a = collective_advantage(&ModelSpec::new(ModelKind::Spin, Side::Quantum, n, g), n).unwrap().gamma;
        let b = collective_advantage(&ModelSpec::new(ModelKind::Spin, Side::Quantum, n, 10.0 * g), n).unwrap().gamma;
        prop_assert!((a / b - 1.0).abs() < 1e-6);
    }

    #[test]
    fn spin_classical_gamma_is_n(n in 2usize..64, g in 0.05f64..2.0, eps in 1e-4f64..1e-2) {
        let spec = ModelSpec::new(ModelKind::Spin, Side::Classical, n, g).with_epsilon(eps);
        let gamma = collective_advantage(&spec, n).unwrap().gamma;
        prop_assert!((gamma / n as f64 - 1.0).abs() < 1e-3, "Gamma = {gamma}");
    }

    #[test]
    fn quantum_runs_conserve(kind in kind(), n in 1usize..12, g in 0.05f64..2.0) {
        let mut spec = ModelSpec::new(kind, Side::Quantum, n, g);
        spec.cutoff = Some(4 * n + 8);
        let (traj, _) = quantum_run(&spec).unwrap();
        let d = traj.diagnostics();
        prop_assert!(d.norm_drift.unwrap() < 1e-9);
        prop_assert!(d.energy_drift < 1e-8 * n as f64);
        if kind != ModelKind::Dicke {
            prop_assert!(d.excitation_drift.unwrap() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn refinement_beats_grid_and_matches_denser_grid(kind in kind(), side in side(), n in 1usize..6, g in 0.1f64..1.5) {
        let spec = ModelSpec::new(kind, side, n, g);
        let refined = charging_metrics(&spec).unwrap();
        let mut dense = NumericsConfig::default();
        dense.grid_points = 10 * (refined.spec.numerics.grid_points - 1) + 1;
        dense.time_horizon_factor = Some(refined.spec.horizon_factor());
        let dense_spec = refined.spec.clone().with_numerics(dense);
        let traj = match side {
            Side::Quantum => quantum_run(&dense_spec).unwrap().0,
            Side::Classical => classical_run(&dense_spec).unwrap().0,
        };
        let coarse = max_average_power(&traj, None, 1e-10).unwrap().metrics;
        prop_assert!(refined.metrics.p_bar >= coarse.p_bar * (1.0 - 1e-10));
        prop_assert!((refined.metrics.p_bar / coarse.p_bar - 1.0).abs() < 1e-5);
    }
}

#[test]
fn spin_rotating_frame_depends_on_gn_only() {
    // equal gN and tilt: identical polar histories on a common gN t grid
    let a = ModelSpec::new(ModelKind::Spin, Side::Classical, 1, 0.8);
    let b = ModelSpec::new(ModelKind::Spin, Side::Classical, 4, 0.2);
    let grid: Vec<f64> = (0..400).map(|i| i as f64 * 0.02).collect();
    let pa = integrate(&a, &initial_state_classical(&a).unwrap(), &grid).unwrap();
    let pb = integrate(&b, &initial_state_classical(&b).unwrap(), &grid).unwrap();
    for (x, y) in pa.points.iter().zip(&pb.points) {
        for (u, v) in x.cos_thetas().iter().zip(y.cos_thetas()) {
            assert!((u - v).abs() < 1e-6);
        }
    }
}
