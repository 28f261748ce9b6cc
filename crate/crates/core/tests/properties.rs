use proptest::prelude::*;

use qdcavity_core::liouvillian::{
    build_hamiltonian, build_hamiltonian_dense, build_liouvillian, build_liouvillian_dense, coefficients_qo,
    SteadyStateOptions,
};
use qdcavity_core::operators::{dissipator, tensor, DenseMatrix, HilbertLayout};
use qdcavity_core::semiclassical::{continued_from_zero_power, photon_number, sigma_z_of_n, solve_self_consistent};
use qdcavity_core::{Drive, SystemParams, Topology, C64};

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![Just(Topology::SingleSided), Just(Topology::DoubleSided)]
}

prop_compose! {
    fn system()(
        topology in topology(),
        g in 0.0..10.0f64,
        side in 0.0..2.0f64,
        gamma_par in 0.01..1.0f64,
        gamma_star in 0.0..0.5f64,
        qd in -1.0..1.0f64,
    ) -> SystemParams {
        SystemParams::normalized(topology, g, side, gamma_par, gamma_star, qd)
    }
}

prop_compose! {
    fn matrix(dim: usize)(entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim)) -> DenseMatrix {
        DenseMatrix::from_fn(dim, dim, |i, j| C64::new(entries[i * dim + j].0, entries[i * dim + j].1))
    }
}

fn hermitian(m: &DenseMatrix) -> DenseMatrix {
    (m + &m.adjoint()).scale(C64::new(0.5, 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_mixed_product(a in matrix(2), b in matrix(3), c in matrix(2), d in matrix(3)) {
        let lhs = tensor(&a, &b).matmul(&tensor(&c, &d));
        let rhs = tensor(&a.matmul(&c), &b.matmul(&d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn adjoint_is_an_involution(a in matrix(5)) {
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn dissipator_preserves_trace(c in matrix(6), rho in matrix(6)) {
        let rho = hermitian(&rho);
        let out = dissipator(&qdcavity_core::operators::SparseMatrix::from_dense(&c)).unwrap().apply(&rho);
        prop_assert!(out.trace().norm() < 1e-12 * (1.0 + rho.max_abs() * c.max_abs() * c.max_abs()));
    }

    #[test]
    fn hamiltonian_is_hermitian(p in system(), omega in -5.0..5.0f64, power in 0.0..5.0f64, cutoff in 1usize..5) {
        let h = build_hamiltonian(&p, &Drive::new(omega, power), cutoff).unwrap().to_dense();
        prop_assert!(h.hermiticity_defect() < 1e-14);
        let hd = build_hamiltonian_dense(&p, &Drive::new(omega, power), cutoff).unwrap();
        prop_assert!(h.max_abs_diff(&hd) < 1e-14);
    }

    #[test]
    fn liouvillian_sparse_matches_dense(p in system(), omega in -5.0..5.0f64, power in 0.0..5.0f64, cutoff in 1usize..4) {
        let drive = Drive::new(omega, power);
        let sparse = build_liouvillian(&p, &drive, cutoff).unwrap().to_dense();
        let dense = build_liouvillian_dense(&p, &drive, cutoff).unwrap();
        prop_assert!(sparse.max_abs_diff(&dense) < 1e-14);
    }

    #[test]
    fn liouvillian_preserves_trace_and_hermiticity(
        p in system(), omega in -5.0..5.0f64, power in 0.0..5.0f64, rho in matrix(8),
    ) {
        let rho = hermitian(&rho);
        let l = build_liouvillian(&p, &Drive::new(omega, power), 3).unwrap();
        let out = l.apply(&rho);
        let scale = out.max_abs().max(1.0);
        prop_assert!(out.trace().norm() < 1e-12 * scale);
        prop_assert!(out.hermiticity_defect() < 1e-12 * scale);
    }

    #[test]
    fn layout_round_trip(cutoff in 1usize..40, k in 0usize..1000) {
        let layout = HilbertLayout::new(cutoff).unwrap();
        let k = k % layout.total_dim();
        let (q, n) = layout.decompose(k);
        prop_assert_eq!(layout.index(q, n), k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn semiclassical_roots_are_self_consistent(p in system(), delta in -6.0..6.0f64, power in 0.0..20.0f64) {
        let drive = Drive::at_detuning(&p, delta, power);
        let roots = solve_self_consistent(&drive, &p, None).unwrap();
        prop_assert!(roots.len() % 2 == 1, "{} roots", roots.len());
        let delta_x = p.omega_x - drive.omega;
        for r in &roots {
            prop_assert!((-1.0..=0.0).contains(&r.sigma_z));
            prop_assert!(r.n_cavity >= 0.0);
            let n = photon_number(r.sigma_z, &drive, &p).unwrap();
            prop_assert!((n - r.n_cavity).abs() <= 1e-10 * n.max(f64::MIN_POSITIVE));
            let s = sigma_z_of_n(r.n_cavity, delta_x, &p);
            prop_assert!((s - r.sigma_z).abs() <= 1e-10 * r.sigma_z.abs().max(f64::MIN_POSITIVE));
            if let Some(t) = r.t {
                prop_assert_eq!(r.r, 1.0 + t);
            }
        }
    }

    #[test]
    fn semiclassical_detuning_conjugation(
        topology in topology(), g in 0.0..10.0f64, side in 0.0..2.0f64, gamma_par in 0.01..1.0f64,
        delta in 0.0..6.0f64, power in 0.0..20.0f64,
    ) {
        let p = SystemParams::normalized(topology, g, side, gamma_par, 0.0, 0.0);
        let plus = continued_from_zero_power(&p, &Drive::at_detuning(&p, delta, power)).unwrap();
        let minus = continued_from_zero_power(&p, &Drive::at_detuning(&p, -delta, power)).unwrap();
        prop_assert!((plus.solution.r - minus.solution.r.conj()).norm() < 1e-8);
    }

    #[test]
    fn continued_branch_saturates_monotonically(p in system(), delta in -4.0..4.0f64) {
        let mut last = -1.0;
        for k in 0..=30 {
            let power = 10f64.powf(-4.0 + 0.2 * k as f64);
            let s = continued_from_zero_power(&p, &Drive::at_detuning(&p, delta, power)).unwrap().solution.sigma_z;
            prop_assert!(s >= last - 1e-12, "power {power}: {s} < {last}");
            last = s;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn master_equation_state_is_physical(p in system(), delta in -4.0..4.0f64, power in 1e-3..0.5f64) {
        let p = SystemParams { g: p.g.min(3.0), ..p };
        let q = coefficients_qo(&p, &Drive::at_detuning(&p, delta, power), &SteadyStateOptions::default()).unwrap();
        let rho = &q.state.rho;
        prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        prop_assert!(rho.hermiticity_defect() < 1e-10);
        prop_assert!(rho.is_positive_semidefinite(1e-8));
        prop_assert!(q.state.residual <= 1e-10);
        match q.t {
            None => prop_assert!(q.r.norm() <= 1.0 + 1e-9),
            Some(t) => {
                prop_assert!(q.r.norm_sqr() + t.norm_sqr() <= 1.0 + 1e-9);
                prop_assert!((q.r - 1.0 - t).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn master_equation_detuning_conjugation(delta in 0.1..4.0f64, power in 1e-3..0.5f64) {
        let p = SystemParams::single_sided_defaults();
        let options = SteadyStateOptions::default();
        let plus = coefficients_qo(&p, &Drive::at_detuning(&p, delta, power), &options).unwrap();
        let minus = coefficients_qo(&p, &Drive::at_detuning(&p, -delta, power), &options).unwrap();
        prop_assert!((plus.r - minus.r.conj()).norm() < 1e-8);
    }

    #[test]
    fn lossless_double_sided_cold_cavity_conserves_energy(delta in -4.0..4.0f64) {
        let p = SystemParams::normalized(Topology::DoubleSided, 0.0, 0.0, 0.1, 0.0, 0.0);
        let q = coefficients_qo(&p, &Drive::at_detuning(&p, delta, 1e-3), &SteadyStateOptions::default()).unwrap();
        let t = q.t.unwrap();
        prop_assert!((q.r.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-10);
    }
}
