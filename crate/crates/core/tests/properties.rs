use bellfringe::model::full_spectrum;
use bellfringe::noise::blur_visibility;
use bellfringe::spin::compute_moments;
use bellfringe::tridiag::check_orthonormal;
use bellfringe::witness::{minimize_bell_direct, optimal_theta};
use bellfringe::{
    build_hamiltonian, ground_state, relation_check, DickeBasis, ModelParams64, Moments64, Rotation, WitnessReport64,
};
use proptest::prelude::*;

fn state_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..60).prop_flat_map(|n| (Just(n), prop::collection::vec(-1.0f64..1.0, n + 1)))
}

/// Moments of an (effective) ensemble with `ν` and `ξ²`, chosen at `N`.
fn moments_for(n: usize, nu: f64, xi2: f64) -> Moments64 {
    let jx = nu * n as f64 / 2.0;
    Moments64 { jx, jy: 0.0, jz: 0.0, jx2: 0.0, jy2: xi2 * jx * jx / n as f64, jz2: 0.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn casimir_holds_for_any_state((n, raw) in state_strategy()) {
        let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let v: Vec<f64> = raw.iter().map(|c| c / norm).collect();
        let basis = DickeBasis::new(n).unwrap();
        let m = compute_moments(&basis, &v).unwrap();
        prop_assert!(m.casimir_defect(&basis).abs() < 1e-9);
        let j = n as f64 / 2.0;
        prop_assert!(m.jx.abs() <= j + 1e-12 && m.jz.abs() <= j + 1e-12);
        prop_assert!(m.jx2 >= m.jx * m.jx - 1e-9);
    }

    #[test]
    fn eigenpairs_are_accurate(n in 1usize..120, lambda in -3.0f64..12.0, delta in -1.0f64..1.0) {
        let params = ModelParams64::new(n, lambda, delta).unwrap();
        let h = build_hamiltonian(&params);
        let spec = full_spectrum(&params).unwrap();
        let vectors: Vec<Vec<f64>> = spec.states().iter().map(|s| s.coeffs().to_vec()).collect();
        for (e, v) in spec.energies().iter().zip(&vectors) {
            prop_assert!(h.residual(*e, v) <= 1e-8 * h.norm());
        }
        prop_assert!(check_orthonormal(&vectors, 1e-8).is_ok());
        let trace: f64 = spec.energies().iter().sum();
        prop_assert!((trace - h.trace()).abs() <= 1e-9 * h.norm() * (n as f64 + 1.0));
    }

    #[test]
    fn ground_state_relation_identity(n in 2usize..200, lambda in -1.6f64..10.0) {
        let gs = ground_state(&ModelParams64::new(n, lambda, 0.0).unwrap()).unwrap();
        let m = gs.state.moments();
        prop_assert!(m.casimir_defect(&DickeBasis::new(n).unwrap()).abs() < 1e-9);
        prop_assert_eq!(m.jz, 0.0);
        if let Ok(r) = WitnessReport64::from_moments(&m, n, Rotation::for_interaction(lambda)) {
            prop_assert!(relation_check(&r));
            prop_assert!(r.nu > 0.0 && r.nu <= 1.0);
        }
    }

    #[test]
    fn blur_composes(nu in 0.0f64..=1.0, k in 0.1f64..5.0, s1 in 0.0f64..1.0, s2 in 0.0f64..1.0) {
        let twice = blur_visibility(blur_visibility(nu, k, s1), k, s2);
        let once = blur_visibility(nu, k, (s1 * s1 + s2 * s2).sqrt());
        prop_assert!((twice - once).abs() <= 1e-12);
    }

    #[test]
    fn witness_sign_matches_bell_minimum(nu in 0.05f64..1.0, xi2 in 0.0f64..2.0) {
        let (theta0, interior) = optimal_theta(nu, xi2);
        prop_assume!(interior);
        let n = 1000;
        let m = moments_for(n, nu, xi2);
        let r = WitnessReport64::from_parts(xi2, nu, n, false).unwrap();
        let (theta, value) = minimize_bell_direct(n, &m);
        prop_assert!((theta - theta0).abs() < 1e-6, "θ₀ {} vs numeric {}", theta0, theta);
        // B(θ) is extensive; compare signs with a relative guard at the threshold
        if r.b_param.abs() > 1e-9 {
            prop_assert_eq!(r.b_param < 0.0, value < 0.0);
        }
    }
}

#[test]
fn ground_state_moments_are_monotone_in_interaction() {
    // Phase squeezing improves as Λ goes from 0 towards -1 (attractive side)
    let mut last = f64::INFINITY;
    for i in 0..=18 {
        let lambda = -0.05 * i as f64;
        let gs = ground_state(&ModelParams64::new(400, lambda, 0.0).unwrap()).unwrap();
        let r = WitnessReport64::from_moments(&gs.state.moments(), 400, Rotation::None).unwrap();
        assert!(r.xi2 < last + 1e-12, "Λ={lambda}");
        last = r.xi2;
    }
}
