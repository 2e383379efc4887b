//! Large-N behavior of the numerical engine against the closed-form
//! predictions and the qualitative noise trends.

use bellfringe::analytics::{analytic_boundary_t, semiclassical_ab, thermal_xi2};
use bellfringe::{
    delta_mixture, ground_state, thermal_ensemble, ModelParams, ModelParams64, Moments64, Rotation, WitnessReport64,
};

const N: usize = 1000;

fn report(m: &Moments64, lambda: f64) -> WitnessReport64 {
    WitnessReport64::from_moments(m, N, Rotation::for_interaction(lambda)).unwrap()
}

fn ground(lambda: f64) -> WitnessReport64 {
    let gs = ground_state(&ModelParams64::new(N, lambda, 0.0).unwrap()).unwrap();
    report(&gs.state.moments(), lambda)
}

#[test]
fn ground_state_follows_semiclassics_away_from_transition() {
    for lambda in [-1.3, -1.2, -0.8, -0.5, -0.2, 0.0, 0.5, 2.0, 5.0, 10.0] {
        let r = ground(lambda);
        let p = semiclassical_ab(lambda).unwrap();
        for (num, ana) in [(r.a_param, p.a_param), (r.b_param, p.b_param)] {
            let ok = (num - ana).abs() <= 0.10 * ana.abs() || (num - ana).abs() <= 0.02;
            assert!(ok, "Λ={lambda}: numeric {num} vs semiclassical {ana}");
        }
    }
}

#[test]
fn repulsive_ground_state_needs_rotation() {
    let gs = ground_state(&ModelParams64::new(N, 5.0, 0.0).unwrap()).unwrap();
    let plain = WitnessReport64::from_moments(&gs.state.moments(), N, Rotation::None).unwrap();
    let rotated = report(&gs.state.moments(), 5.0);
    // number squeezed, phase anti-squeezed before rotation
    assert!(plain.xi2 > 1.0 && rotated.xi2 < 1.0);
    assert!(rotated.rotated);
}

#[test]
fn thermal_squeezing_follows_coth_law() {
    for lambda in [-0.5, -1.2, 3.0, 8.0] {
        for t in [0.2, 0.5, 1.0, 2.0] {
            let e = thermal_ensemble(&ModelParams64::new(N, lambda, 0.0).unwrap(), t).unwrap();
            let num = report(&e.moments(), lambda).xi2;
            let ana = thermal_xi2(lambda, t).unwrap();
            assert!((num / ana - 1.0).abs() < 0.05, "Λ={lambda} T={t}: {num} vs {ana}");
        }
    }
}

#[test]
fn witness_degrades_with_temperature() {
    let params = ModelParams64::new(N, 8.0, 0.0).unwrap();
    let mut last = f64::NEG_INFINITY;
    for i in 0..=12 {
        let t = 0.25 * i as f64;
        let b = report(&thermal_ensemble(&params, t).unwrap().moments(), 8.0).b_param;
        assert!(b >= last - 1e-12, "T={t}");
        last = b;
    }
    // sign flips near (below) the large-N boundary temperature
    let t_star = analytic_boundary_t(8.0).unwrap();
    let hot = report(&thermal_ensemble(&params, 1.05 * t_star).unwrap().moments(), 8.0).b_param;
    assert!(hot > 0.0);
}

#[test]
fn delta_noise_degrades_witness() {
    for lambda in [-1.2, -0.9, 6.0] {
        let mut last = f64::NEG_INFINITY;
        for s in [0.0, 0.01, 0.02, 0.05, 0.1, 0.2] {
            let m = delta_mixture(N, lambda, s).unwrap();
            assert!(m.converged);
            let mom = m.moments();
            assert_eq!((mom.jy, mom.jz), (0.0, 0.0));
            let b = report(&mom, lambda).b_param;
            assert!(b >= last - 1e-9, "Λ={lambda} σ_δ={s}: {b} < {last}");
            last = b;
        }
        assert!(last > 0.0, "σ_δ = 0.2 should destroy the witness at Λ={lambda}");
    }
    // the attractive side is far more fragile
    let b_attr = report(&delta_mixture(N, -0.9, 0.05).unwrap().moments(), -0.9).b_param;
    let b_rep = report(&delta_mixture(N, 8.0, 0.05).unwrap().moments(), 8.0).b_param;
    assert!(b_attr > 0.0 && b_rep < 0.0, "{b_attr} {b_rep}");
}

#[test]
fn tilt_sign_symmetry() {
    for lambda in [-1.5, -0.5, 2.0] {
        let p = ground_state(&ModelParams64::new(300, lambda, 0.07).unwrap()).unwrap().state.moments();
        let m = ground_state(&ModelParams64::new(300, lambda, -0.07).unwrap()).unwrap().state.moments();
        assert!((p.jz + m.jz).abs() < 1e-9);
        for (a, b) in [(p.jx, m.jx), (p.jx2, m.jx2), (p.jy2, m.jy2), (p.jz2, m.jz2)] {
            assert!((a - b).abs() < 1e-8 * a.abs().max(1.0));
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let g32 = ground_state(&ModelParams::<f32>::new(100, -0.6, 0.0).unwrap()).unwrap();
    let g64 = ground_state(&ModelParams64::new(100, -0.6, 0.0).unwrap()).unwrap();
    let (a, b) = (g32.state.moments(), g64.state.moments());
    assert!((a.jx as f64 / b.jx - 1.0).abs() < 1e-4);
    assert!((a.jy2 as f64 / b.jy2 - 1.0).abs() < 1e-3);
}
