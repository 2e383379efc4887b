//! Statistical checks of the fringe sampler and the phase fit.

use std::f64::consts::TAU;

use bellfringe::fringe::{
    density, draw_shot_phase, fit_histogram, fit_phase, histogram, run_shot, sample_positions, sample_shot, shot_rng,
    wrap_phase, FitMode, FringeParams,
};
use bellfringe::verify_sensitivity;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Asymptotic 1% critical value of the Kolmogorov distribution.
const KS_CRITICAL_1PCT: f64 = 1.6276;

#[test]
fn flat_fringe_samples_uniformly() {
    let p = FringeParams::new(0.0, 0.0, 1.0, 100_000, 8).unwrap();
    let mut x = sample_shot(&p, 0.0, 11);
    let length = p.window();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let f = xi / length;
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d * n.sqrt() < KS_CRITICAL_1PCT, "KS statistic {}", d * n.sqrt());
}

#[test]
fn fringe_histogram_passes_chi_square() {
    let (nu, phi, k) = (0.8, 0.4, 2.0);
    let p = FringeParams::new(nu, phi, k, 100_000, 8).unwrap();
    let x = sample_shot(&p, phi, 5);
    let bins = 64;
    let length = p.window();
    let width = length / bins as f64;
    let mut counts = vec![0.0; bins];
    for &xi in &x {
        counts[((xi / width) as usize).min(bins - 1)] += 1.0;
    }
    // exact cell probabilities from the antiderivative x + ν sin(kx+φ)/k
    let cdf = |x: f64| x + nu * (k * x + phi).sin() / k;
    let stat: f64 = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let prob = (cdf((b + 1) as f64 * width) - cdf(b as f64 * width)) / length;
            let expected = prob * x.len() as f64;
            (c - expected).powi(2) / expected
        })
        .sum();
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(stat < critical, "χ² = {stat} ≥ {critical}");
}

#[test]
fn density_integrates_to_one_per_period() {
    let k = 3.0;
    let period = TAU / k;
    let m = 10_000;
    let mean: f64 = (0..m).map(|i| density((i as f64 + 0.5) * period / m as f64, 0.9, 1.1, k)).sum::<f64>() / m as f64;
    assert!((mean - 1.0).abs() < 1e-12);
}

#[test]
fn rejection_acceptance_rate() {
    for nu in [0.3, 0.8, 1.0] {
        let p = FringeParams::new(nu, 0.0, 1.0, 200_000, 8).unwrap();
        let s = sample_positions(&p, 0.0, &mut shot_rng(3, 0));
        let expected = 1.0 / (1.0 + nu);
        assert!((s.acceptance_rate() / expected - 1.0).abs() < 0.02, "ν={nu}: {}", s.acceptance_rate());
        assert!(s.positions.iter().all(|&x| (0.0..p.window()).contains(&x)));
    }
}

#[test]
fn shot_phase_noise_has_predicted_variance() {
    let draws: Vec<f64> = (0..10_000).map(|s| draw_shot_phase(0.2, 1.0, 1000, s).unwrap() - 0.2).collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((var / 1e-3 - 1.0).abs() < 0.05, "variance {var}");
    assert!(mean.abs() < 3.0 * (var / n).sqrt());
    assert!((0..10).all(|s| draw_shot_phase(0.2, 0.0, 1000, s).unwrap() == 0.2));
}

#[test]
fn gauss_newton_matches_linear_least_squares() {
    // In (ν cos φ, -ν sin φ) the model is linear; solve its normal equations directly.
    let p = FringeParams::new(0.6, -1.0, 1.3, 2000, 8).unwrap();
    for seed in 0..20 {
        let x = sample_shot(&p, -1.0, seed);
        let (centers, heights) = histogram(&x, p.k, p.n_periods);
        let half = 0.5 * p.k * (centers[1] - centers[0]);
        let damp = half.sin() / half;
        let (mut cc, mut ss, mut cs, mut hc, mut hs) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xc, &h) in centers.iter().zip(&heights) {
            let (s, c) = (p.k * xc).sin_cos();
            cc += c * c;
            ss += s * s;
            cs += c * s;
            hc += (h - 1.0) * c;
            hs += (h - 1.0) * s;
        }
        let det = cc * ss - cs * cs;
        let a = (ss * hc - cs * hs) / det / damp;
        let b = (cc * hs - cs * hc) / det / damp;
        let phi_ls = (-b).atan2(a);
        let fit = fit_histogram(&centers, &heights, p.k, FitMode::FreeVisibility).unwrap();
        assert!(wrap_phase(fit.phi - phi_ls).abs() < 1e-9, "seed {seed}: {} vs {phi_ls}", fit.phi);
        assert!((fit.nu - a.hypot(b)).abs() < 1e-9);
    }
}

#[test]
fn fit_is_wrap_invariant_and_deterministic() {
    let p = FringeParams::new(0.9, 2.5, 1.0, 5000, 8).unwrap();
    let q = FringeParams { phi: 2.5 - TAU, ..p };
    let a = run_shot(&p, 0.5, FitMode::FreeVisibility, 42, 7).unwrap();
    let b = run_shot(&q, 0.5, FitMode::FreeVisibility, 42, 7).unwrap();
    assert!(wrap_phase(a.phi - b.phi).abs() < 1e-9);
    assert_eq!(a, run_shot(&p, 0.5, FitMode::FreeVisibility, 42, 7).unwrap());
    assert!(a.phi > -std::f64::consts::PI && a.phi <= std::f64::consts::PI);
    let x = sample_shot(&p, 2.5, 1);
    assert_eq!(fit_phase(&x, 1.0, 8, FitMode::FreeVisibility), fit_phase(&x, 1.0, 8, FitMode::FreeVisibility));
}

#[test]
fn estimator_is_unbiased() {
    let p = FringeParams::new(0.9, 0.0, 1.0, 10_000, 8).unwrap();
    let report = verify_sensitivity(&p, 0.0, 1000, 99, FitMode::FreeVisibility).unwrap();
    assert_eq!(report.failed_shots, 0);
    assert!(report.unbiased(), "bias {} ± {}", report.bias, report.bias_standard_error);
}

#[test]
fn sampling_variance_scales_inversely_with_atoms() {
    let small = FringeParams::new(0.7, 0.3, 1.0, 500, 8).unwrap();
    let large = FringeParams { n_atoms: 1000, ..small };
    let a = verify_sensitivity(&small, 0.0, 2000, 1, FitMode::FreeVisibility).unwrap();
    let b = verify_sensitivity(&large, 0.0, 2000, 2, FitMode::FreeVisibility).unwrap();
    let ratio = a.empirical_variance / b.empirical_variance;
    assert!((ratio / 2.0 - 1.0).abs() < 0.15, "ratio {ratio}");
}
