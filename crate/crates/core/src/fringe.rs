//! Monte-Carlo model of the interference measurement: atoms are drawn
//! from the fringe density `1 + ν cos(kx + φ)`, the phase is recovered by
//! a least-squares fit of their histogram, and the spread of the estimate
//! is compared with `(ξ² + sqrt(1-ν²)/ν²) / N`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::witness::sensitivity;

/// Fewest positions the fit accepts.
pub const MIN_FIT_POSITIONS: usize = 100;
/// Phase starting points of the Gauss-Newton fit.
pub const FIT_STARTS: usize = 8;
/// Default window length in fringe periods.
pub const DEFAULT_PERIODS: usize = 8;
/// Shots needed by [`verify_sensitivity`].
pub const MIN_SHOTS: usize = 1000;
/// Largest tolerated fraction of failed fits.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

const GN_MAX_ITERATIONS: usize = 100;
const GN_STEP_TOLERANCE: f64 = 1e-13;
const GN_TRUST_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeParams {
    pub nu: f64,
    pub phi: f64,
    pub k: f64,
    pub n_atoms: usize,
    pub n_periods: usize,
}

impl FringeParams {
    pub fn new(nu: f64, phi: f64, k: f64, n_atoms: usize, n_periods: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::OutOfRange { what: "visibility", value: nu });
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::OutOfRange { what: "fringe wavevector", value: k });
        }
        if !phi.is_finite() {
            return Err(Error::OutOfRange { what: "phase", value: phi });
        }
        if n_atoms == 0 {
            return Err(Error::InvalidParticleCount(0));
        }
        if n_periods == 0 {
            return Err(Error::OutOfRange { what: "window periods", value: 0.0 });
        }
        Ok(Self { nu, phi, k, n_atoms, n_periods })
    }

    pub fn window(&self) -> f64 {
        self.n_periods as f64 * TAU / self.k
    }
}

/// `1 + ν cos(kx + φ)`.
pub fn density(x: f64, nu: f64, phi: f64, k: f64) -> f64 {
    1.0 + nu * (k * x + phi).cos()
}

/// Maps an angle to `(-π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Generator for shot `index` of a run seeded with `seed`: one ChaCha
/// stream per shot, so shots can be replayed independently.
pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Positions plus the number of proposals the rejection sampler used.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub positions: Vec<f64>,
    pub proposals: usize,
}

impl Sample {
    pub fn acceptance_rate(&self) -> f64 {
        self.positions.len() as f64 / self.proposals as f64
    }
}

/// Rejection sampling of `p(x) ∝ 1 + ν cos(kx + φ_shot)` on the window
/// with the flat envelope `1 + ν`.
pub fn sample_positions<R: Rng + ?Sized>(params: &FringeParams, shot_phase: f64, rng: &mut R) -> Sample {
    let length = params.window();
    let envelope = 1.0 + params.nu;
    let mut positions = Vec::with_capacity(params.n_atoms);
    let mut proposals = 0;
    while positions.len() < params.n_atoms {
        proposals += 1;
        let x = rng.random::<f64>() * length;
        if rng.random::<f64>() * envelope < density(x, params.nu, shot_phase, params.k) {
            positions.push(x);
        }
    }
    Sample { positions, proposals }
}

pub fn sample_shot(params: &FringeParams, shot_phase: f64, seed: u64) -> Vec<f64> {
    sample_positions(params, shot_phase, &mut shot_rng(seed, 0)).positions
}

/// `φ + β` with `β ~ Normal(0, ξ²/N)`: the quantum phase noise of one shot.
pub fn shot_phase<R: Rng + ?Sized>(phi: f64, xi2: f64, n_atoms: usize, rng: &mut R) -> Result<f64> {
    if !(xi2 >= 0.0) || !xi2.is_finite() {
        return Err(Error::OutOfRange { what: "phase squeezing", value: xi2 });
    }
    if xi2 == 0.0 {
        return Ok(phi);
    }
    let sd = (xi2 / n_atoms as f64).sqrt();
    let normal = Normal::new(0.0, sd).map_err(|_| Error::OutOfRange { what: "phase spread", value: sd })?;
    Ok(phi + normal.sample(rng))
}

pub fn draw_shot_phase(phi: f64, xi2: f64, n_atoms: usize, seed: u64) -> Result<f64> {
    shot_phase(phi, xi2, n_atoms, &mut shot_rng(seed, 0))
}

/// Whether the visibility is fitted along with the phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitMode {
    FreeVisibility,
    FixedVisibility(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// Fitted phase in `(-π, π]`.
    pub phi: f64,
    pub nu: f64,
    /// Sum of squared histogram residuals.
    pub residual: f64,
}

/// Bin centers and mean-one normalized histogram, `⌈√n⌉` bins per period.
pub fn histogram(positions: &[f64], k: f64, n_periods: usize) -> (Vec<f64>, Vec<f64>) {
    let per_period = (positions.len() as f64).sqrt().ceil().max(1.0) as usize;
    let bins = per_period * n_periods;
    let length = n_periods as f64 * TAU / k;
    let width = length / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in positions {
        let b = ((x / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let scale = bins as f64 / positions.len() as f64;
    let centers = (0..bins).map(|b| (b as f64 + 0.5) * width).collect();
    let heights = counts.into_iter().map(|c| c as f64 * scale).collect();
    (centers, heights)
}

struct Model<'a> {
    /// `k x_b` at bin centers.
    angles: Vec<f64>,
    heights: &'a [f64],
    /// Bin-averaging factor `sin(kw/2)/(kw/2)` of the cosine.
    damping: f64,
}

impl Model<'_> {
    fn residual(&self, nu: f64, phi: f64) -> f64 {
        self.angles
            .iter()
            .zip(self.heights)
            .map(|(&t, &h)| {
                let r = h - 1.0 - nu * self.damping * (t + phi).cos();
                r * r
            })
            .sum()
    }

    /// Damped Gauss-Newton from one start; `None` if it fails to settle.
    fn gauss_newton(&self, mut nu: f64, mut phi: f64, free_nu: bool) -> Option<(f64, f64, f64)> {
        let mut cost = self.residual(nu, phi);
        for _ in 0..GN_MAX_ITERATIONS {
            let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
            for (&t, &h) in self.angles.iter().zip(self.heights) {
                let (s, c) = (t + phi).sin_cos();
                let r = h - 1.0 - nu * self.damping * c;
                let g = [self.damping * c, -nu * self.damping * s];
                for i in 0..2 {
                    jtr[i] += g[i] * r;
                    for j in 0..2 {
                        jtj[i][j] += g[i] * g[j];
                    }
                }
            }
            let (d_nu, d_phi) = if free_nu {
                let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
                if det.abs() <= f64::EPSILON * jtj[0][0] * jtj[1][1] {
                    return None;
                }
                (
                    (jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det,
                    (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det,
                )
            } else {
                if jtj[1][1] <= 0.0 {
                    return None;
                }
                (0.0, jtr[1] / jtj[1][1])
            };
            // Near the minimum the cost is flat to rounding, so small steps are
            // taken as they are; larger ones are halved until the cost drops.
            let mut scale = 1.0;
            let small = d_nu.abs().max(d_phi.abs()) < GN_TRUST_STEP;
            let accepted = loop {
                let (cand_nu, cand_phi) = (nu + scale * d_nu, phi + scale * d_phi);
                let cand = self.residual(cand_nu, cand_phi);
                if small || cand <= cost {
                    break Some((cand_nu, cand_phi, cand));
                }
                scale /= 2.0;
                if scale < 1e-10 {
                    break None;
                }
            };
            let Some((new_nu, new_phi, new_cost)) = accepted else {
                // No descent direction left: converged to rounding.
                return Some((nu, phi, cost));
            };
            let step = (scale * d_nu).abs().max((scale * d_phi).abs());
            nu = new_nu;
            phi = new_phi;
            cost = new_cost;
            if step < GN_STEP_TOLERANCE {
                return Some((nu, phi, cost));
            }
        }
        None
    }
}

/// Least-squares fit of `1 + ν cos(kx + φ)` to the binned positions,
/// Gauss-Newton from [`FIT_STARTS`] phase starts; the lowest residual wins.
pub fn fit_phase(positions: &[f64], k: f64, n_periods: usize, mode: FitMode) -> Result<FitResult> {
    if positions.len() < MIN_FIT_POSITIONS {
        return Err(Error::TooFewPositions { min: MIN_FIT_POSITIONS, got: positions.len() });
    }
    let (centers, heights) = histogram(positions, k, n_periods);
    fit_histogram(&centers, &heights, k, mode)
}

/// Fits bin heights (mean one) at equally spaced `centers`.
pub fn fit_histogram(centers: &[f64], heights: &[f64], k: f64, mode: FitMode) -> Result<FitResult> {
    if centers.len() != heights.len() {
        return Err(Error::DimensionMismatch { expected: centers.len(), got: heights.len() });
    }
    if centers.len() < 3 {
        return Err(Error::FitFailed);
    }
    let half = 0.5 * k * (centers[1] - centers[0]);
    let model = Model { angles: centers.iter().map(|&x| k * x).collect(), heights, damping: half.sin() / half };
    let (start_nu, free) = match mode {
        FitMode::FreeVisibility => (0.5, true),
        FitMode::FixedVisibility(nu) => (nu, false),
    };
    let mut best: Option<(f64, f64, f64)> = None;
    for s in 0..FIT_STARTS {
        let start = -PI + TAU * s as f64 / FIT_STARTS as f64;
        if let Some(found) = model.gauss_newton(start_nu, start, free) {
            if best.is_none_or(|b| found.2 < b.2) {
                best = Some(found);
            }
        }
    }
    let (mut nu, mut phi, residual) = best.ok_or(Error::FitFailed)?;
    if nu < 0.0 {
        nu = -nu;
        phi += PI;
    }
    Ok(FitResult { phi: wrap_phase(phi), nu, residual })
}

/// One complete shot: phase draw, sampling and fit.
pub fn run_shot(params: &FringeParams, xi2: f64, mode: FitMode, seed: u64, index: u64) -> Result<FitResult> {
    let mut rng = shot_rng(seed, index);
    let phase = shot_phase(params.phi, xi2, params.n_atoms, &mut rng)?;
    let sample = sample_positions(params, phase, &mut rng);
    fit_phase(&sample.positions, params.k, params.n_periods, mode)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    pub n_shots: usize,
    pub failed_shots: usize,
    /// Sample variance of the fitted phase about its mean.
    pub empirical_variance: f64,
    /// `(ξ² + sqrt(1-ν²)/ν²) / N`.
    pub predicted_variance: f64,
    /// Mean of `φ_est - φ`, wrapped.
    pub bias: f64,
    pub bias_standard_error: f64,
}

impl SensitivityReport {
    pub fn ratio(&self) -> f64 {
        self.empirical_variance / self.predicted_variance
    }

    /// `|bias| ≤ 3 SE`.
    pub fn unbiased(&self) -> bool {
        self.bias.abs() <= 3.0 * self.bias_standard_error
    }
}

/// Runs `n_shots` independent shots in parallel and compares the spread
/// of the fitted phases with the predicted variance.
pub fn verify_sensitivity(
    params: &FringeParams,
    xi2: f64,
    n_shots: usize,
    seed: u64,
    mode: FitMode,
) -> Result<SensitivityReport> {
    if !(params.nu > 0.2 && params.nu < 0.98) {
        return Err(Error::OutOfRange { what: "visibility (fit regime 0.2..0.98)", value: params.nu });
    }
    if n_shots < MIN_SHOTS {
        return Err(Error::OutOfRange { what: "shot count", value: n_shots as f64 });
    }
    let results: Vec<Result<FitResult>> =
        (0..n_shots as u64).into_par_iter().map(|i| run_shot(params, xi2, mode, seed, i)).collect();
    let errors: Vec<f64> = results.iter().filter_map(|r| r.as_ref().ok()).map(|f| wrap_phase(f.phi - params.phi)).collect();
    let failed = n_shots - errors.len();
    if failed as f64 > MAX_FAILURE_FRACTION * n_shots as f64 {
        return Err(Error::TooManyFitFailures { failed, total: n_shots });
    }
    let m = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / m;
    let variance = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (m - 1.0);
    Ok(SensitivityReport {
        n_shots,
        failed_shots: failed,
        empirical_variance: variance,
        predicted_variance: sensitivity(xi2, params.nu, params.n_atoms)?,
        bias: mean,
        bias_standard_error: (variance / m).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        assert_eq!(density(0.3, 0.0, 1.0, 2.0), 1.0);
        assert!(density(PI, 1.0, 0.0, 1.0).abs() < 1e-15);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(2.5 - TAU) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn exact_histogram_recovers_phase() {
        let k = 1.7;
        let centers: Vec<f64> = (0..256).map(|b| (b as f64 + 0.5) * 8.0 * TAU / k / 256.0).collect();
        for phi0 in [0.0, 2.5, 2.5 - TAU, -3.0, PI] {
            let heights: Vec<f64> = centers.iter().map(|&x| density(x, 0.7, phi0, k)).collect();
            for mode in [FitMode::FreeVisibility, FitMode::FixedVisibility(0.7)] {
                let fit = fit_histogram(&centers, &heights, k, mode).unwrap();
                assert!((wrap_phase(fit.phi - phi0)).abs() < 1e-8, "{phi0}: {}", fit.phi);
            }
        }
    }

    #[test]
    fn deterministic_streams() {
        let p = FringeParams::new(0.8, 0.1, 1.0, 500, 8).unwrap();
        assert_eq!(sample_shot(&p, 0.1, 9), sample_shot(&p, 0.1, 9));
        assert_ne!(sample_shot(&p, 0.1, 9), sample_shot(&p, 0.1, 10));
        assert_eq!(draw_shot_phase(0.3, 0.0, 100, 1).unwrap(), 0.3);
    }

    #[test]
    fn guards() {
        let p = FringeParams::new(0.99, 0.0, 1.0, 1000, 8).unwrap();
        assert!(verify_sensitivity(&p, 1.0, 1000, 0, FitMode::FreeVisibility).is_err());
        assert!(fit_phase(&[0.1; 99], 1.0, 8, FitMode::FreeVisibility).is_err());
        assert!(FringeParams::new(1.2, 0.0, 1.0, 10, 8).is_err());
    }
}
