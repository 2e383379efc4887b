//! Semiclassical (large-N) predictions for the ground and thermal states,
//! and the noise levels at which the Bell witness changes sign.

use crate::error::{Error, Result};
use crate::noise::blur_visibility;
use crate::scalar::Real;
use crate::witness::{bell_witness, param_a};

/// Lower end of the phase-squeezed attractive regime, `-(1+√5)/2`.
pub fn golden_limit<T: Real>() -> T {
    -(T::one() + T::lit(5.0).sqrt()) / T::lit(2.0)
}

/// Half-width of the window around `Λ = -1` where the large-N formulas break down.
pub const BREAKDOWN_HALF_WIDTH: f64 = 0.02;

/// Bisection tolerance of the boundary solvers.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `-1 < Λ ≤ 0`: phase squeezing with `ν ≈ 1`.
    AttractivePara,
    /// `-(1+√5)/2 < Λ < -1`: cat-like ground state with `ν ≈ 1/|Λ|`.
    AttractiveFerro,
    /// `Λ > 0`: number squeezing, used after a π/2 rotation.
    Repulsive,
}

impl Regime {
    pub fn of<T: Real>(lambda: T) -> Self {
        if lambda > T::zero() {
            Regime::Repulsive
        } else if lambda > -T::one() {
            Regime::AttractivePara
        } else {
            Regime::AttractiveFerro
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::AttractivePara => "attractive_para",
            Regime::AttractiveFerro => "attractive_ferro",
            Regime::Repulsive => "repulsive",
        }
    }

    /// Small-oscillation frequency (in units of the tunneling energy).
    fn frequency<T: Real>(self, lambda: T) -> T {
        match self {
            Regime::AttractiveFerro => (lambda * lambda - T::one()).sqrt(),
            _ => (T::one() + lambda).sqrt(),
        }
    }

    /// Zero-temperature phase squeezing of the branch.
    fn xi2_ground<T: Real>(self, lambda: T) -> T {
        match self {
            Regime::AttractivePara => (T::one() + lambda).sqrt(),
            Regime::AttractiveFerro => lambda.abs() * (lambda * lambda - T::one()).sqrt(),
            Regime::Repulsive => T::one() / (T::one() + lambda).sqrt(),
        }
    }

    fn visibility<T: Real>(self, lambda: T) -> T {
        match self {
            Regime::AttractiveFerro => T::one() / lambda.abs(),
            _ => T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalPrediction<T> {
    pub regime: Regime,
    pub xi2: T,
    pub nu: T,
    pub a_param: T,
    pub b_param: T,
}

/// Large-N `ξ²`, `ν`, `A` and `B` of the ground state.
///
/// `A` and `B` are evaluated through the witness formulas, so
/// `B - A = f(ν)` holds to rounding; they coincide with the closed forms
/// `√(1+Λ) - 1`, `2|Λ|√(Λ²-1) - 1`, `1/√(1+Λ) - 1` and their `B` partners.
pub fn semiclassical_ab<T: Real>(lambda: T) -> Result<SemiclassicalPrediction<T>> {
    let value = lambda.to_f64().unwrap_or(f64::NAN);
    if !lambda.is_finite() || lambda <= golden_limit() {
        return Err(Error::InvalidInteraction { lambda: value, context: "outside the squeezed regimes" });
    }
    if (lambda + T::one()).abs() < T::lit(BREAKDOWN_HALF_WIDTH) {
        return Err(Error::InvalidInteraction { lambda: value, context: "too close to the transition at -1" });
    }
    let regime = Regime::of(lambda);
    let xi2 = regime.xi2_ground(lambda);
    let nu = regime.visibility(lambda);
    Ok(SemiclassicalPrediction { regime, xi2, nu, a_param: param_a(xi2, nu)?, b_param: bell_witness(xi2, nu)? })
}

/// Thermal phase squeezing, `ξ²(T) = ξ²(0) · coth(ω / (2T))`.
pub fn thermal_xi2<T: Real>(lambda: T, temperature: T) -> Result<T> {
    if !lambda.is_finite() || lambda == -T::one() {
        return Err(Error::InvalidInteraction {
            lambda: lambda.to_f64().unwrap_or(f64::NAN),
            context: "thermal squeezing is singular at -1",
        });
    }
    if !(temperature >= T::zero()) {
        return Err(Error::NegativeTemperature(temperature.to_f64().unwrap_or(f64::NAN)));
    }
    let regime = Regime::of(lambda);
    let ground = regime.xi2_ground(lambda);
    if temperature == T::zero() {
        return Ok(ground);
    }
    let x = regime.frequency(lambda) / (T::lit(2.0) * temperature);
    Ok(ground / x.tanh())
}

/// The three noiseless sign-change points of `B`: `(-3/4, -3/(2√2), 3)`.
pub fn bell_thresholds<T: Real>() -> (T, T, T) {
    (T::lit(-0.75), -T::lit(3.0) / (T::lit(2.0) * T::SQRT_2()), T::lit(3.0))
}

fn bisect<T: Real>(mut lo: T, mut hi: T, f: impl Fn(T) -> T) -> T {
    let f_lo = f(lo);
    let tol = T::tolerance(BOUNDARY_TOLERANCE);
    while (hi - lo) > tol * hi.abs().max(T::one()) {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if (f_mid < T::zero()) == (f_lo < T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Temperature at which `B(T, σ = 0)` changes sign, with `ν = 1` in the
/// witness: the root of `ξ²(T) = 1/2`.
pub fn analytic_boundary_t<T: Real>(lambda: T) -> Result<T> {
    let half = T::lit(0.5);
    let cold = thermal_xi2(lambda, T::zero())?;
    if cold > half {
        return Err(Error::NoRoot("witness is not negative at zero temperature"));
    }
    if cold == half {
        return Ok(T::zero());
    }
    let g = |t: T| thermal_xi2(lambda, t).map(|x| x - half).unwrap_or(T::infinity());
    let mut hi = T::one();
    while g(hi) < T::zero() {
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return Err(Error::NoRoot("temperature bracket diverged"));
        }
    }
    Ok(bisect(T::zero(), hi, g))
}

/// Detector resolution at which `B(T = 0, σ)` changes sign, using the
/// branch's semiclassical `ξ²` and `ν` and `ν̃ = ν e^{-k²σ²/2}`.
pub fn analytic_boundary_sigma<T: Real>(lambda: T, k_fringe: T) -> Result<T> {
    if !(k_fringe > T::zero()) {
        return Err(Error::OutOfRange { what: "fringe wavevector", value: k_fringe.to_f64().unwrap_or(f64::NAN) });
    }
    let p = semiclassical_ab(lambda)?;
    if p.b_param >= T::zero() {
        return Err(Error::NoRoot("witness is not negative without blur"));
    }
    // B -> ξ² - 1/4 as ν̃ -> 0
    if p.xi2 <= T::lit(0.25) {
        return Err(Error::NoRoot("witness stays negative for every blur"));
    }
    let g = |sigma: T| {
        let nu = blur_visibility(p.nu, k_fringe, sigma);
        if nu <= T::zero() {
            return p.xi2 - T::lit(0.25);
        }
        bell_witness(p.xi2, nu).unwrap_or(T::infinity())
    };
    let mut hi = T::one() / k_fringe;
    while g(hi) < T::zero() {
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return Err(Error::NoRoot("blur bracket diverged"));
        }
    }
    Ok(bisect(T::zero(), hi, g))
}
