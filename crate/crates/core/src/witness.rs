//! Fringe visibility, phase squeezing, fit sensitivity and the Bell
//! correlation witness, all computed from collective-spin moments.
//!
//! With `ν = 2|<J_x>|/N` and `ξ² = N <J_y²> / <J_x>²`:
//!
//! * `Δ²φ = (ξ² + sqrt(1-ν²)/ν²) / N`
//! * `A = N Δ²φ - 1`
//! * `B = ξ² + (sqrt(1-ν²) - 1) / (2ν²)`, negative for Bell-correlated states
//! * `B - A = f(ν) = 1 - (sqrt(1-ν²) + 1) / (2ν²)`

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin::Moments;

/// Tolerance of the `B = A + f(ν)` identity.
pub const RELATION_TOLERANCE: f64 = 1e-10;

/// Grid size of the coarse scan in [`minimize_bell_direct`].
pub const DIRECT_GRID_POINTS: usize = 1024;

/// Pre-rotation applied to the moments before the witness is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    None,
    /// `exp(-i π/2 J_x)`: turns number squeezing into phase squeezing.
    HalfPiAboutX,
}

impl Rotation {
    /// The rotation is used for repulsive interactions (`Λ > 0`) only.
    pub fn for_interaction<T: Real>(lambda: T) -> Self {
        if lambda > T::zero() {
            Rotation::HalfPiAboutX
        } else {
            Rotation::None
        }
    }

    pub fn apply<T: Real>(self, moments: &Moments<T>) -> Moments<T> {
        match self {
            Rotation::None => *moments,
            Rotation::HalfPiAboutX => moments.rotate_pi2_about_x(),
        }
    }
}

fn check_nu<T: Real>(nu: T) -> Result<()> {
    if nu == T::zero() {
        return Err(Error::ZeroVisibility);
    }
    if !(nu > T::zero() && nu <= T::one()) {
        return Err(Error::OutOfRange { what: "visibility", value: nu.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}

/// `sqrt(1 - ν²)`, factored to keep precision near `ν = 1`.
#[inline]
fn cosine_complement<T: Real>(nu: T) -> T {
    ((T::one() - nu) * (T::one() + nu)).max(T::zero()).sqrt()
}

/// `ν = 2|<J_x>|/N`, clipped to 1 against rounding.
pub fn visibility<T: Real>(moments: &Moments<T>, n: usize) -> T {
    (T::lit(2.0) * moments.jx.abs() / T::from_count(n)).min(T::one())
}

/// `ξ² = N <J_y²> / <J_x>²`.
pub fn phase_squeezing<T: Real>(moments: &Moments<T>, n: usize) -> Result<T> {
    if moments.jx == T::zero() {
        return Err(Error::UndefinedSqueezing);
    }
    Ok(T::from_count(n) * moments.jy2 / (moments.jx * moments.jx))
}

/// Variance of the fitted phase, `(ξ² + sqrt(1-ν²)/ν²) / N`.
pub fn sensitivity<T: Real>(xi2: T, nu: T, n: usize) -> Result<T> {
    check_nu(nu)?;
    Ok((xi2 + cosine_complement(nu) / (nu * nu)) / T::from_count(n))
}

/// `A = ξ² + (sqrt(1-ν²) - ν²)/ν²`; negative below shot noise.
pub fn param_a<T: Real>(xi2: T, nu: T) -> Result<T> {
    check_nu(nu)?;
    let nu2 = nu * nu;
    Ok(xi2 + (cosine_complement(nu) - nu2) / nu2)
}

/// `B = ξ² + (sqrt(1-ν²) - 1)/(2ν²)`; negative values witness Bell correlations.
pub fn bell_witness<T: Real>(xi2: T, nu: T) -> Result<T> {
    check_nu(nu)?;
    Ok(xi2 + (cosine_complement(nu) - T::one()) / (T::lit(2.0) * nu * nu))
}

/// `f(ν) = 1 - (sqrt(1-ν²) + 1)/(2ν²)`, the gap `B - A`.
pub fn visibility_offset<T: Real>(nu: T) -> Result<T> {
    check_nu(nu)?;
    Ok(T::one() - (cosine_complement(nu) + T::one()) / (T::lit(2.0) * nu * nu))
}

/// Expectation of the Bell operator at angle `θ`, written with `<J_y> = 0`:
/// `2N cos²(θ/2) - 4 <J_x> cos(θ/2) + 8 sin²(θ/2) <J_y²>`.
pub fn bell_theta<T: Real>(n: usize, jx: T, jy2: T, theta: T) -> T {
    let (s, c) = (theta / T::lit(2.0)).sin_cos();
    T::lit(2.0) * T::from_count(n) * c * c - T::lit(4.0) * jx * c + T::lit(8.0) * s * s * jy2
}

/// Stationary angle `cos(θ₀/2) = ν / (2(1 - ξ²ν²))`.
///
/// Returns `(θ₀, true)` when that point is an interior minimum of
/// [`bell_theta`] on `[0, π]`, and `(0, false)` when the minimum sits on
/// the `θ = 0` boundary.
pub fn optimal_theta<T: Real>(nu: T, xi2: T) -> (T, bool) {
    let denom = T::one() - xi2 * nu * nu;
    if denom > T::zero() {
        let cos_half = nu / (T::lit(2.0) * denom);
        if cos_half <= T::one() {
            return (T::lit(2.0) * cos_half.acos(), true);
        }
    }
    (T::zero(), false)
}

/// Direct numerical minimum of [`bell_theta`] over `θ ∈ [0, π]`: a 1024-point
/// grid followed by golden-section refinement to 1e-10 in `θ`.
pub fn minimize_bell_direct<T: Real>(n: usize, moments: &Moments<T>) -> (T, T) {
    let f = |theta: T| bell_theta(n, moments.jx, moments.jy2, theta);
    let pi = T::PI();
    let step = pi / T::from_count(DIRECT_GRID_POINTS - 1);
    let mut best = 0usize;
    let mut best_val = f(T::zero());
    for i in 1..DIRECT_GRID_POINTS {
        let v = f(step * T::from_count(i));
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let mut a = step * T::from_count(best.saturating_sub(1));
    let mut b = (step * T::from_count(best + 1)).min(pi);
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let tol = T::tolerance(1e-10);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let mut theta = T::lit(0.5) * (a + b);
    let mut value = f(theta);
    // The refinement bracket may touch an endpoint of [0, π].
    for edge in [T::zero(), pi] {
        let v = f(edge);
        if v < value {
            theta = edge;
            value = v;
        }
    }
    (theta, value)
}

/// Every witness quantity for one state or ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessReport<T> {
    pub nu: T,
    pub xi2: T,
    pub var_phi: T,
    pub a_param: T,
    pub b_param: T,
    pub theta0: T,
    pub interior_minimum: bool,
    pub rotated: bool,
    pub n: usize,
}

impl<T: Real> WitnessReport<T> {
    /// Builds the report from raw moments after the requested rotation.
    pub fn from_moments(moments: &Moments<T>, n: usize, rotation: Rotation) -> Result<Self> {
        let m = rotation.apply(moments);
        let nu = visibility(&m, n);
        if nu == T::zero() {
            return Err(Error::ZeroVisibility);
        }
        let xi2 = phase_squeezing(&m, n)?;
        Self::from_parts(xi2, nu, n, rotation == Rotation::HalfPiAboutX)
    }

    /// Builds the report from `ξ²` and a (possibly blurred) visibility.
    pub fn from_parts(xi2: T, nu: T, n: usize, rotated: bool) -> Result<Self> {
        let var_phi = sensitivity(xi2, nu, n)?;
        let a_param = param_a(xi2, nu)?;
        let b_param = bell_witness(xi2, nu)?;
        let (theta0, interior_minimum) = optimal_theta(nu, xi2);
        Ok(Self { nu, xi2, var_phi, a_param, b_param, theta0, interior_minimum, rotated, n })
    }
}

/// `|B - A - f(ν)| ≤ 1e-10`.
pub fn relation_check<T: Real>(report: &WitnessReport<T>) -> bool {
    match visibility_offset(report.nu) {
        Ok(f) => (report.b_param - report.a_param - f).abs() <= T::tolerance(RELATION_TOLERANCE),
        Err(_) => false,
    }
}
