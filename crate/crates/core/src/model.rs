//! Two-mode Bose-Josephson Hamiltonian `H = -J_x + (Λ/N) J_z² + δ J_z`
//! in the Dicke basis, in units of the tunnelling energy.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin::{DickeBasis, SpinState, StateEnsemble};
use crate::tridiag::{check_orthonormal, SymTridiag};

/// Largest particle count accepted by [`full_spectrum`] unless overridden.
pub const DEFAULT_SPECTRUM_CAP: usize = 4000;

/// Thermal weights below this fraction of the ground-state weight are dropped.
pub const THERMAL_WEIGHT_FLOOR: f64 = 1e-18;

/// `(N, Λ, δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub n: usize,
    pub lambda: T,
    pub delta: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(n: usize, lambda: T, delta: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParticleCount(n));
        }
        if !lambda.is_finite() {
            return Err(Error::OutOfRange { what: "interaction Λ", value: lambda.to_f64().unwrap_or(f64::NAN) });
        }
        if !delta.is_finite() {
            return Err(Error::OutOfRange { what: "energy mismatch δ", value: delta.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { n, lambda, delta })
    }

    pub fn basis(&self) -> DickeBasis {
        DickeBasis::new(self.n).expect("validated particle count")
    }

    pub fn with_delta(&self, delta: T) -> Self {
        Self { delta, ..*self }
    }
}

/// Matrix of `H` in the `J_z` eigenbasis.
pub fn build_hamiltonian<T: Real>(params: &ModelParams<T>) -> SymTridiag<T> {
    let basis = params.basis();
    let scale = params.lambda / T::from_count(params.n);
    let diag = (0..basis.dim())
        .map(|k| {
            let m: T = basis.m(k);
            scale * m * m + params.delta * m
        })
        .collect();
    let offdiag = (0..params.n).map(|k| -basis.ladder::<T>(k)).collect();
    SymTridiag::new(diag, offdiag).expect("finite Hamiltonian entries")
}

/// Eigenpairs of `H` in ascending energy order. May hold only the lowest part
/// of the spectrum; [`Spectrum::is_complete`] tells which.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    energies: Vec<T>,
    states: Vec<SpinState<T>>,
    dim: usize,
    /// Every eigenvalue `≤ reach` is present.
    reach: T,
}

impl<T: Real> Spectrum<T> {
    /// Assembles a spectrum from precomputed eigenpairs, re-running the
    /// residual and orthonormality checks against `params`. `reach` claims
    /// that every eigenvalue up to it is present; the claim is verified by
    /// a Sturm count. A full set of eigenpairs ignores it.
    pub fn from_parts(params: &ModelParams<T>, energies: Vec<T>, vectors: Vec<Vec<T>>, reach: T) -> Result<Self> {
        let h = build_hamiltonian(params);
        if energies.is_empty() || energies.len() != vectors.len() || energies.len() > h.dim() {
            return Err(Error::DimensionMismatch { expected: energies.len(), got: vectors.len() });
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::OutOfRange { what: "energy ordering", value: f64::NAN });
        }
        h.check_eigenpairs(&energies, &vectors)?;
        let reach = if energies.len() == h.dim() {
            T::infinity()
        } else if reach.is_finite() && h.count_below(reach) <= energies.len() {
            reach
        } else {
            return Err(Error::OutOfRange { what: "spectrum reach", value: reach.to_f64().unwrap_or(f64::NAN) });
        };
        let basis = params.basis();
        let states = vectors.into_iter().map(|v| SpinState::new(basis, v)).collect::<Result<_>>()?;
        Ok(Self { energies, states, dim: h.dim(), reach })
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn states(&self) -> &[SpinState<T>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.energies.len() == self.dim
    }

    pub fn ground_energy(&self) -> T {
        self.energies[0]
    }

    /// Energy up to which the spectrum is complete.
    pub fn reach(&self) -> T {
        self.reach
    }
}

/// Lowest eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState<T> {
    pub energy: T,
    pub state: SpinState<T>,
}

/// Fixes the arbitrary sign of an eigenvector: positive overlap with the
/// all-positive vector, else first significant coefficient positive.
fn fix_sign<T: Real>(v: &mut [T]) {
    let sum: T = v.iter().copied().sum();
    let max = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let negate = if sum.abs() > T::tolerance(1e-12) * max.max(T::one()) {
        sum < T::zero()
    } else {
        v.iter().find(|x| x.abs() > T::tolerance(1e-12) * max).is_some_and(|x| *x < T::zero())
    };
    if negate {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Ground state by bisection plus inverse iteration.
///
/// At `δ = 0` the problem is reduced to the reflection-even sector, which
/// holds the (Perron, hence even) ground state; this keeps the result
/// well-defined when the lowest doublet is degenerate to machine precision.
pub fn ground_state<T: Real>(params: &ModelParams<T>) -> Result<GroundState<T>> {
    let h = build_hamiltonian(params);
    let basis = params.basis();
    let mut v = if params.delta == T::zero() && params.n >= 2 {
        let (block, expand) = even_sector(&h, params.n);
        let e0 = block.eigenvalue_bisect(0)?;
        let u = block.inverse_iteration(&[e0])?.pop().expect("one vector");
        expand(&u)
    } else {
        let e0 = h.eigenvalue_bisect(0)?;
        h.inverse_iteration(&[e0])?.pop().expect("one vector")
    };
    let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    v.iter_mut().for_each(|x| *x = *x / norm);
    fix_sign(&mut v);
    // Rayleigh quotient is accurate to O(residual²).
    let hv = h.apply(&v);
    let energy: T = hv.iter().zip(&v).map(|(&a, &b)| a * b).sum();
    h.check_eigenpairs(&[energy], std::slice::from_ref(&v))?;
    Ok(GroundState { energy, state: SpinState::new(basis, v)? })
}

/// Tridiagonal block of `H` on reflection-even vectors, plus the map back
/// to full coefficients. Valid only for `δ = 0`.
fn even_sector<T: Real>(h: &SymTridiag<T>, n: usize) -> (SymTridiag<T>, impl Fn(&[T]) -> Vec<T>) {
    let d = h.diag();
    let e = h.offdiag();
    let sqrt2 = T::lit(2.0).sqrt();
    let (diag, off, odd) = if n.is_multiple_of(2) {
        // e_0 = |m=0>, e_p = (|p> + |-p>)/√2
        let c = n / 2;
        let diag: Vec<T> = (0..=c).map(|p| d[c + p]).collect();
        let off: Vec<T> = (0..c).map(|p| if p == 0 { sqrt2 * e[c] } else { e[c + p] }).collect();
        (diag, off, false)
    } else {
        // e_p = (|p+½> + |-(p+½)>)/√2; the central coupling folds onto the diagonal.
        let c = (n - 1) / 2;
        let half = n.div_ceil(2);
        let diag: Vec<T> = (0..half).map(|p| if p == 0 { d[c + 1] + e[c] } else { d[c + 1 + p] }).collect();
        let off: Vec<T> = (0..half - 1).map(|p| e[c + 1 + p]).collect();
        (diag, off, true)
    };
    let block = SymTridiag::new(diag, off).expect("finite block");
    let expand = move |u: &[T]| {
        let mut v = vec![T::zero(); n + 1];
        let inv = T::one() / T::lit(2.0).sqrt();
        if odd {
            let c = (n - 1) / 2;
            for (p, &x) in u.iter().enumerate() {
                v[c + 1 + p] = x * inv;
                v[c - p] = x * inv;
            }
        } else {
            let c = n / 2;
            v[c] = u[0];
            for (p, &x) in u.iter().enumerate().skip(1) {
                v[c + p] = x * inv;
                v[c - p] = x * inv;
            }
        }
        v
    };
    (block, expand)
}

/// Every eigenpair, via implicit-shift QL with accumulated rotations.
pub fn full_spectrum<T: Real>(params: &ModelParams<T>) -> Result<Spectrum<T>> {
    full_spectrum_capped(params, DEFAULT_SPECTRUM_CAP)
}

pub fn full_spectrum_capped<T: Real>(params: &ModelParams<T>, cap: usize) -> Result<Spectrum<T>> {
    if params.n > cap {
        return Err(Error::SpectrumCap { n: params.n, cap });
    }
    let h = build_hamiltonian(params);
    let (energies, mut vectors) = h.eigen_decompose()?;
    vectors.iter_mut().for_each(|v| fix_sign(v));
    h.check_eigenpairs(&energies, &vectors)?;
    let basis = params.basis();
    let states = vectors.into_iter().map(|v| SpinState::new(basis, v)).collect::<Result<_>>()?;
    Ok(Spectrum { energies, states, dim: h.dim(), reach: T::infinity() })
}

/// All eigenpairs with `E ≤ E₀ + window`. Falls back to the full QL solve
/// when more than half of the spectrum is requested.
pub fn low_spectrum<T: Real>(params: &ModelParams<T>, window: T) -> Result<Spectrum<T>> {
    if !(window >= T::zero()) {
        return Err(Error::OutOfRange { what: "energy window", value: window.to_f64().unwrap_or(f64::NAN) });
    }
    let h = build_hamiltonian(params);
    let dim = h.dim();
    let e0 = h.eigenvalue_bisect(0)?;
    let count = if window.is_finite() { h.count_below(e0 + window).max(1) } else { dim };
    if 2 * count > dim {
        return full_spectrum_capped(params, usize::MAX);
    }
    let mut energies = Vec::with_capacity(count);
    energies.push(e0);
    for k in 1..count {
        energies.push(h.eigenvalue_bisect(k)?);
    }
    let mut vectors = h.inverse_iteration(&energies)?;
    vectors.iter_mut().for_each(|v| fix_sign(v));
    h.check_eigenpairs(&energies, &vectors)?;
    let basis = params.basis();
    let states = vectors.into_iter().map(|v| SpinState::new(basis, v)).collect::<Result<_>>()?;
    Ok(Spectrum { energies, states, dim, reach: e0 + window })
}

/// Energy window (above `E₀`) that a thermal ensemble at `temperature` needs.
pub fn thermal_window<T: Real>(temperature: T) -> T {
    temperature * T::lit(-THERMAL_WEIGHT_FLOOR.ln())
}

/// Boltzmann weights `e^{-(E_n - E_0)/T}`, normalized; `T = 0` puts all weight on `E_0`.
pub fn boltzmann_weights<T: Real>(energies: &[T], temperature: T) -> Result<Vec<T>> {
    if !(temperature >= T::zero()) {
        return Err(Error::NegativeTemperature(temperature.to_f64().unwrap_or(f64::NAN)));
    }
    let e0 = energies[0];
    if temperature == T::zero() {
        let mut w = vec![T::zero(); energies.len()];
        w[0] = T::one();
        return Ok(w);
    }
    let raw: Vec<T> = energies.iter().map(|&e| (-(e - e0) / temperature).exp()).collect();
    let z: T = raw.iter().copied().sum();
    Ok(raw.into_iter().map(|w| w / z).collect())
}

/// Thermal state `ρ ∝ Σ_n e^{-E_n/T} |n><n|` at dimensionless temperature `k_B T / E_J`.
pub fn thermal_ensemble<T: Real>(params: &ModelParams<T>, temperature: T) -> Result<StateEnsemble<T>> {
    if !(temperature >= T::zero()) {
        return Err(Error::NegativeTemperature(temperature.to_f64().unwrap_or(f64::NAN)));
    }
    if temperature == T::zero() {
        return Ok(StateEnsemble::pure(ground_state(params)?.state));
    }
    let spectrum = low_spectrum(params, thermal_window(temperature))?;
    thermal_from_spectrum(&spectrum, temperature)
}

/// Thermal ensemble from a precomputed (possibly partial) spectrum.
///
/// A partial spectrum must reach `E₀ + thermal_window(T)`; weights beyond
/// that are below [`THERMAL_WEIGHT_FLOOR`] and are dropped.
pub fn thermal_from_spectrum<T: Real>(spectrum: &Spectrum<T>, temperature: T) -> Result<StateEnsemble<T>> {
    if !(temperature >= T::zero()) {
        return Err(Error::NegativeTemperature(temperature.to_f64().unwrap_or(f64::NAN)));
    }
    let energies = spectrum.energies();
    let keep = if spectrum.is_complete() {
        energies.len()
    } else {
        let limit = energies[0] + thermal_window(temperature);
        if spectrum.reach() < limit {
            return Err(Error::OutOfRange { what: "temperature beyond the stored spectrum", value: temperature.to_f64().unwrap_or(f64::NAN) });
        }
        energies.iter().take_while(|&&e| e <= limit).count().max(1)
    };
    let weights = boltzmann_weights(&energies[..keep], temperature)?;
    let members = weights
        .into_iter()
        .zip(spectrum.states().iter().cloned())
        .filter(|(w, _)| *w > T::zero())
        .collect::<Vec<_>>();
    let total: T = members.iter().map(|(w, _)| *w).sum();
    let members = members.into_iter().map(|(w, s)| (w / total, s)).collect();
    StateEnsemble::new(members)
}

/// Orthonormality of the states in a spectrum, to 1e-8.
pub fn check_spectrum<T: Real>(params: &ModelParams<T>, spectrum: &Spectrum<T>) -> Result<()> {
    let h = build_hamiltonian(params);
    let vectors: Vec<Vec<T>> = spectrum.states().iter().map(|s| s.coeffs().to_vec()).collect();
    h.check_eigenpairs(spectrum.energies(), &vectors)?;
    check_orthonormal(&vectors, T::tolerance(1e-8))
}
