//! Collective angular momentum in the symmetric Dicke manifold `|j = N/2, m>`.
//!
//! States carry real amplitudes indexed by `k = m + j`, so `k = 0` is
//! `m = -j` and `k = N` is `m = +j`. Every operator needed here couples
//! at most `m` to `m ± 2`, which keeps moment evaluation linear in `N`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Ladder `|j, -j>, ..., |j, +j>` for `N` two-mode bosons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DickeBasis {
    n: usize,
}

impl DickeBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParticleCount(n));
        }
        Ok(Self { n })
    }

    pub fn particle_count(&self) -> usize {
        self.n
    }

    /// Number of basis states, `N + 1`.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn j<T: Real>(&self) -> T {
        T::from_count(self.n) / T::lit(2.0)
    }

    /// `m` of basis index `k`, computed as `(2k - N) / 2` so half-integers are exact.
    pub fn m<T: Real>(&self, k: usize) -> T {
        (T::from_count(2 * k) - T::from_count(self.n)) / T::lit(2.0)
    }

    pub fn m_values<T: Real>(&self) -> Vec<T> {
        (0..self.dim()).map(|k| self.m(k)).collect()
    }

    /// Basis index of the magnetic number `m`, which must be one of `m_values`.
    pub fn index_of<T: Real>(&self, m: T) -> Result<usize> {
        let twice = (m * T::lit(2.0) + T::from_count(self.n)).to_f64().unwrap_or(f64::NAN);
        let rounded = twice.round();
        if !twice.is_finite() || (twice - rounded).abs() > 1e-9 || rounded < 0.0 || rounded > (2 * self.n) as f64 {
            return Err(Error::OutOfRange { what: "magnetic number m", value: m.to_f64().unwrap_or(f64::NAN) });
        }
        let two_k = rounded as usize;
        if !two_k.is_multiple_of(2) {
            return Err(Error::OutOfRange { what: "magnetic number m", value: m.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(two_k / 2)
    }

    /// Coupling `c_k = <m+1| J_x |m> = ½ sqrt(j(j+1) - m(m+1))` for `k < N`.
    ///
    /// Evaluated as `½ sqrt((N - k)(k + 1))`, the same product in integer form.
    #[inline]
    pub fn ladder<T: Real>(&self, k: usize) -> T {
        debug_assert!(k < self.n);
        T::lit(0.5) * (T::from_count(self.n - k) * T::from_count(k + 1)).sqrt()
    }

    pub fn ladders<T: Real>(&self) -> Vec<T> {
        (0..self.n).map(|k| self.ladder(k)).collect()
    }
}

/// `c_m` coupling `|m>` and `|m+1>`; both must lie on the ladder.
pub fn ladder_coefficient<T: Real>(basis: &DickeBasis, m: T) -> Result<T> {
    let k = basis.index_of(m)?;
    if k >= basis.particle_count() {
        return Err(Error::OutOfRange { what: "ladder index m (m+1 leaves the ladder)", value: m.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(basis.ladder(k))
}

/// Normalized real state in a Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState<T> {
    basis: DickeBasis,
    coeffs: Vec<T>,
}

impl<T: Real> SpinState<T> {
    /// Wraps `coeffs`, rejecting vectors whose squared norm is off by more than 1e-9.
    pub fn new(basis: DickeBasis, coeffs: Vec<T>) -> Result<Self> {
        check_dim(&basis, &coeffs)?;
        check_normalized(&coeffs)?;
        Ok(Self { basis, coeffs })
    }

    /// Normalizes `coeffs` before wrapping them.
    pub fn normalized(basis: DickeBasis, mut coeffs: Vec<T>) -> Result<Self> {
        check_dim(&basis, &coeffs)?;
        let norm = coeffs.iter().map(|&c| c * c).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sq: (norm * norm).to_f64().unwrap_or(f64::NAN) });
        }
        coeffs.iter_mut().for_each(|c| *c = *c / norm);
        Ok(Self { basis, coeffs })
    }

    /// `|j, m>` for the basis index `k`.
    pub fn basis_vector(basis: DickeBasis, k: usize) -> Result<Self> {
        if k >= basis.dim() {
            return Err(Error::OutOfRange { what: "basis index", value: k as f64 });
        }
        let mut coeffs = vec![T::zero(); basis.dim()];
        coeffs[k] = T::one();
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &DickeBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Image under `m -> -m`.
    pub fn reflected(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { basis: self.basis, coeffs }
    }

    pub fn negated(&self) -> Self {
        Self { basis: self.basis, coeffs: self.coeffs.iter().map(|&c| -c).collect() }
    }

    pub fn moments(&self) -> Moments<T> {
        moments_unchecked(&self.basis, &self.coeffs)
    }
}

fn check_dim<T>(basis: &DickeBasis, coeffs: &[T]) -> Result<()> {
    if coeffs.len() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: coeffs.len() });
    }
    Ok(())
}

fn check_normalized<T: Real>(coeffs: &[T]) -> Result<()> {
    let norm_sq: T = coeffs.iter().map(|&c| c * c).sum();
    if !((norm_sq - T::one()).abs() <= T::tolerance(1e-9)) {
        return Err(Error::NotNormalized { norm_sq: norm_sq.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}

/// First and second moments of `(J_x, J_y, J_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub jx: T,
    pub jy: T,
    pub jz: T,
    pub jx2: T,
    pub jy2: T,
    pub jz2: T,
}

impl<T: Real> Moments<T> {
    pub fn zero() -> Self {
        let z = T::zero();
        Self { jx: z, jy: z, jz: z, jx2: z, jy2: z, jz2: z }
    }

    /// `<J_x^2> + <J_y^2> + <J_z^2> - j(j+1)`.
    pub fn casimir_defect(&self, basis: &DickeBasis) -> T {
        let j: T = basis.j();
        self.jx2 + self.jy2 + self.jz2 - j * (j + T::one())
    }

    fn scaled_add(self, weight: T, other: &Self) -> Self {
        Self {
            jx: self.jx + weight * other.jx,
            jy: self.jy + weight * other.jy,
            jz: self.jz + weight * other.jz,
            jx2: self.jx2 + weight * other.jx2,
            jy2: self.jy2 + weight * other.jy2,
            jz2: self.jz2 + weight * other.jz2,
        }
    }

    pub fn as_array(&self) -> [T; 6] {
        [self.jx, self.jy, self.jz, self.jx2, self.jy2, self.jz2]
    }

    /// Moments after `exp(-i π/2 J_x)`: `J_y -> -J_z`, `J_z -> J_y`.
    pub fn rotate_pi2_about_x(&self) -> Self {
        Self {
            jx: self.jx,
            jy: -self.jz,
            jz: self.jy,
            jx2: self.jx2,
            jy2: self.jz2,
            jz2: self.jy2,
        }
    }
}

/// Moments of `coeffs`, which must be a normalized vector on `basis`.
pub fn compute_moments<T: Real>(basis: &DickeBasis, coeffs: &[T]) -> Result<Moments<T>> {
    check_dim(basis, coeffs)?;
    check_normalized(coeffs)?;
    Ok(moments_unchecked(basis, coeffs))
}

fn moments_unchecked<T: Real>(basis: &DickeBasis, psi: &[T]) -> Moments<T> {
    let n = basis.particle_count();
    let j: T = basis.j();

    // <Jz> pairs m with -m so that reflection-symmetric states give exactly zero.
    let mut jz = T::zero();
    for k in 0..basis.dim() / 2 {
        let mirror = n - k;
        let m_hi: T = basis.m(mirror);
        jz = jz + m_hi * (psi[mirror] * psi[mirror] - psi[k] * psi[k]);
    }

    let mut jz2 = T::zero();
    for (k, &a) in psi.iter().enumerate() {
        let m: T = basis.m(k);
        jz2 = jz2 + m * m * a * a;
    }

    let mut jx = T::zero();
    let mut two_step = T::zero();
    for k in 0..n {
        let c: T = basis.ladder(k);
        jx = jx + c * psi[k] * psi[k + 1];
        if k + 1 < n {
            let d = c * basis.ladder::<T>(k + 1);
            two_step = two_step + d * psi[k] * psi[k + 2];
        }
    }
    let jx = T::lit(2.0) * jx;

    // (J+J- + J-J+)/4 = (J^2 - Jz^2)/2 and (J+^2 + J-^2)/4 contributes 2 Σ d_k ψ_k ψ_{k+2}.
    let transverse = T::lit(0.5) * (j * (j + T::one()) - jz2);
    let cross = T::lit(2.0) * two_step;
    Moments {
        jx,
        jy: T::zero(),
        jz,
        jx2: transverse + cross,
        jy2: transverse - cross,
        jz2,
    }
}

/// Convex combination of pure states, i.e. a density matrix diagonal in the listed states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble<T> {
    members: Vec<(T, SpinState<T>)>,
}

impl<T: Real> StateEnsemble<T> {
    /// Weights must be nonnegative and sum to one within 1e-12.
    pub fn new(members: Vec<(T, SpinState<T>)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let basis = *members[0].1.basis();
        let mut sum = T::zero();
        for (index, (w, state)) in members.iter().enumerate() {
            if !(*w >= T::zero()) {
                return Err(Error::NegativeWeight { index, weight: w.to_f64().unwrap_or(f64::NAN) });
            }
            if *state.basis() != basis {
                return Err(Error::DimensionMismatch { expected: basis.dim(), got: state.basis().dim() });
            }
            sum = sum + *w;
        }
        if !((sum - T::one()).abs() <= T::tolerance(1e-12)) {
            return Err(Error::WeightsNotNormalized { sum: sum.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { members })
    }

    pub fn pure(state: SpinState<T>) -> Self {
        Self { members: vec![(T::one(), state)] }
    }

    pub fn members(&self) -> &[(T, SpinState<T>)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn basis(&self) -> &DickeBasis {
        self.members[0].1.basis()
    }

    /// Weighted moments, accumulated in member order.
    pub fn moments(&self) -> Moments<T> {
        self.members.iter().fold(Moments::zero(), |acc, (w, s)| acc.scaled_add(*w, &s.moments()))
    }
}

pub fn ensemble_moments<T: Real>(ensemble: &StateEnsemble<T>) -> Moments<T> {
    ensemble.moments()
}
