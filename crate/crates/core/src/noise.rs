//! Noise channels: shot-to-shot fluctuations of the energy mismatch δ,
//! finite temperature, and finite detector resolution.

use crate::error::{Error, Result};
use crate::model::{ground_state, thermal_ensemble, ModelParams};
use crate::scalar::Real;
use crate::spin::{Moments, SpinState, StateEnsemble};
use crate::tridiag::SymTridiag;
use crate::witness::bell_witness;

/// Half-range nodes used before any escalation.
pub const DEFAULT_QUADRATURE_ORDER: usize = 20;
/// Escalation stops once this half-range order has been reached.
pub const MAX_QUADRATURE_ORDER: usize = 160;
/// Node doubling must change each moment by less than this relative amount.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
/// Per-panel orders of the graded fallback rule, tried in turn.
pub const GRADED_PANEL_ORDERS: [usize; 3] = [8, 16, 32];
const GRADED_PANELS: usize = 24;
const GRADED_REACH: f64 = 6.5;

/// Noise settings; all widths are nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig<T> {
    pub sigma_delta: T,
    pub temperature: T,
    pub sigma_detector: T,
    pub k_fringe: T,
}

impl<T: Real> NoiseConfig<T> {
    pub fn new(sigma_delta: T, temperature: T, sigma_detector: T, k_fringe: T) -> Result<Self> {
        for (what, v) in [
            ("σ_δ", sigma_delta),
            ("temperature", temperature),
            ("detector resolution", sigma_detector),
            ("fringe wavevector", k_fringe),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::OutOfRange { what, value: v.to_f64().unwrap_or(f64::NAN) });
            }
        }
        if sigma_detector > T::zero() && k_fringe == T::zero() {
            return Err(Error::OutOfRange { what: "fringe wavevector", value: 0.0 });
        }
        Ok(Self { sigma_delta, temperature, sigma_detector, k_fringe })
    }

    pub fn noiseless() -> Self {
        Self { sigma_delta: T::zero(), temperature: T::zero(), sigma_detector: T::zero(), k_fringe: T::one() }
    }
}

/// Nodes and positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Gauss rule from the three-term recurrence `(alpha, beta)` of its orthonormal
    /// polynomials (Golub-Welsch); `beta[k]` couples degree `k-1` and `k`.
    fn golub_welsch(alpha: Vec<T>, beta: Vec<T>) -> Result<Self> {
        let off = beta.into_iter().skip(1).map(|b| b.sqrt()).collect();
        let jacobi = SymTridiag::new(alpha, off)?;
        let (nodes, vectors) = jacobi.eigen_decompose()?;
        let mut weights: Vec<T> = vectors.iter().map(|v| v[0] * v[0]).collect();
        let total: T = weights.iter().copied().sum();
        weights.iter_mut().for_each(|w| *w = *w / total);
        Ok(Self { nodes, weights })
    }
}

/// Gauss-Hermite rule for the weight `e^{-x²}` on the real line, normalized to unit mass.
pub fn gauss_hermite<T: Real>(order: usize) -> Result<QuadratureRule<T>> {
    if order == 0 {
        return Err(Error::OutOfRange { what: "quadrature order", value: 0.0 });
    }
    let alpha = vec![T::zero(); order];
    let beta = (0..order).map(|k| T::from_count(k) / T::lit(2.0)).collect();
    let mut rule = QuadratureRule::golub_welsch(alpha, beta)?;
    // Exact antisymmetry of nodes; Golub-Welsch is symmetric only to rounding.
    for i in 0..order / 2 {
        let x = T::lit(0.5) * (rule.nodes[order - 1 - i] - rule.nodes[i]);
        let w = T::lit(0.5) * (rule.weights[i] + rule.weights[order - 1 - i]);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        rule.nodes[order / 2] = T::zero();
    }
    Ok(rule)
}

/// Gauss-Legendre rule on `[-1, 1]` with weights summing to 2.
pub fn gauss_legendre<T: Real>(order: usize) -> Result<QuadratureRule<T>> {
    if order == 0 {
        return Err(Error::OutOfRange { what: "quadrature order", value: 0.0 });
    }
    let alpha = vec![T::zero(); order];
    let beta = (0..order)
        .map(|k| {
            let k = T::from_count(k);
            k * k / (T::lit(4.0) * k * k - T::one())
        })
        .collect();
    let mut rule = QuadratureRule::golub_welsch(alpha, beta)?;
    rule.weights.iter_mut().for_each(|w| *w = *w * T::lit(2.0));
    Ok(rule)
}

/// Gauss rule for `e^{-x²}` on `[0, ∞)` (half-range Hermite), unit mass.
///
/// The recurrence is produced by the discretized Stieltjes procedure on a
/// composite Gauss-Legendre grid that covers the support of the weight.
pub fn half_range_hermite<T: Real>(order: usize) -> Result<QuadratureRule<T>> {
    if order == 0 {
        return Err(Error::OutOfRange { what: "quadrature order", value: 0.0 });
    }
    const PANEL_POINTS: usize = 24;
    let panel_width = T::lit(0.25);
    let reach = T::lit(4.0 * order as f64).sqrt() + T::lit(8.0);
    let panels = (reach / panel_width).ceil().to_usize().expect("finite panel count");
    let base = gauss_legendre::<T>(PANEL_POINTS)?;
    let half = panel_width / T::lit(2.0);
    let mut xs = Vec::with_capacity(panels * PANEL_POINTS);
    let mut ws = Vec::with_capacity(panels * PANEL_POINTS);
    for p in 0..panels {
        let mid = panel_width * T::from_count(p) + half;
        for (&t, &w) in base.nodes.iter().zip(&base.weights) {
            let x = mid + half * t;
            xs.push(x);
            ws.push(w * half * (-x * x).exp());
        }
    }

    // Orthonormal Stieltjes/Lanczos recurrence on the discrete measure.
    let mass: T = ws.iter().copied().sum();
    let mut prev = vec![T::zero(); xs.len()];
    let mut cur = vec![T::one() / mass.sqrt(); xs.len()];
    let mut alpha = Vec::with_capacity(order);
    let mut beta = Vec::with_capacity(order);
    beta.push(mass);
    let mut prev_off = T::zero();
    for k in 0..order {
        let a: T = xs.iter().zip(&ws).zip(&cur).map(|((&x, &w), &p)| w * x * p * p).sum();
        alpha.push(a);
        if k + 1 == order {
            break;
        }
        let mut next: Vec<T> = xs.iter().zip(&cur).zip(&prev).map(|((&x, &p), &q)| (x - a) * p - prev_off * q).collect();
        let norm = next.iter().zip(&ws).map(|(&r, &w)| w * r * r).sum::<T>().sqrt();
        next.iter_mut().for_each(|r| *r = *r / norm);
        beta.push(norm * norm);
        prev_off = norm;
        prev = std::mem::replace(&mut cur, next);
    }
    QuadratureRule::golub_welsch(alpha, beta)
}

/// Composite Gauss-Legendre rule for `e^{-x²}` on `[0, ∞)`, unit mass, on
/// panels that halve in width towards 0 (smallest ≈ 4e-7). Converges for
/// integrands whose structure near 0 is much finer than the Gaussian width,
/// where a single Gauss rule only converges algebraically.
pub fn graded_half_range<T: Real>(panel_order: usize) -> Result<QuadratureRule<T>> {
    let base = gauss_legendre::<T>(panel_order)?;
    let reach = T::lit(GRADED_REACH);
    let edge = |k: usize| if k == 0 { T::zero() } else { reach / T::lit(2.0).powi((GRADED_PANELS - k) as i32) };
    let mut nodes = Vec::with_capacity(GRADED_PANELS * panel_order);
    let mut weights = Vec::with_capacity(GRADED_PANELS * panel_order);
    for k in 0..GRADED_PANELS {
        let (a, b) = (edge(k), edge(k + 1));
        let half = (b - a) / T::lit(2.0);
        for (&t, &w) in base.nodes.iter().zip(&base.weights) {
            let x = a + half * (t + T::one());
            nodes.push(x);
            weights.push(w * half * (-x * x).exp());
        }
    }
    let mass: T = weights.iter().copied().sum();
    weights.iter_mut().for_each(|w| *w = *w / mass);
    Ok(QuadratureRule { nodes, weights })
}

/// Symmetric rule on the real line for the Gaussian weight built from the
/// half-range rule: nodes `±x_i`, each carrying half of `w_i`. Exact for
/// even integrands that are smooth on `x ≥ 0`, including ones with a kink at 0.
pub fn symmetric_half_range_hermite<T: Real>(order: usize) -> Result<QuadratureRule<T>> {
    let half = half_range_hermite::<T>(order)?;
    let mut nodes = Vec::with_capacity(2 * order);
    let mut weights = Vec::with_capacity(2 * order);
    for (&x, &w) in half.nodes.iter().zip(&half.weights) {
        nodes.push(x);
        weights.push(w / T::lit(2.0));
        nodes.push(-x);
        weights.push(w / T::lit(2.0));
    }
    Ok(QuadratureRule { nodes, weights })
}

/// δ-averaged ensemble with the convergence diagnostics of its quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMixture<T> {
    pub ensemble: StateEnsemble<T>,
    /// Half-range nodes finally used.
    pub order: usize,
    /// Whether the graded fallback rule replaced the Gauss rule.
    pub graded: bool,
    /// Whether doubling the order changed every moment by < 1e-6 relative.
    pub converged: bool,
    pub max_relative_change: T,
}

impl<T: Real> DeltaMixture<T> {
    pub fn moments(&self) -> Moments<T> {
        self.ensemble.moments()
    }
}

/// Mixture options for [`delta_mixture_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureOptions {
    pub order: usize,
    pub max_order: usize,
    pub tolerance: f64,
    /// Run the node-doubling check (and escalate on failure).
    pub check_convergence: bool,
}

impl Default for MixtureOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_QUADRATURE_ORDER,
            max_order: MAX_QUADRATURE_ORDER,
            tolerance: QUADRATURE_TOLERANCE,
            check_convergence: true,
        }
    }
}

/// Gaussian average over δ of ground states, `ρ ∝ ∫ dδ e^{-δ²/(2σ²)} |Ψ_δ><Ψ_δ|`.
pub fn delta_mixture<T: Real>(n: usize, lambda: T, sigma_delta: T) -> Result<DeltaMixture<T>> {
    delta_mixture_with(n, lambda, sigma_delta, T::zero(), MixtureOptions::default())
}

/// δ-average of thermal states (ground states when `temperature = 0`).
///
/// Uses the variable `x = δ / (√2 σ)` and the symmetric half-range rule.
/// States at `-δ` are the reflections `m -> -m` of those at `+δ`, so each
/// node costs one solve and `<J_z>` of the mixture is exactly zero.
pub fn delta_mixture_with<T: Real>(
    n: usize,
    lambda: T,
    sigma_delta: T,
    temperature: T,
    options: MixtureOptions,
) -> Result<DeltaMixture<T>> {
    if !(sigma_delta >= T::zero()) {
        return Err(Error::OutOfRange { what: "σ_δ", value: sigma_delta.to_f64().unwrap_or(f64::NAN) });
    }
    if options.order == 0 {
        return Err(Error::OutOfRange { what: "quadrature order", value: 0.0 });
    }
    let base = ModelParams::new(n, lambda, T::zero())?;
    if sigma_delta == T::zero() {
        let ensemble = thermal_ensemble(&base, temperature)?;
        return Ok(DeltaMixture { ensemble, order: 0, graded: false, converged: true, max_relative_change: T::zero() });
    }

    let build = |rule: &QuadratureRule<T>| -> Result<StateEnsemble<T>> {
        let nodes = mixture_deltas(rule, sigma_delta)
            .into_iter()
            .map(|delta| {
                let params = base.with_delta(delta);
                if temperature == T::zero() {
                    Ok(StateEnsemble::pure(ground_state(&params)?.state))
                } else {
                    thermal_ensemble(&params, temperature)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        assemble_mixture(rule, &nodes)
    };

    let mut order = options.order;
    let mut current = build(&half_range_hermite(order)?)?;
    if !options.check_convergence {
        return Ok(DeltaMixture { ensemble: current, order, graded: false, converged: false, max_relative_change: T::nan() });
    }
    let tolerance = T::lit(options.tolerance);
    while 2 * order <= options.max_order {
        let doubled = build(&half_range_hermite(2 * order)?)?;
        let change = relative_change(&current.moments(), &doubled.moments());
        if change < tolerance {
            return Ok(DeltaMixture { ensemble: current, order, graded: false, converged: true, max_relative_change: change });
        }
        order *= 2;
        current = doubled;
    }

    // Structure near δ = 0 finer than σ_δ (close to the bifurcation): graded panels.
    let mut rule = graded_half_range(GRADED_PANEL_ORDERS[0])?;
    let mut current = build(&rule)?;
    let mut change = T::infinity();
    for &p in &GRADED_PANEL_ORDERS[1..] {
        let finer = graded_half_range(p)?;
        let next = build(&finer)?;
        change = relative_change(&current.moments(), &next.moments());
        if change < tolerance {
            return Ok(DeltaMixture { ensemble: current, order: rule.len(), graded: true, converged: true, max_relative_change: change });
        }
        rule = finer;
        current = next;
    }
    Ok(DeltaMixture { ensemble: current, order: rule.len(), graded: true, converged: false, max_relative_change: change })
}

/// Tilts `δ_i = √2 σ x_i ≥ 0` at the nodes of a half-range rule.
pub fn mixture_deltas<T: Real>(rule: &QuadratureRule<T>, sigma_delta: T) -> Vec<T> {
    let scale = T::lit(2.0).sqrt() * sigma_delta;
    rule.nodes.iter().map(|&x| scale * x).collect()
}

/// Combines per-node ensembles (at the tilts of [`mixture_deltas`]) into the
/// δ-symmetric mixture: each member appears as itself and reflected,
/// adjacently and with half the node weight.
pub fn assemble_mixture<T: Real>(rule: &QuadratureRule<T>, nodes: &[StateEnsemble<T>]) -> Result<StateEnsemble<T>> {
    if nodes.len() != rule.len() {
        return Err(Error::DimensionMismatch { expected: rule.len(), got: nodes.len() });
    }
    let mut members: Vec<(T, SpinState<T>)> = Vec::new();
    for (&w, node) in rule.weights.iter().zip(nodes) {
        for (wt, s) in node.members() {
            let half = w * *wt / T::lit(2.0);
            members.push((half, s.clone()));
            members.push((half, s.reflected()));
        }
    }
    let total: T = members.iter().map(|(w, _)| *w).sum();
    StateEnsemble::new(members.into_iter().map(|(w, s)| (w / total, s)).collect())
}

/// Largest relative change over the moments that do not vanish by symmetry.
pub fn relative_change<T: Real>(a: &Moments<T>, b: &Moments<T>) -> T {
    [(a.jx, b.jx), (a.jx2, b.jx2), (a.jy2, b.jy2), (a.jz2, b.jz2)]
        .into_iter()
        .map(|(x, y)| {
            let scale = y.abs().max(T::min_positive_value());
            (x - y).abs() / scale
        })
        .fold(T::zero(), T::max)
}

/// `ν̃ = ν e^{-k²σ²/2}`: visibility after Gaussian position blur of width σ.
pub fn blur_visibility<T: Real>(nu: T, k_fringe: T, sigma_detector: T) -> T {
    let ks = k_fringe * sigma_detector;
    nu * (-(ks * ks) / T::lit(2.0)).exp()
}

/// `B(T, σ) = ξ²(T) + (sqrt(1-ν̃²) - 1)/(2ν̃²)`.
pub fn witness_with_noise<T: Real>(xi2_thermal: T, nu_blurred: T) -> Result<T> {
    bell_witness(xi2_thermal, nu_blurred)
}

#[cfg(test)]
mod tests {
    use super::*;

    // ∫_0^∞ x^k e^{-x²} dx = Γ((k+1)/2)/2, normalized by the mass √π/2.
    fn half_moment(k: usize) -> f64 {
        let mut g = if k.is_multiple_of(2) { std::f64::consts::PI.sqrt() } else { 1.0 };
        // Γ((k+1)/2) by recurrence from Γ(1/2) or Γ(1)
        let mut a = if k.is_multiple_of(2) { 0.5 } else { 1.0 };
        while a < (k as f64 + 1.0) / 2.0 - 1e-9 {
            g *= a;
            a += 1.0;
        }
        (g / 2.0) / (std::f64::consts::PI.sqrt() / 2.0)
    }

    #[test]
    fn half_range_rule_is_gaussian() {
        for order in [1, 4, 12] {
            let rule = half_range_hermite::<f64>(order).unwrap();
            for k in 0..2 * order {
                let q = rule.integrate(|x| x.powi(k as i32));
                let exact = half_moment(k);
                assert!((q - exact).abs() <= 1e-11 * exact, "order {order} k {k}: {q} vs {exact}");
            }
            assert!(rule.nodes.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn graded_rule_resolves_fine_structure() {
        let coarse = graded_half_range::<f64>(8).unwrap();
        let fine = graded_half_range::<f64>(16).unwrap();
        for k in 0..6 {
            let exact = half_moment(k);
            assert!((coarse.integrate(|x| x.powi(k as i32)) - exact).abs() <= 1e-8 * exact, "k {k}");
            assert!((fine.integrate(|x| x.powi(k as i32)) - exact).abs() <= 1e-13 * exact, "k {k}");
        }
        // a step of width 1e-5 near the origin defeats any single Gauss rule
        let f = |x: f64| x / (x + 1e-5);
        assert!((coarse.integrate(f) - fine.integrate(f)).abs() < 1e-10);
        let hermite = half_range_hermite::<f64>(80).unwrap();
        assert!((hermite.integrate(f) - fine.integrate(f)).abs() > 1e-6);
    }

    #[test]
    fn full_hermite_rule() {
        let rule = gauss_hermite::<f64>(41).unwrap();
        assert_eq!(rule.nodes[20], 0.0);
        for i in 0..41 {
            assert_eq!(rule.nodes[i], -rule.nodes[40 - i]);
        }
        // E[x²] = 1/2, E[x⁴] = 3/4 under e^{-x²}/√π
        assert!((rule.integrate(|x| x * x) - 0.5).abs() < 1e-13);
        assert!((rule.integrate(|x| x.powi(4)) - 0.75).abs() < 1e-13);
        let sym = symmetric_half_range_hermite::<f64>(10).unwrap();
        assert!((sym.integrate(|x| x * x) - 0.5).abs() < 1e-13);
        assert!((sym.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_rule() {
        let rule = gauss_legendre::<f64>(5).unwrap();
        assert!((rule.integrate(|x| x.powi(8)) - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn zero_width_mixture_is_pure() {
        let m = delta_mixture(40, -0.5, 0.0).unwrap();
        assert_eq!(m.ensemble.len(), 1);
        assert!(m.converged);
    }

    #[test]
    fn mixture_is_parity_symmetric() {
        let m = delta_mixture(60, -1.3, 0.05).unwrap();
        let mom = m.moments();
        assert_eq!(mom.jz, 0.0);
        assert_eq!(mom.jy, 0.0);
        assert!(m.converged, "change {}", m.max_relative_change);
    }

    #[test]
    fn blur_values() {
        assert_eq!(blur_visibility(0.7, 2.0, 0.0), 0.7);
        assert!((blur_visibility(1.0, 1.0, 1.0) - (-0.5f64).exp()).abs() < 1e-15);
        assert!(blur_visibility(1.0, 1.0, 60.0) < 1e-300);
        assert!((witness_with_noise(0.4f64, 1.0).unwrap() + 0.1).abs() < 1e-15);
        assert!(witness_with_noise(0.4, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(NoiseConfig::new(0.1, 0.0, 0.0, 1.0).is_ok());
        assert!(NoiseConfig::new(-0.1, 0.0, 0.0, 1.0).is_err());
        assert!(NoiseConfig::new(0.0, 0.0, 0.5, 0.0).is_err());
    }
}
