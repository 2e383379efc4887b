//! Real symmetric tridiagonal matrices and their eigenproblems.
//!
//! Three routes are provided: implicit-shift QL for the whole spectrum (with
//! or without vectors), Sturm-sequence bisection for selected eigenvalues, and
//! inverse iteration for selected eigenvectors. Inverse iteration
//! re-orthogonalizes inside clusters of close eigenvalues, so numerically
//! degenerate pairs still come back orthonormal.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Iteration budget per eigenvalue for QL sweeps.
const QL_MAX_SWEEPS: usize = 60;
/// Eigenvalues closer than this fraction of the matrix norm share a cluster.
const CLUSTER_GAP: f64 = 1e-5;
const INVERSE_ITERATION_MAX: usize = 8;

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag<T> {
    diag: Vec<T>,
    offdiag: Vec<T>,
}

impl<T: Real> SymTridiag<T> {
    pub fn new(diag: Vec<T>, offdiag: Vec<T>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch { expected: diag.len().saturating_sub(1), got: offdiag.len() });
        }
        if let Some(bad) = diag.iter().chain(offdiag.iter()).find(|v| !v.is_finite()) {
            return Err(Error::OutOfRange { what: "matrix entry", value: bad.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[T] {
        &self.offdiag
    }

    pub fn trace(&self) -> T {
        self.diag.iter().copied().sum()
    }

    /// Maximum absolute row sum.
    pub fn norm(&self) -> T {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s = s + self.offdiag[i - 1].abs();
                }
                if i + 1 < n {
                    s = s + self.offdiag[i].abs();
                }
                s
            })
            .fold(T::zero(), T::max)
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s = s + self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s = s + self.offdiag[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// `‖A v - λ v‖₂`.
    pub fn residual(&self, lambda: T, v: &[T]) -> T {
        self.apply(v)
            .iter()
            .zip(v)
            .map(|(&av, &x)| {
                let r = av - lambda * x;
                r * r
            })
            .sum::<T>()
            .sqrt()
    }

    fn gershgorin(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r = r + self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r = r + self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn pivmin(&self) -> T {
        let max_e2 = self.offdiag.iter().map(|&e| e * e).fold(T::one(), T::max);
        T::min_positive_value() * max_e2
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: T) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.offdiag[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue_bisect(&self, index: usize) -> Result<T> {
        if index >= self.dim() {
            return Err(Error::OutOfRange { what: "eigenvalue index", value: index as f64 });
        }
        let (g_lo, g_hi) = self.gershgorin();
        let pad = (g_hi - g_lo).abs() * T::epsilon() * T::lit(4.0) + self.pivmin();
        let mut lo = g_lo - pad;
        let mut hi = g_hi + pad;
        let eps = T::epsilon();
        for _ in 0..256 {
            let width = hi - lo;
            if width <= T::lit(2.0) * eps * lo.abs().max(hi.abs()) + self.pivmin() {
                return Ok(T::lit(0.5) * (lo + hi));
            }
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::NoConvergence { iterations: 256 })
    }

    /// All eigenvalues in ascending order (QL without vectors).
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        let (mut d, _) = self.ql(false)?;
        d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Ok(d)
    }

    /// All eigenpairs, ascending; `vectors[i]` belongs to `values[i]`.
    pub fn eigen_decompose(&self) -> Result<(Vec<T>, Vec<Vec<T>>)> {
        let (d, z) = self.ql(true)?;
        let mut order: Vec<usize> = (0..d.len()).collect();
        order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
        let mut z: Vec<Option<Vec<T>>> = z.into_iter().map(Some).collect();
        let values = order.iter().map(|&i| d[i]).collect();
        let vectors = order.iter().map(|&i| z[i].take().expect("each index used once")).collect();
        Ok((values, vectors))
    }

    /// Implicit-shift QL. Eigenvectors are accumulated as rows of `z`.
    fn ql(&self, want_vectors: bool) -> Result<(Vec<T>, Vec<Vec<T>>)> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.offdiag.clone();
        e.push(T::zero());
        let mut z: Vec<Vec<T>> = if want_vectors {
            (0..n)
                .map(|i| {
                    let mut row = vec![T::zero(); n];
                    row[i] = T::one();
                    row
                })
                .collect()
        } else {
            Vec::new()
        };

        let eps = T::epsilon();
        let mut shift_acc = T::zero();
        let mut tst1 = T::zero();
        let mut total_sweeps = 0usize;
        for l in 0..n {
            tst1 = tst1.max(d[l].abs() + e[l].abs());
            let mut m = l;
            while m < n - 1 && e[m].abs() > eps * tst1 {
                m += 1;
            }
            if m > l {
                let mut sweeps = 0;
                loop {
                    sweeps += 1;
                    total_sweeps += 1;
                    if sweeps > QL_MAX_SWEEPS {
                        return Err(Error::NoConvergence { iterations: total_sweeps });
                    }
                    // Wilkinson-type shift from the leading 2x2 block.
                    let g = d[l];
                    let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                    let mut r = p.hypot(T::one());
                    if p < T::zero() {
                        r = -r;
                    }
                    d[l] = e[l] / (p + r);
                    d[l + 1] = e[l] * (p + r);
                    let dl1 = d[l + 1];
                    let mut h = g - d[l];
                    for di in d.iter_mut().take(n).skip(l + 2) {
                        *di = *di - h;
                    }
                    shift_acc = shift_acc + h;

                    p = d[m];
                    let mut c = T::one();
                    let mut c2 = c;
                    let mut c3 = c;
                    let el1 = e[l + 1];
                    let mut s = T::zero();
                    let mut s2 = T::zero();
                    for i in (l..m).rev() {
                        c3 = c2;
                        c2 = c;
                        s2 = s;
                        let g = c * e[i];
                        h = c * p;
                        r = p.hypot(e[i]);
                        e[i + 1] = s * r;
                        s = e[i] / r;
                        c = p / r;
                        p = c * d[i] - s * g;
                        d[i + 1] = h + s * (c * g + s * d[i]);
                        if want_vectors {
                            let (lower, upper) = z.split_at_mut(i + 1);
                            let zi = &mut lower[i];
                            let zi1 = &mut upper[0];
                            for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                                let hb = *b;
                                *b = s * *a + c * hb;
                                *a = c * *a - s * hb;
                            }
                        }
                    }
                    p = -s * s2 * c3 * el1 * e[l] / dl1;
                    e[l] = s * p;
                    d[l] = c * p;
                    if e[l].abs() <= eps * tst1 {
                        break;
                    }
                }
            }
            d[l] = d[l] + shift_acc;
            e[l] = T::zero();
        }
        Ok((d, z))
    }

    /// Solves `(A - shift I) x = rhs` by Gaussian elimination with partial pivoting.
    /// Exactly singular pivots are replaced by `floor` carrying the pivot's sign.
    pub fn solve_shifted(&self, shift: T, rhs: &[T], floor: T) -> Vec<T> {
        let n = self.dim();
        let mut u0 = vec![T::zero(); n];
        let mut u1 = vec![T::zero(); n];
        let mut u2 = vec![T::zero(); n];
        let mut b = vec![T::zero(); n];

        let fix = |p: T| {
            if p.abs() < floor {
                if p < T::zero() {
                    -floor
                } else {
                    floor
                }
            } else {
                p
            }
        };

        // Row currently in elimination position i: entries at columns i and i+1.
        let mut cur_x = self.diag[0] - shift;
        let mut cur_y = if n > 1 { self.offdiag[0] } else { T::zero() };
        let mut cur_r = rhs[0];
        for i in 0..n.saturating_sub(1) {
            let sub = self.offdiag[i];
            let next_d = self.diag[i + 1] - shift;
            let next_e = if i + 2 < n { self.offdiag[i + 1] } else { T::zero() };
            let next_r = rhs[i + 1];
            if cur_x.abs() >= sub.abs() {
                let px = fix(cur_x);
                let f = sub / px;
                u0[i] = px;
                u1[i] = cur_y;
                u2[i] = T::zero();
                b[i] = cur_r;
                cur_x = next_d - f * cur_y;
                cur_y = next_e;
                cur_r = next_r - f * cur_r;
            } else {
                let f = cur_x / sub;
                u0[i] = sub;
                u1[i] = next_d;
                u2[i] = next_e;
                b[i] = next_r;
                let nx = cur_y - f * next_d;
                let ny = -f * next_e;
                cur_r = cur_r - f * next_r;
                cur_x = nx;
                cur_y = ny;
            }
        }
        u0[n - 1] = fix(cur_x);
        b[n - 1] = cur_r;

        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s = s - u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s = s - u2[i] * x[i + 2];
            }
            x[i] = s / u0[i];
        }
        x
    }

    /// Eigenvectors for ascending `eigenvalues` by inverse iteration.
    ///
    /// Vectors belonging to eigenvalues closer than `1e-5 ‖A‖` are
    /// Gram-Schmidt orthogonalized against each other at every step.
    pub fn inverse_iteration(&self, eigenvalues: &[T]) -> Result<Vec<Vec<T>>> {
        let n = self.dim();
        let norm = self.norm().max(T::min_positive_value());
        let eps = T::epsilon();
        let cluster_gap = T::lit(CLUSTER_GAP) * norm;
        let floor = eps * norm;
        let target = T::tolerance(1e-10) * norm;

        let mut vectors: Vec<Vec<T>> = Vec::with_capacity(eigenvalues.len());
        let mut cluster_start = 0usize;
        let mut prev_shift = T::neg_infinity();
        for (idx, &lambda) in eigenvalues.iter().enumerate() {
            if idx > 0 && lambda - eigenvalues[idx - 1] > cluster_gap {
                cluster_start = idx;
            }
            let mut shift = lambda;
            if idx > cluster_start {
                let pert = T::lit(10.0) * eps * norm;
                if shift - prev_shift < pert {
                    shift = prev_shift + pert;
                }
            }
            prev_shift = shift;

            let mut v = start_vector::<T>(n, idx);
            orthogonalize(&mut v, &vectors[cluster_start..idx]);
            normalize(&mut v);
            let mut converged = false;
            let mut extra = 0;
            for _ in 0..INVERSE_ITERATION_MAX {
                v = self.solve_shifted(shift, &v, floor);
                orthogonalize(&mut v, &vectors[cluster_start..idx]);
                if !normalize(&mut v) {
                    v = start_vector::<T>(n, idx + 7919);
                    orthogonalize(&mut v, &vectors[cluster_start..idx]);
                    normalize(&mut v);
                    continue;
                }
                if self.residual(lambda, &v) <= target {
                    converged = true;
                    extra += 1;
                    if extra >= 2 {
                        break;
                    }
                }
            }
            if !converged {
                return Err(Error::NoConvergence { iterations: INVERSE_ITERATION_MAX });
            }
            vectors.push(v);
        }
        Ok(vectors)
    }

    /// Checks `‖A v - λ v‖ ≤ 1e-8 ‖A‖` and pairwise orthonormality to 1e-8.
    pub fn check_eigenpairs(&self, values: &[T], vectors: &[Vec<T>]) -> Result<()> {
        let norm = self.norm();
        let bound = T::tolerance(1e-8) * norm.max(T::one());
        for (index, (&lambda, v)) in values.iter().zip(vectors).enumerate() {
            let residual = self.residual(lambda, v);
            if !(residual <= bound) {
                return Err(Error::ResidualCheck {
                    index,
                    residual: residual.to_f64().unwrap_or(f64::NAN),
                    bound: bound.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        check_orthonormal(vectors, T::tolerance(1e-8))
    }
}

/// Deterministic pseudo-random start vector with entries in [0.5, 1.5).
fn start_vector<T: Real>(n: usize, salt: usize) -> Vec<T> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (salt as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    (0..n)
        .map(|_| {
            state ^= state >> 30;
            state = state.wrapping_mul(0xBF58_476D_1CE4_E5B9);
            state ^= state >> 27;
            state = state.wrapping_mul(0x94D0_49BB_1331_11EB);
            state ^= state >> 31;
            T::lit(0.5 + (state >> 11) as f64 / (1u64 << 53) as f64)
        })
        .collect()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn orthogonalize<T: Real>(v: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for u in basis {
            let p = dot(v, u);
            v.iter_mut().zip(u).for_each(|(x, &y)| *x = *x - p * y);
        }
    }
}

fn normalize<T: Real>(v: &mut [T]) -> bool {
    let norm = dot(v, v).sqrt();
    if !(norm > T::zero()) || !norm.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x = *x / norm);
    true
}

/// Pairwise orthonormality of `vectors` within `tol`.
pub fn check_orthonormal<T: Real>(vectors: &[Vec<T>], tol: T) -> Result<()> {
    for i in 0..vectors.len() {
        for j in 0..=i {
            let target = if i == j { T::one() } else { T::zero() };
            let defect = (dot(&vectors[i], &vectors[j]) - target).abs();
            if !(defect <= tol) {
                return Err(Error::OrthonormalityCheck { i, j, defect: defect.to_f64().unwrap_or(f64::NAN) });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag<f64> {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    // Eigenvalues of the Dirichlet Laplacian: 2 - 2 cos(kπ/(n+1)).
    fn laplacian_exact(n: usize) -> Vec<f64> {
        (1..=n).map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos()).collect()
    }

    #[test]
    fn ql_matches_closed_form() {
        for n in [1, 2, 3, 10, 57] {
            let a = laplacian(n);
            let exact = laplacian_exact(n);
            let vals = a.eigenvalues().unwrap();
            let (vals2, vecs) = a.eigen_decompose().unwrap();
            for i in 0..n {
                assert!((vals[i] - exact[i]).abs() < 1e-12);
                assert!((vals2[i] - exact[i]).abs() < 1e-12);
            }
            a.check_eigenpairs(&vals2, &vecs).unwrap();
        }
    }

    #[test]
    fn bisection_and_sturm_count() {
        let a = laplacian(40);
        let exact = laplacian_exact(40);
        for (i, &e) in exact.iter().enumerate() {
            assert!((a.eigenvalue_bisect(i).unwrap() - e).abs() < 1e-13);
        }
        assert_eq!(a.count_below(0.0), 0);
        assert_eq!(a.count_below(2.0 + 1e-9), 20);
        assert_eq!(a.count_below(5.0), 40);
        assert!(a.eigenvalue_bisect(40).is_err());
    }

    #[test]
    fn solve_shifted_recovers_rhs() {
        let a = SymTridiag::new(vec![1.0f64, -3.0, 0.5, 2.0, 0.1], vec![4.0, -0.2, 3.0, 1e-3]).unwrap();
        let x_true = [0.3, -1.0, 2.0, 0.7, -0.4];
        let shift = 0.37;
        let mut rhs = a.apply(&x_true);
        rhs.iter_mut().zip(x_true.iter()).for_each(|(r, &x)| *r -= shift * x);
        let x = a.solve_shifted(shift, &rhs, 1e-300);
        for (u, v) in x.iter().zip(x_true.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_iteration_separates_degenerate_pair() {
        // Two decoupled identical blocks give exactly repeated eigenvalues.
        let a = SymTridiag::new(vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0], vec![0.5, 0.5, 0.0, 0.5, 0.5]).unwrap();
        let vals = a.eigenvalues().unwrap();
        let vecs = a.inverse_iteration(&vals).unwrap();
        a.check_eigenpairs(&vals, &vecs).unwrap();
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SymTridiag::<f64>::new(vec![], vec![]).is_err());
        assert!(SymTridiag::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiag::new(vec![1.0, f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn single_precision_ql() {
        let a = SymTridiag::<f32>::new(vec![2.0; 12], vec![-1.0; 11]).unwrap();
        let (vals, vecs) = a.eigen_decompose().unwrap();
        a.check_eigenpairs(&vals, &vecs).unwrap();
    }
}
