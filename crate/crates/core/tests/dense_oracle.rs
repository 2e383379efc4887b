//! Cross-checks against dense complex matrices built independently from the
//! angular-momentum ladder algebra `J_± |j,m> = sqrt(j(j+1) - m(m±1)) |j,m±1>`.

use bellfringe::model::full_spectrum;
use bellfringe::spin::compute_moments;
use bellfringe::{ground_state, DickeBasis, ModelParams64, Moments64, SpinState64};
use nalgebra::DMatrix;
use num_complex::Complex64;

type CMat = DMatrix<Complex64>;

struct SpinMatrices {
    jx: CMat,
    jy: CMat,
    jz: CMat,
}

fn spin_matrices(n: usize) -> SpinMatrices {
    let dim = n + 1;
    let j = n as f64 / 2.0;
    let mut jp = CMat::zeros(dim, dim);
    for k in 0..n {
        let m = k as f64 - j;
        jp[(k + 1, k)] = Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let jx = (&jp + &jm) * half;
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    let jz = CMat::from_diagonal(&nalgebra::DVector::from_fn(dim, |k, _| Complex64::new(k as f64 - j, 0.0)));
    SpinMatrices { jx, jy, jz }
}

fn expect(op: &CMat, psi: &nalgebra::DVector<Complex64>) -> f64 {
    let v = (psi.adjoint() * op * psi)[(0, 0)];
    assert!(v.im.abs() < 1e-12, "non-Hermitian expectation {v}");
    v.re
}

fn dense_moments(s: &SpinMatrices, psi: &nalgebra::DVector<Complex64>) -> Moments64 {
    Moments64 {
        jx: expect(&s.jx, psi),
        jy: expect(&s.jy, psi),
        jz: expect(&s.jz, psi),
        jx2: expect(&(&s.jx * &s.jx), psi),
        jy2: expect(&(&s.jy * &s.jy), psi),
        jz2: expect(&(&s.jz * &s.jz), psi),
    }
}

fn to_complex(v: &[f64]) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)))
}

fn assert_moments_close(a: &Moments64, b: &Moments64, tol: f64) {
    for (x, y) in a.as_array().iter().zip(b.as_array()) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

fn pseudo_random_state(n: usize, seed: u64) -> Vec<f64> {
    let mut x = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    let mut v: Vec<f64> = (0..=n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
    v
}

#[test]
fn moments_match_dense_operators() {
    for n in 1..=8 {
        let s = spin_matrices(n);
        let basis = DickeBasis::new(n).unwrap();
        for seed in 0..5 {
            let v = pseudo_random_state(n, seed + 17 * n as u64);
            let fast = compute_moments(&basis, &v).unwrap();
            let dense = dense_moments(&s, &to_complex(&v));
            assert_moments_close(&fast, &dense, 1e-12);
        }
    }
}

#[test]
fn hamiltonian_spectrum_matches_dense_diagonalization() {
    for n in 1..=8 {
        let s = spin_matrices(n);
        for &(lambda, delta) in &[(0.0, 0.0), (-1.3, 0.0), (2.5, 0.0), (-0.7, 0.3), (4.0, -1.1)] {
            let nf = n as f64;
            let h = -&s.jx + (&s.jz * &s.jz) * Complex64::new(lambda / nf, 0.0) + &s.jz * Complex64::new(delta, 0.0);
            let h_real = h.map(|c| c.re);
            assert!(h.iter().all(|c| c.im == 0.0));
            let eig = nalgebra::SymmetricEigen::new(h_real.clone());
            let mut dense: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            dense.sort_by(|a, b| a.partial_cmp(b).unwrap());

            let params = ModelParams64::new(n, lambda, delta).unwrap();
            let spec = full_spectrum(&params).unwrap();
            for (a, b) in spec.energies().iter().zip(&dense) {
                assert!((a - b).abs() < 1e-9, "N={n} Λ={lambda} δ={delta}: {a} vs {b}");
            }

            // ground state agrees up to sign; all moments agree
            let gs = ground_state(&params).unwrap();
            assert!((gs.energy - dense[0]).abs() < 1e-9);
            let imin = (0..=n).min_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap()).unwrap();
            let col: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
            let overlap: f64 = col.iter().zip(gs.state.coeffs()).map(|(a, b)| a * b).sum();
            assert!((overlap.abs() - 1.0).abs() < 1e-9, "overlap {overlap}");
            assert_moments_close(&gs.state.moments(), &dense_moments(&s, &to_complex(&col)), 1e-9);
        }
    }
}

#[test]
fn rotation_matches_unitary() {
    for n in 1..=8 {
        let s = spin_matrices(n);
        // exp(-i π/2 J_x) through the eigenbasis of the real symmetric J_x
        let jx_real = s.jx.map(|c| c.re);
        let eig = nalgebra::SymmetricEigen::new(jx_real);
        let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let phases = CMat::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_2 * l)));
        let u = &v * phases * v.adjoint();
        let basis = DickeBasis::new(n).unwrap();
        for (lambda, delta) in [(3.0, 0.0), (-0.5, 0.4)] {
            let gs = ground_state(&ModelParams64::new(n, lambda, delta).unwrap()).unwrap();
            let rotated = dense_moments(&s, &(&u * to_complex(gs.state.coeffs())));
            assert_moments_close(&gs.state.moments().rotate_pi2_about_x(), &rotated, 1e-10);
            assert!(gs.state.moments().rotate_pi2_about_x().casimir_defect(&basis).abs() < 1e-9);
        }
    }
}

#[test]
fn reflected_state_is_ground_state_of_opposite_tilt() {
    for n in [5, 8, 40] {
        let plus = ground_state(&ModelParams64::new(n, -1.4, 0.2).unwrap()).unwrap();
        let minus = ground_state(&ModelParams64::new(n, -1.4, -0.2).unwrap()).unwrap();
        assert!((plus.energy - minus.energy).abs() < 1e-10);
        let r: SpinState64 = plus.state.reflected();
        let overlap: f64 = r.coeffs().iter().zip(minus.state.coeffs()).map(|(a, b)| a * b).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-9);
        let (a, b) = (plus.state.moments(), minus.state.moments());
        assert!((a.jz + b.jz).abs() < 1e-9 && (a.jx - b.jx).abs() < 1e-9);
    }
}
