use kai_linalg::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(r);
        let im: f64 = StandardNormal.sample(r);
        C64::new(re, im)
    })
}

fn random_hermitian(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    random_matrix(r, n, n).hermitian_part()
}

fn random_pd(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = random_matrix(r, n, n + 2);
    let gg = g.matmul(&g.adjoint()).unwrap();
    &gg + &CMatrix::identity(n).scale_real(0.1)
}

fn unitary_defect(u: &CMatrix) -> f64 {
    (&u.adjoint_mul(u).unwrap() - &CMatrix::identity(u.cols())).frobenius_norm()
}

/// ln|det A| by Gaussian elimination with partial pivoting.
fn lu_log_abs_det(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut m = a.clone();
    let mut acc = 0.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm())).unwrap();
        for j in 0..n {
            let t = m[(k, j)];
            m[(k, j)] = m[(p, j)];
            m[(p, j)] = t;
        }
        let piv = m[(k, k)];
        acc += piv.norm().ln();
        for i in k + 1..n {
            let f = m[(i, k)] / piv;
            for j in k..n {
                let t = m[(k, j)];
                m[(i, j)] -= f * t;
            }
        }
    }
    acc
}

fn trace_of(a: &CMatrix) -> C64 {
    a.trace()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn evd_reconstructs(seed in any::<u64>(), n in 2usize..=64) {
        let a = random_hermitian(&mut rng(seed), n);
        let e = hermitian_evd(&a).unwrap();
        let scale = a.frobenius_norm();
        for k in 0..n {
            let u = e.eigenvectors.submatrix(0, n, k, k + 1);
            let res = &a.matmul(&u).unwrap() - &u.scale_real(e.eigenvalues[k]);
            prop_assert!(res.frobenius_norm() <= 1e-8 * scale);
        }
        prop_assert!(unitary_defect(&e.eigenvectors) <= 1e-8);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), rows in 2usize..=64, cols in 2usize..=64) {
        let a = random_matrix(&mut rng(seed), rows, cols);
        let s = svd(&a).unwrap();
        prop_assert!((&s.reconstruct() - &a).frobenius_norm() <= 1e-8 * a.frobenius_norm());
        prop_assert!(unitary_defect(&s.u) <= 1e-8);
        prop_assert!(unitary_defect(&s.v) <= 1e-8);
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.singular_values.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn least_squares_recovers_synthesized_solution(seed in any::<u64>(), m in 2usize..=24, extra in 0usize..8, k in 1usize..4) {
        let n = m.min(m.saturating_sub(extra).max(1));
        let mut r = rng(seed);
        let a = random_matrix(&mut r, m, n);
        let x0 = random_matrix(&mut r, n, k);
        let b = a.matmul(&x0).unwrap();
        let x = least_squares(&a, &b).unwrap();
        let cond = svd(&a).unwrap().condition_number();
        prop_assert!((&x - &x0).frobenius_norm() <= 1e-12 * cond * x0.frobenius_norm().max(1.0));
    }

    #[test]
    fn least_squares_is_a_minimizer(seed in any::<u64>(), m in 3usize..=16) {
        let mut r = rng(seed);
        let n = m / 2;
        let a = random_matrix(&mut r, m, n);
        let b = random_matrix(&mut r, m, 1);
        let x = least_squares(&a, &b).unwrap();
        let best = (&b - &a.matmul(&x).unwrap()).frobenius_norm();
        let eps = random_matrix(&mut r, n, 1);
        let eps = eps.scale_real(1e-3 / eps.frobenius_norm());
        let moved = &x + &eps;
        let other = (&b - &a.matmul(&moved).unwrap()).frobenius_norm();
        prop_assert!(other >= best);
    }

    #[test]
    fn projector_properties(seed in any::<u64>(), m in 2usize..=24, p_frac in 0.0f64..1.0) {
        let p = 1 + ((m - 1) as f64 * p_frac) as usize;
        let a = random_matrix(&mut rng(seed), m, p);
        let q = projection_from_basis(&a).unwrap();
        prop_assert!((&q - &q.adjoint()).frobenius_norm() <= 1e-9);
        prop_assert!((&q.matmul(&q).unwrap() - &q).frobenius_norm() <= 1e-9);
        prop_assert!((q.trace().re - p as f64).abs() <= 1e-9);
        let resid = complement_projector(&q).matmul(&a).unwrap();
        prop_assert!(resid.frobenius_norm() <= 1e-9 * a.frobenius_norm());
    }

    #[test]
    fn cholesky_reconstructs(seed in any::<u64>(), n in 1usize..=32) {
        let a = random_pd(&mut rng(seed), n);
        let l = cholesky_hermitian(&a).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                prop_assert_eq!(l[(i, j)], C64::new(0.0, 0.0));
            }
        }
        let back = l.matmul(&l.adjoint()).unwrap();
        prop_assert!((&back - &a).frobenius_norm() <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn log_det_matches_lu(seed in any::<u64>(), n in 1usize..=24) {
        let a = random_pd(&mut rng(seed), n);
        let got = log_det_hermitian(&a).unwrap();
        let want = lu_log_abs_det(&a);
        prop_assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0));
    }

    #[test]
    fn svd_matches_gram_spectrum(seed in any::<u64>(), rows in 2usize..=16, cols in 1usize..=8) {
        let a = random_matrix(&mut rng(seed), rows.max(cols), cols);
        let s = svd(&a).unwrap();
        let e = hermitian_evd(&a.adjoint_mul(&a).unwrap()).unwrap();
        let top = e.eigenvalues[0];
        for (sv, ev) in s.singular_values.iter().zip(&e.eigenvalues) {
            prop_assert!((sv * sv - ev).abs() <= 1e-8 * top);
        }
    }

    #[test]
    fn frobenius_difference_expansion(seed in any::<u64>(), n in 1usize..=16) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, n, n);
        let b = random_matrix(&mut r, n, n);
        let lhs = (&a - &b).frobenius_norm_sqr();
        let cross = trace_of(&a.adjoint_mul(&b).unwrap()) + trace_of(&a.matmul(&b.adjoint()).unwrap());
        let rhs = a.frobenius_norm_sqr() + b.frobenius_norm_sqr() - cross.re;
        prop_assert!(cross.im.abs() <= 1e-10 * lhs);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }

    #[test]
    fn trace_of_squared_product_bounded(seed in any::<u64>(), n in 1usize..=16) {
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, n);
        let b = random_hermitian(&mut r, n);
        let ab = a.matmul(&b).unwrap();
        let lhs = ab.matmul(&ab).unwrap().trace().re;
        let rhs = a.matmul(&a).unwrap().matmul(&b.matmul(&b).unwrap()).unwrap().trace().re;
        let scale = a.frobenius_norm_sqr() * b.frobenius_norm_sqr();
        prop_assert!(lhs <= rhs + 1e-10 * scale);
    }

    #[test]
    fn roots_of_synthesized_polynomial(seed in any::<u64>()) {
        let mut r = rng(seed);
        let roots: Vec<C64> = (0..8)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut r);
                let im: f64 = StandardNormal.sample(&mut r);
                C64::new(re, im)
            })
            .collect();
        // Expand Π(z − r_k), highest degree first.
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        for &z0 in &roots {
            let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * z0;
            }
            coeffs = next;
        }
        let found = polynomial_roots(&coeffs).unwrap();
        prop_assert_eq!(found.len(), 8);
        // Skip ill-conditioned draws with clustered roots.
        let min_gap = roots
            .iter()
            .enumerate()
            .flat_map(|(i, a)| roots[i + 1..].iter().map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_gap > 0.3);
        for z0 in &roots {
            let nearest = found.iter().map(|z| (z - z0).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest <= 1e-6, "root {z0} missed by {nearest}");
        }
    }
}

#[test]
fn hermitian_evd_rejects_non_square() {
    assert!(matches!(
        hermitian_evd(&CMatrix::zeros(2, 3)),
        Err(LinalgError::Dimension(_))
    ));
}

#[test]
fn unit_circle_roots() {
    let one = C64::new(1.0, 0.0);
    let mut r = polynomial_roots(&[one, C64::new(0.0, 0.0), -one]).unwrap();
    r.sort_by(|a, b| a.re.total_cmp(&b.re));
    assert!((r[0] + one).norm() < 1e-14);
    assert!((r[1] - one).norm() < 1e-14);
}
