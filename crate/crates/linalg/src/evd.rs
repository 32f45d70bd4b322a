//! Hermitian eigendecomposition.
//!
//! The matrix is reduced to a real symmetric tridiagonal form with Householder
//! reflectors followed by a diagonal phase similarity, then diagonalized with
//! the implicit QL algorithm. Eigenpairs are returned in descending order.

use crate::error::{LinalgError, Result};
use crate::matrix::CMatrix;
use crate::C64;

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_QL_ITERATIONS: usize = 60;

#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Eigenvalues, largest first.
    pub eigenvalues: Vec<f64>,
    /// Unit-norm eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl HermitianEig {
    /// The columns belonging to the `k` largest eigenvalues.
    pub fn leading_vectors(&self, k: usize) -> CMatrix {
        self.eigenvectors.leading_columns(k)
    }

    /// The columns belonging to the `k` smallest eigenvalues.
    pub fn trailing_vectors(&self, k: usize) -> CMatrix {
        self.eigenvectors.trailing_columns(k)
    }
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized as `(A + Aᴴ)/2` first, so small asymmetries from
/// rounding are tolerated. Each eigenvector is rotated so that its
/// largest-magnitude component is real and positive.
pub fn hermitian_evd(a: &CMatrix) -> Result<HermitianEig> {
    let (values, vectors) = decompose(a, true)?;
    let mut vectors = vectors.expect("vectors requested");
    let order = descending_order(&values);
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let n = a.rows();
    let mut sorted = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src);
        normalize_phase(&mut col);
        sorted.set_column(dst, &col);
    }
    vectors = sorted;
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Eigenvalues only, largest first.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    let (mut values, _) = decompose(a, false)?;
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable sort keeps the QL output order for exact ties.
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    order
}

/// Rotates `v` so its largest-magnitude entry (first one on ties) is real
/// and positive.
pub(crate) fn normalize_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, x) in v.iter().enumerate() {
        let m = x.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag <= 0.0 {
        return;
    }
    let phase = v[best].conj() / best_mag;
    for x in v.iter_mut() {
        *x *= phase;
    }
    v[best] = C64::new(best_mag, 0.0);
}

fn decompose(a: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| CMatrix::zeros(0, 0))));
    }
    let mut work = a.hermitian_part();
    let (mut diag, mut off, phases, reflectors) = tridiagonalize(&mut work);

    let mut z = want_vectors.then(|| {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    });
    tql(&mut diag, &mut off, z.as_deref_mut(), n)?;

    let vectors = z.map(|z| {
        // Eigenvectors of A are Q · D · Z, with Q the product of reflectors
        // and D the diagonal phase matrix.
        let mut u = CMatrix::from_fn(n, n, |i, j| phases[i] * z[i * n + j]);
        for (k, (v, tau)) in reflectors.iter().enumerate().rev() {
            apply_reflector_left(&mut u, k + 1, v, *tau);
        }
        u
    });
    Ok((diag, vectors))
}

type Reflector = (Vec<C64>, f64);

/// Householder reduction to Hermitian tridiagonal form, then a diagonal
/// phase change that makes the off-diagonal real and nonnegative.
///
/// Returns (diagonal, subdiagonal with a trailing zero, phases, reflectors).
/// Reflector `k` acts on indices `k+1..n` as `I − τ v vᴴ`.
fn tridiagonalize(a: &mut CMatrix) -> (Vec<f64>, Vec<f64>, Vec<C64>, Vec<Reflector>) {
    let n = a.rows();
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<C64> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
        let alpha = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let tail = v[1..].iter().map(|x| x.norm_sqr()).sum::<f64>();
        if alpha == 0.0 || tail == 0.0 {
            reflectors.push((v, 0.0));
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = τ A₂₂ v over the trailing block.
        let base = k + 1;
        let mut p = vec![C64::new(0.0, 0.0); len];
        for i in 0..len {
            let row = a.row(base + i);
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..len {
                acc += row[base + j] * v[j];
            }
            p[i] = acc * tau;
        }
        let vhp: C64 = v.iter().zip(&p).map(|(x, y)| x.conj() * y).sum();
        let kk = tau * vhp.re * 0.5;
        let q: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kk).collect();
        for i in 0..len {
            for j in 0..len {
                let upd = v[i] * q[j].conj() + q[i] * v[j].conj();
                a[(base + i, base + j)] -= upd;
            }
        }
        let new_sub = -phase * alpha;
        a[(base, k)] = new_sub;
        a[(k, base)] = new_sub.conj();
        for i in 1..len {
            a[(base + i, k)] = C64::new(0.0, 0.0);
            a[(k, base + i)] = C64::new(0.0, 0.0);
        }
        reflectors.push((v, tau));
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let e = a[(k + 1, k)];
        let m = e.norm();
        off[k] = m;
        phases[k + 1] = if m > 0.0 { phases[k] * (e / m) } else { phases[k] };
    }
    (diag, off, phases, reflectors)
}

/// `U[start.., :] ← (I − τ v vᴴ) U[start.., :]`.
fn apply_reflector_left(u: &mut CMatrix, start: usize, v: &[C64], tau: f64) {
    if tau == 0.0 {
        return;
    }
    let cols = u.cols();
    let mut w = vec![C64::new(0.0, 0.0); cols];
    for (i, vi) in v.iter().enumerate() {
        let vc = vi.conj();
        for (wj, &x) in w.iter_mut().zip(u.row(start + i)) {
            *wj += vc * x;
        }
    }
    for (i, &vi) in v.iter().enumerate() {
        let s = vi * tau;
        for (j, wj) in w.iter().enumerate() {
            u[(start + i, j)] -= s * wj;
        }
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix (diagonal `d`,
/// subdiagonal `e[0..n-1]`), accumulating rotations into row-major `z`.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>, n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        let mut iter = 0;
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= f64::EPSILON * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(LinalgError::NoConvergence {
                        routine: "hermitian eigendecomposition",
                        iterations: iter,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
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
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zk1 = z[k * n + i + 1];
                            let zk = z[k * n + i];
                            z[k * n + i + 1] = s * zk + c * zk1;
                            z[k * n + i] = c * zk - s * zk1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= f64::EPSILON * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
