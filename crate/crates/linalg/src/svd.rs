//! Thin singular value decomposition by one-sided (Hestenes) Jacobi.

use crate::error::{LinalgError, Result};
use crate::evd::normalize_phase;
use crate::matrix::CMatrix;
use crate::C64;

const MAX_SWEEPS: usize = 80;

/// `A = U · diag(σ) · Vᴴ` with `k = min(rows, cols)` singular triplets.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x k`, orthonormal columns.
    pub u: CMatrix,
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// `cols x k`, orthonormal columns.
    pub v: CMatrix,
}

impl Svd {
    /// `U · diag(σ) · Vᴴ`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            for i in 0..us.rows() {
                us[(i, j)] *= s;
            }
        }
        &us * &self.v.adjoint()
    }

    /// Ratio of largest to smallest singular value (infinite when singular).
    pub fn condition_number(&self) -> f64 {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 1.0,
        }
    }
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    if a.rows() >= a.cols() {
        tall_svd(a)
    } else {
        let t = tall_svd(&a.adjoint())?;
        Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

fn tall_svd(a: &CMatrix) -> Result<Svd> {
    let m = a.rows();
    let n = a.cols();
    // Columns are kept contiguous for the rotation kernel.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    let tol = f64::EPSILON * (m.max(1) as f64).sqrt();
    // Columns at rounding level relative to the whole matrix are left alone.
    let floor = (f64::EPSILON * a.frobenius_norm()).powi(2);
    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                routine: "singular value decomposition",
                iterations: sweeps,
            });
        }
        sweeps += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = C64::new(0.0, 0.0);
                    for (x, y) in cp.iter().zip(cq) {
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() || alpha.min(beta) <= floor {
                    continue;
                }
                converged = false;
                // Strip the phase of γ so the 2x2 Gram block is real, then
                // apply a real Jacobi rotation.
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, phase, c, s);
                rotate(&mut vcols, p, q, phase, c, s);
            }
        }
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let smax = norms.iter().copied().fold(0.0, f64::max);
    let negligible = smax * f64::EPSILON * (m.max(n) as f64);
    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut v_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for &j in &order {
        let s = norms[j];
        let mut v = vcols[j].clone();
        if s > negligible && s > 0.0 {
            let mut u: Vec<C64> = cols[j].iter().map(|x| x / s).collect();
            align_phase(&mut u, &mut v);
            u_cols.push(u);
            values.push(s);
        } else {
            deficient.push(u_cols.len());
            u_cols.push(Vec::new());
            values.push(s);
        }
        v_cols.push(v);
    }
    // Null directions get an arbitrary orthonormal completion.
    for slot in deficient {
        let filled: Vec<Vec<C64>> = u_cols.iter().filter(|c| !c.is_empty()).cloned().collect();
        u_cols[slot] = orthonormal_completion(m, &filled);
        // Keep U·Σ·Vᴴ intact: σ is negligible, so only orthonormality matters.
    }

    let u = CMatrix::from_columns(&u_cols)?;
    let v = CMatrix::from_columns(&v_cols)?;
    Ok(Svd {
        u,
        singular_values: values,
        v,
    })
}

fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, phase: C64, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * phase;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Applies the EVD phase convention to `u` and the same phase to `v`.
fn align_phase(u: &mut [C64], v: &mut [C64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, x) in u.iter().enumerate() {
        let mag = x.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag <= 0.0 {
        return;
    }
    let phase = u[best].conj() / best_mag;
    normalize_phase(u);
    for x in v.iter_mut() {
        *x *= phase;
    }
}

/// A unit vector orthogonal to every vector in `basis`, by Gram-Schmidt on
/// the standard basis.
pub(crate) fn orthonormal_completion(dim: usize, basis: &[Vec<C64>]) -> Vec<C64> {
    let mut best: Option<(f64, Vec<C64>)> = None;
    for k in 0..dim {
        let mut w = vec![C64::new(0.0, 0.0); dim];
        w[k] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in basis {
                let proj: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(n, _)| norm > *n) {
            best = Some((norm, w));
        }
        if norm > 0.5 {
            break;
        }
    }
    let (norm, mut w) = best.expect("dimension must be positive");
    for x in w.iter_mut() {
        *x /= norm;
    }
    normalize_phase(&mut w);
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_has_zero_singular_values() {
        let s = svd(&CMatrix::zeros(2, 3)).unwrap();
        assert_eq!(s.singular_values, vec![0.0, 0.0]);
        let gram = s.u.adjoint_mul(&s.u).unwrap();
        assert!((&gram - &CMatrix::identity(2)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn diagonal_singular_values() {
        let s = svd(&CMatrix::from_real_diag(&[1.0, 2.0])).unwrap();
        assert!((s.singular_values[0] - 2.0).abs() < 1e-15);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_reconstruction() {
        let a = CMatrix::from_fn(4, 3, |i, j| C64::new((i + 1) as f64, 0.0) * C64::new(1.0, j as f64));
        let s = svd(&a).unwrap();
        assert!(s.singular_values[1] < 1e-12 * s.singular_values[0], "{:?}", s.singular_values);
        assert!((&s.reconstruct() - &a).frobenius_norm() < 1e-12 * a.frobenius_norm());
        let gram = s.u.adjoint_mul(&s.u).unwrap();
        assert!((&gram - &CMatrix::identity(3)).frobenius_norm() < 1e-10);
    }
}
