//! Householder QR with column pivoting, and what is built on it: least
//! squares and orthogonal projectors.

use crate::error::{LinalgError, Result};
use crate::matrix::CMatrix;
use crate::C64;

/// Reciprocal of the largest condition number treated as full rank.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Compact pivoted QR factorization `A·Π = Q·R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// Householder vectors below the diagonal, R on and above it.
    packed: CMatrix,
    taus: Vec<f64>,
    /// `perm[k]` is the original column placed at position `k`.
    perm: Vec<usize>,
}

impl PivotedQr {
    pub fn new(a: &CMatrix) -> Self {
        let m = a.rows();
        let n = a.cols();
        let mut qr = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<f64> = (0..n).map(|j| qr.column_norm(j).powi(2)).collect();
        let steps = m.min(n);
        let mut taus = Vec::with_capacity(steps);

        for k in 0..steps {
            // Pivot the column with the largest remaining norm to position k.
            let (p, _) = norms[k..]
                .iter()
                .enumerate()
                .fold((0, -1.0), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
            let p = p + k;
            if p != k {
                for i in 0..m {
                    let tmp = qr[(i, k)];
                    qr[(i, k)] = qr[(i, p)];
                    qr[(i, p)] = tmp;
                }
                norms.swap(k, p);
                perm.swap(k, p);
            }

            let alpha = (k..m).map(|i| qr[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if alpha == 0.0 {
                taus.push(0.0);
                continue;
            }
            let x0 = qr[(k, k)];
            let phase = if x0.norm() > 0.0 {
                x0 / x0.norm()
            } else {
                C64::new(1.0, 0.0)
            };
            // v = x + phase·α·e₁, normalized so v₀ = 1.
            let v0 = x0 + phase * alpha;
            for i in k + 1..m {
                qr[(i, k)] /= v0;
            }
            let vnorm2 = 1.0 + (k + 1..m).map(|i| qr[(i, k)].norm_sqr()).sum::<f64>();
            let tau = 2.0 / vnorm2;
            qr[(k, k)] = -phase * alpha;

            for j in k + 1..n {
                let mut dot = qr[(k, j)];
                for i in k + 1..m {
                    dot += qr[(i, k)].conj() * qr[(i, j)];
                }
                let s = dot * tau;
                qr[(k, j)] -= s;
                for i in k + 1..m {
                    let vi = qr[(i, k)];
                    qr[(i, j)] -= vi * s;
                }
                norms[j] = (k + 1..m).map(|i| qr[(i, j)].norm_sqr()).sum();
            }
            taus.push(tau);
        }
        Self {
            packed: qr,
            taus,
            perm,
        }
    }

    /// Moduli of the diagonal of R, non-increasing up to rounding.
    pub fn r_diagonal(&self) -> Vec<f64> {
        (0..self.taus.len()).map(|k| self.packed[(k, k)].norm()).collect()
    }

    /// Number of diagonal entries of R above `RANK_TOLERANCE` times the
    /// largest one.
    pub fn rank(&self) -> usize {
        let d = self.r_diagonal();
        let top = d.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        d.iter().filter(|&&x| x > RANK_TOLERANCE * top).count()
    }

    /// `Qᴴ · B` in place.
    fn apply_qh(&self, b: &mut CMatrix) {
        let m = self.packed.rows();
        for (k, &tau) in self.taus.iter().enumerate() {
            if tau == 0.0 {
                continue;
            }
            for j in 0..b.cols() {
                let mut dot = b[(k, j)];
                for i in k + 1..m {
                    dot += self.packed[(i, k)].conj() * b[(i, j)];
                }
                let s = dot * tau;
                b[(k, j)] -= s;
                for i in k + 1..m {
                    let vi = self.packed[(i, k)];
                    b[(i, j)] -= vi * s;
                }
            }
        }
    }

    /// The first `k` columns of Q.
    pub fn thin_q(&self, k: usize) -> CMatrix {
        let m = self.packed.rows();
        let mut q = CMatrix::zeros(m, k);
        for i in 0..k {
            q[(i, i)] = C64::new(1.0, 0.0);
        }
        // Q = H₀H₁…; apply in reverse to the identity columns.
        for (kk, &tau) in self.taus.iter().enumerate().rev() {
            if tau == 0.0 {
                continue;
            }
            for j in 0..k {
                let mut dot = q[(kk, j)];
                for i in kk + 1..m {
                    dot += self.packed[(i, kk)].conj() * q[(i, j)];
                }
                let s = dot * tau;
                q[(kk, j)] -= s;
                for i in kk + 1..m {
                    let vi = self.packed[(i, kk)];
                    q[(i, j)] -= vi * s;
                }
            }
        }
        q
    }

    fn require_full_column_rank(&self) -> Result<()> {
        let n = self.packed.cols();
        let rank = self.rank();
        if self.packed.rows() < n || rank < n {
            return Err(LinalgError::Singular { rank, required: n });
        }
        Ok(())
    }
}

/// `argmin_X ‖B − A·X‖_F` for full-column-rank `A`.
pub fn least_squares(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.rows() != b.rows() {
        return Err(LinalgError::Dimension(format!(
            "least squares with {}x{} system and {}x{} right-hand side",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.cols();
    let qr = PivotedQr::new(a);
    qr.require_full_column_rank()?;
    let mut qtb = b.clone();
    qr.apply_qh(&mut qtb);

    // Back substitution R·Y = (QᴴB)[0..n], then undo the pivoting.
    let r = &qr.packed;
    let mut y = CMatrix::zeros(n, b.cols());
    for j in 0..b.cols() {
        for i in (0..n).rev() {
            let mut acc = qtb[(i, j)];
            for k in i + 1..n {
                acc -= r[(i, k)] * y[(k, j)];
            }
            y[(i, j)] = acc / r[(i, i)];
        }
    }
    let mut x = CMatrix::zeros(n, b.cols());
    for (pos, &orig) in qr.perm.iter().enumerate() {
        for j in 0..b.cols() {
            x[(orig, j)] = y[(pos, j)];
        }
    }
    Ok(x)
}

/// Inverse of a square nonsingular matrix, via least squares against I.
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(format!(
            "cannot invert a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    least_squares(a, &CMatrix::identity(a.rows()))
}

/// Orthonormal basis (`M x P`) for the column space of a full-column-rank
/// `M x P` matrix.
pub fn orthonormal_basis(a: &CMatrix) -> Result<CMatrix> {
    let qr = PivotedQr::new(a);
    qr.require_full_column_rank()?;
    Ok(qr.thin_q(a.cols()))
}

/// `A (AᴴA)⁻¹ Aᴴ`, the orthogonal projector onto range(A), computed as
/// `Q₁Q₁ᴴ` from a thin QR and symmetrized exactly.
pub fn projection_from_basis(a: &CMatrix) -> Result<CMatrix> {
    if a.cols() > a.rows() {
        return Err(LinalgError::Singular {
            rank: a.rows(),
            required: a.cols(),
        });
    }
    let q = orthonormal_basis(a)?;
    let m = a.rows();
    let p = q.cols();
    let mut out = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..p {
                acc += q[(i, k)] * q[(j, k)].conj();
            }
            if i == j {
                out[(i, i)] = C64::new(acc.re, 0.0);
            } else {
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
        }
    }
    Ok(out)
}

/// `I − Q`.
pub fn complement_projector(q: &CMatrix) -> CMatrix {
    &CMatrix::identity(q.rows()) - q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_system_returns_rhs() {
        let b = CMatrix::from_fn(3, 2, |i, j| C64::new(i as f64, j as f64 + 0.5));
        let x = least_squares(&CMatrix::identity(3), &b).unwrap();
        assert!((&x - &b).frobenius_norm() < 1e-14);
    }

    #[test]
    fn two_point_mean() {
        let a = CMatrix::column_vector(&[c(1.0), c(1.0)]);
        let b = CMatrix::column_vector(&[c(1.0), c(3.0)]);
        let x = least_squares(&a, &b).unwrap();
        assert!((x[(0, 0)] - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn rank_deficient_reports_rank() {
        let a = CMatrix::from_fn(4, 2, |i, _| c(i as f64 + 1.0));
        let err = least_squares(&a, &CMatrix::zeros(4, 1)).unwrap_err();
        assert_eq!(err, LinalgError::Singular { rank: 1, required: 2 });
    }

    #[test]
    fn projector_of_leading_identity_columns() {
        let a = CMatrix::identity(4).leading_columns(2);
        let q = projection_from_basis(&a).unwrap();
        let expected = CMatrix::from_real_diag(&[1.0, 1.0, 0.0, 0.0]);
        assert!((&q - &expected).frobenius_norm() < 1e-14);
    }

    #[test]
    fn inverse_of_diagonal() {
        let inv = inverse(&CMatrix::from_real_diag(&[2.0, 4.0])).unwrap();
        assert!((&inv - &CMatrix::from_real_diag(&[0.5, 0.25])).frobenius_norm() < 1e-15);
    }
}
