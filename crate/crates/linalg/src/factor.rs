use crate::error::{LinalgError, Result};
use crate::evd::hermitian_eigenvalues;
use crate::matrix::CMatrix;
use crate::C64;

/// Eigenvalues at or below this fraction of the largest one make a matrix
/// numerically non-positive-definite.
pub const PD_TOLERANCE: f64 = 1e-12;

/// Lower-triangular `L` with `L·Lᴴ = A` for Hermitian positive definite `A`.
pub fn cholesky_hermitian(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let a = a.hermitian_part();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite {
                eigenvalue: d,
                index: j,
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// `ln det A` as the sum of log-eigenvalues of a Hermitian positive definite
/// matrix.
///
/// Fails with the offending eigenvalue (index in descending order) when any
/// eigenvalue is at or below `PD_TOLERANCE · λ_max`.
pub fn log_det_hermitian(a: &CMatrix) -> Result<f64> {
    let values = hermitian_eigenvalues(a)?;
    let Some(&top) = values.first() else {
        return Ok(0.0);
    };
    let floor = PD_TOLERANCE * top;
    if let Some((index, &eigenvalue)) = values
        .iter()
        .enumerate()
        .find(|(_, &v)| v <= floor || v <= 0.0 || !v.is_finite())
    {
        return Err(LinalgError::NotPositiveDefinite { eigenvalue, index });
    }
    Ok(values.iter().map(|v| v.ln()).sum())
}
