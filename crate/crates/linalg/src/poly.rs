use crate::eig::eigenvalues;
use crate::error::{LinalgError, Result};
use crate::matrix::CMatrix;
use crate::C64;

/// Roots of `c₀zᵈ + c₁zᵈ⁻¹ + … + c_d` (coefficients highest degree first),
/// from the eigenvalues of the companion matrix.
///
/// A zero leading coefficient or a constant polynomial is rejected.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let c = coeffs;
    if c.len() < 2 || c[0] == C64::new(0.0, 0.0) || !(c[0].re.is_finite() && c[0].im.is_finite()) {
        return Err(LinalgError::DegeneratePolynomial);
    }
    let degree = c.len() - 1;
    let lead = c[0];
    let mut companion = CMatrix::zeros(degree, degree);
    for j in 0..degree {
        companion[(0, j)] = -c[j + 1] / lead;
    }
    for i in 1..degree {
        companion[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    eigenvalues(&companion)
}

/// Horner evaluation with coefficients highest degree first.
pub fn polynomial_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}
