use std::f64::consts::PI;

use kai_linalg::{complement_projector, inverse, projection_from_basis, CMatrix, C64};

use crate::array::{manifold, ArrayGeometry, SourceScenario};
use crate::error::{CoreError, Result};

/// Square root of the mean diagonal of the deterministic CRB for the given
/// source waveforms `S` (`P x N`), in degrees.
///
/// `CRB = σ²/(2N) · {Re[(Dᴴ·Π⊥·D) ⊙ P̂ᵀ]}⁻¹` with `P̂ = S·Sᴴ/N`, `D` the
/// derivative of the steering vectors with respect to angle in radians and
/// `Π⊥` the projector onto the orthogonal complement of the true manifold.
pub fn crb_deterministic(geom: &ArrayGeometry, scenario: &SourceScenario, sources: &CMatrix) -> Result<f64> {
    let p = scenario.source_count();
    if sources.rows() != p || sources.cols() == 0 {
        return Err(CoreError::Scenario(format!(
            "waveforms must be {p}xN, got {}x{}",
            sources.rows(),
            sources.cols()
        )));
    }
    let sigma2 = scenario.noise_variance();
    if sigma2 == 0.0 {
        return Ok(0.0);
    }
    let n = sources.cols() as f64;
    let a = manifold(geom, scenario.doas())?;
    let ratio = geom.spacing() / geom.wavelength();
    let d = CMatrix::from_fn(a.rows(), p, |m, k| {
        let theta = scenario.doas()[k].to_radians();
        C64::new(0.0, 2.0 * PI * m as f64 * ratio * theta.cos()) * a[(m, k)]
    });
    let perp = complement_projector(&projection_from_basis(&a)?);
    let h = d.adjoint_mul(&perp.matmul(&d)?)?;
    let power = sources.matmul(&sources.adjoint())?.scale_real(1.0 / n);
    let fim = CMatrix::from_fn(p, p, |i, j| C64::new((h[(i, j)] * power[(j, i)]).re, 0.0));
    let bound = inverse(&fim)?.scale_real(sigma2 / (2.0 * n));
    let mean = bound.diagonal().iter().map(|z| z.re).sum::<f64>() / p as f64;
    Ok(mean.sqrt().to_degrees())
}
