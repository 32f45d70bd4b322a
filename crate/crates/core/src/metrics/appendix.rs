//! Empirical checks of the covariance-correction MSE inequality and the
//! trace identities behind it.

use kai_linalg::CMatrix;

use crate::array::{generate_snapshots, manifold, true_covariance, ArrayGeometry, SourceScenario, TrialSeed};
use crate::error::{CoreError, Result};
use crate::estimators::{esprit, perturbation_term, Observation, SubspaceMethod};

/// Where the projector in the perturbation term comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectorMode {
    /// Steering vectors of the ESPRIT estimates from the same data.
    Estimated,
    /// Steering vectors of the true directions.
    True,
}

impl ProjectorMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Estimated => "estimated",
            Self::True => "true",
        }
    }
}

/// Monte Carlo mean of `‖R̂' − R‖²_F − ‖R̂ − R‖²_F` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    pub mu: f64,
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    /// Trials dropped because the initial estimate failed.
    pub excluded: usize,
}

impl GapEstimate {
    /// `mean ≤ k·std_error`.
    pub fn nonpositive_within(&self, k: f64) -> bool {
        self.mean <= k * self.std_error
    }
}

/// `R̂ − R` and `V + Vᴴ` for one seeded realization.
pub struct CorrectionSample {
    pub estimate: CMatrix,
    pub error: CMatrix,
    pub correction: CMatrix,
}

pub fn correction_sample(
    geom: &ArrayGeometry,
    scenario: &SourceScenario,
    seed: TrialSeed,
    mode: ProjectorMode,
) -> Result<CorrectionSample> {
    let snapshots = generate_snapshots(geom, scenario, seed)?;
    let obs = Observation::from_snapshots(&snapshots);
    let r = true_covariance(geom, scenario)?;
    let doas = match mode {
        ProjectorMode::True => scenario.doas().to_vec(),
        ProjectorMode::Estimated => {
            esprit(&obs, scenario.source_count(), geom, SubspaceMethod::CovarianceEvd)?.angles
        }
    };
    let v = perturbation_term(&manifold(geom, &doas)?, obs.covariance())?;
    Ok(CorrectionSample {
        error: obs.covariance().try_sub(&r)?,
        correction: v.try_add(&v.adjoint())?,
        estimate: obs.covariance().clone(),
    })
}

/// Gap estimates for every `μ` in `mus`, sharing the same `trials`
/// realizations (trial `l` uses stream `l` of `base_seed`).
pub fn covariance_mse_gap_grid(
    geom: &ArrayGeometry,
    scenario: &SourceScenario,
    mus: &[f64],
    trials: usize,
    base_seed: u64,
    mode: ProjectorMode,
) -> Result<Vec<GapEstimate>> {
    if trials < 2 {
        return Err(CoreError::Config("the MSE gap needs at least 2 trials".into()));
    }
    if let Some(&bad) = mus.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(CoreError::MuOutOfRange(bad));
    }
    let mut gaps: Vec<Vec<f64>> = vec![Vec::with_capacity(trials); mus.len()];
    let mut excluded = 0;
    for l in 0..trials {
        let sample = match correction_sample(geom, scenario, TrialSeed::new(base_seed, l as u64), mode) {
            Ok(s) => s,
            Err(_) if mode == ProjectorMode::Estimated => {
                excluded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let before = sample.error.frobenius_norm_sqr();
        for (k, &mu) in mus.iter().enumerate() {
            let gap = if mu == 0.0 {
                0.0
            } else {
                (&sample.error - &sample.correction.scale_real(mu)).frobenius_norm_sqr() - before
            };
            gaps[k].push(gap);
        }
    }
    Ok(mus
        .iter()
        .zip(gaps)
        .map(|(&mu, g)| {
            let (mean, std_error) = mean_and_error(&g);
            GapEstimate {
                mu,
                mean,
                std_error,
                trials: g.len(),
                excluded,
            }
        })
        .collect())
}

/// [`covariance_mse_gap_grid`] at a single `μ`.
pub fn covariance_mse_gap(
    geom: &ArrayGeometry,
    scenario: &SourceScenario,
    mu: f64,
    trials: usize,
    base_seed: u64,
    mode: ProjectorMode,
) -> Result<GapEstimate> {
    Ok(covariance_mse_gap_grid(geom, scenario, &[mu], trials, base_seed, mode)?[0])
}

fn mean_and_error(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// `Tr(Q·Q·R·R) − Tr(Q·R·Q·R)`, nonnegative for a Hermitian projector `Q`
/// and Hermitian `R`.
pub fn trace_inequality_check(q: &CMatrix, r: &CMatrix) -> Result<f64> {
    let qq = q.matmul(q)?;
    let rr = r.matmul(r)?;
    let qr = q.matmul(r)?;
    Ok(qq.matmul(&rr)?.trace().re - qr.matmul(&qr)?.trace().re)
}

/// Relative residual of `‖A−B‖² = ‖A‖² + ‖B‖² − (Tr AᴴB + Tr ABᴴ)`.
pub fn frobenius_expansion_residual(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let lhs = a.try_sub(b)?.frobenius_norm_sqr();
    let cross = a.adjoint_mul(b)?.trace() + a.matmul(&b.adjoint())?.trace();
    let rhs = a.frobenius_norm_sqr() + b.frobenius_norm_sqr() - cross.re;
    let scale = a.frobenius_norm_sqr() + b.frobenius_norm_sqr();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(((lhs - rhs).abs() + cross.im.abs()) / scale)
}
