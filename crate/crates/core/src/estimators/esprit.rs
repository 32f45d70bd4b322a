use std::fmt;
use std::str::FromStr;

use kai_linalg::{eigenvalues, hermitian_evd, least_squares, svd, CMatrix};

use super::{check_source_count, DoaEstimate, EstimatorKind, Observation};
use crate::array::ArrayGeometry;
use crate::error::{CoreError, Result};

/// How the signal subspace is extracted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum SubspaceMethod {
    /// Leading eigenvectors of the sample covariance.
    #[default]
    CovarianceEvd,
    /// Leading left singular vectors of the data matrix.
    DirectSvd,
}

impl SubspaceMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::CovarianceEvd => "covariance-evd",
            Self::DirectSvd => "direct-svd",
        }
    }
}

impl fmt::Display for SubspaceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SubspaceMethod {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "covariance-evd" => Ok(Self::CovarianceEvd),
            "direct-svd" => Ok(Self::DirectSvd),
            other => Err(CoreError::Config(format!("unknown subspace method `{other}`"))),
        }
    }
}

/// `M x P` orthonormal basis of the estimated signal subspace.
pub fn signal_subspace(obs: &Observation, sources: usize, method: SubspaceMethod) -> Result<CMatrix> {
    match method {
        SubspaceMethod::CovarianceEvd => covariance_subspace(obs.covariance(), sources),
        SubspaceMethod::DirectSvd => {
            let x = obs.data().ok_or_else(|| {
                CoreError::Config("direct-svd needs the snapshot matrix".into())
            })?;
            let s = svd(x)?;
            if s.u.cols() < sources {
                return Err(CoreError::Config(format!(
                    "{} snapshots cannot span a {sources}-dimensional subspace",
                    x.cols()
                )));
            }
            Ok(s.u.leading_columns(sources))
        }
    }
}

pub(crate) fn covariance_subspace(r: &CMatrix, sources: usize) -> Result<CMatrix> {
    Ok(hermitian_evd(r)?.leading_vectors(sources))
}

/// Shift invariance between the first and last `M−1` rows of `Us`.
fn angles_from_subspace(us: &CMatrix, geom: &ArrayGeometry) -> Result<Vec<f64>> {
    let m = us.rows();
    let p = us.cols();
    let upper = us.submatrix(0, m - 1, 0, p);
    let lower = us.submatrix(1, m, 0, p);
    let psi = least_squares(&upper, &lower)?;
    let mut angles = eigenvalues(&psi)?
        .into_iter()
        .map(|z| geom.angle_from_frequency(z.arg()))
        .collect::<Result<Vec<_>>>()?;
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// ESPRIT on a covariance matrix, which need not be positive definite.
pub(crate) fn esprit_covariance(r: &CMatrix, sources: usize, geom: &ArrayGeometry) -> Result<Vec<f64>> {
    angles_from_subspace(&covariance_subspace(r, sources)?, geom)
}

pub fn esprit(
    obs: &Observation,
    sources: usize,
    geom: &ArrayGeometry,
    method: SubspaceMethod,
) -> Result<DoaEstimate> {
    check_source_count(sources, geom)?;
    check_dimension(obs, geom)?;
    let us = signal_subspace(obs, sources, method)?;
    let angles = angles_from_subspace(&us, geom)?;
    Ok(DoaEstimate::new(angles, EstimatorKind::Esprit))
}

pub(crate) fn check_dimension(obs: &Observation, geom: &ArrayGeometry) -> Result<()> {
    if obs.covariance().rows() != geom.sensor_count() {
        return Err(CoreError::Config(format!(
            "covariance is {}x{} but the array has {} sensors",
            obs.covariance().rows(),
            obs.covariance().cols(),
            geom.sensor_count()
        )));
    }
    Ok(())
}
