//! Subspace DOA estimators sharing one observation type and one result type.

mod esprit;
mod kai;
mod music;

use std::fmt;
use std::str::FromStr;

use kai_linalg::CMatrix;

use crate::array::{ArrayGeometry, SnapshotSet};
use crate::error::{CoreError, Result};

pub use esprit::{esprit, signal_subspace, SubspaceMethod};
pub use kai::{
    estimate_amplitudes, iesprit, modified_covariance, ms_kai_esprit, noise_component,
    perturbation_term, sml_objective, ts_esprit, IterationRecord, KaiConfig, KaiDiagnostics,
    MuGrid, ObjectiveSample, DEFAULT_MU_INCREMENT,
};
pub use music::{music, root_music, DEFAULT_GRID_STEP};

/// What an estimator sees: the sample covariance and, when available, the
/// raw snapshots it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    covariance: CMatrix,
    data: Option<CMatrix>,
}

impl Observation {
    pub fn from_snapshots(snapshots: &SnapshotSet) -> Self {
        Self {
            covariance: snapshots.sample_covariance(),
            data: Some(snapshots.data.clone()),
        }
    }

    /// A covariance without snapshots; the direct-SVD path is unavailable.
    pub fn from_covariance(covariance: CMatrix) -> Result<Self> {
        if !covariance.is_square() || !covariance.is_hermitian(1e-10) {
            return Err(CoreError::Config(
                "covariance must be a square Hermitian matrix".into(),
            ));
        }
        Ok(Self {
            covariance: covariance.hermitian_part(),
            data: None,
        })
    }

    pub fn covariance(&self) -> &CMatrix {
        &self.covariance
    }

    pub fn data(&self) -> Option<&CMatrix> {
        self.data.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Esprit,
    MsKaiEsprit,
    Iesprit,
    TsEsprit,
    Music,
    RootMusic,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 6] = [
        Self::Esprit,
        Self::MsKaiEsprit,
        Self::Iesprit,
        Self::TsEsprit,
        Self::Music,
        Self::RootMusic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Esprit => "esprit",
            Self::MsKaiEsprit => "ms-kai-esprit",
            Self::Iesprit => "iesprit",
            Self::TsEsprit => "ts-esprit",
            Self::Music => "music",
            Self::RootMusic => "root-music",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CoreError::UnknownEstimator(s.to_string()))
    }
}

/// `P` directions in degrees, ascending, tagged with the estimator that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaEstimate {
    pub angles: Vec<f64>,
    pub estimator: EstimatorKind,
    pub diagnostics: Option<KaiDiagnostics>,
    pub warnings: Vec<String>,
}

impl DoaEstimate {
    pub(crate) fn new(mut angles: Vec<f64>, estimator: EstimatorKind) -> Self {
        angles.sort_by(f64::total_cmp);
        Self {
            angles,
            estimator,
            diagnostics: None,
            warnings: Vec::new(),
        }
    }
}

/// A fully configured estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec {
    Esprit { method: SubspaceMethod },
    MsKaiEsprit(KaiConfig),
    Iesprit(KaiConfig),
    TsEsprit { config: KaiConfig, known_doas: Vec<f64> },
    Music { grid_step: f64 },
    RootMusic,
}

impl EstimatorSpec {
    /// The estimator with its default options.
    pub fn default_for(kind: EstimatorKind) -> Self {
        match kind {
            EstimatorKind::Esprit => Self::Esprit {
                method: SubspaceMethod::default(),
            },
            EstimatorKind::MsKaiEsprit => Self::MsKaiEsprit(KaiConfig::default()),
            EstimatorKind::Iesprit => Self::Iesprit(KaiConfig::default()),
            EstimatorKind::TsEsprit => Self::TsEsprit {
                config: KaiConfig::default(),
                known_doas: Vec::new(),
            },
            EstimatorKind::Music => Self::Music {
                grid_step: DEFAULT_GRID_STEP,
            },
            EstimatorKind::RootMusic => Self::RootMusic,
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        match self {
            Self::Esprit { .. } => EstimatorKind::Esprit,
            Self::MsKaiEsprit(_) => EstimatorKind::MsKaiEsprit,
            Self::Iesprit(_) => EstimatorKind::Iesprit,
            Self::TsEsprit { .. } => EstimatorKind::TsEsprit,
            Self::Music { .. } => EstimatorKind::Music,
            Self::RootMusic => EstimatorKind::RootMusic,
        }
    }

    pub fn estimate(
        &self,
        obs: &Observation,
        sources: usize,
        geom: &ArrayGeometry,
    ) -> Result<DoaEstimate> {
        match self {
            Self::Esprit { method } => esprit(obs, sources, geom, *method),
            Self::MsKaiEsprit(cfg) => ms_kai_esprit(obs, sources, geom, cfg),
            Self::Iesprit(cfg) => iesprit(obs, sources, geom, cfg),
            Self::TsEsprit { config, known_doas } => {
                ts_esprit(obs, sources, geom, config, known_doas)
            }
            Self::Music { grid_step } => music(obs.covariance(), sources, geom, *grid_step),
            Self::RootMusic => root_music(obs.covariance(), sources, geom),
        }
    }
}

fn check_source_count(sources: usize, geom: &ArrayGeometry) -> Result<()> {
    if sources == 0 || sources >= geom.sensor_count() {
        return Err(CoreError::Config(format!(
            "source count {sources} must lie in 1..{}",
            geom.sensor_count()
        )));
    }
    Ok(())
}
