//! Experiment configuration: a versioned TOML schema plus the shipped
//! presets.
//!
//! ```toml
//! schema_version = 1
//!
//! [geometry]
//! sensors = 40
//! spacing_wavelengths = 0.5      # d/λ, default 0.5
//!
//! [scenario]
//! doas = [10.2, 12.6, 15.0, 17.4]
//! snapshots = 25
//! correlation = "identity"       # "identity" (default), "strong" or a real matrix
//!
//! [sweep]
//! snr_db = [-6.0, -4.0, 0.0]     # default -6:2:20; `inf` means noiseless
//! trials = 100
//! base_seed = 1                  # default 1
//!
//! [[estimators]]
//! name = "ms-kai-esprit"
//! mu_increment = 0.05            # default 0.05
//! subspace_method = "covariance-evd"
//!
//! [output]
//! csv = "sweep.csv"              # default
//! plot_prefix = "sweep"          # default
//! per_iteration = false          # default
//! plots = true                   # default
//! ```

use std::collections::HashSet;
use std::path::Path;

use kai_core::array::{strongly_correlated_sources, ArrayGeometry, SourceScenario};
use kai_core::estimators::{EstimatorKind, EstimatorSpec, KaiConfig, MuGrid, SubspaceMethod};
use kai_linalg::CMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complexity::ComplexityConfig;
use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const PRESET_NAMES: [&str; 4] = [
    "fig1_complexity",
    "fig2_uncorrelated",
    "fig4_correlated",
    "fig5_periteration",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub geometry: GeometryConfig,
    pub scenario: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimators: Vec<EstimatorConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<ComplexityConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub sensors: usize,
    /// Sensor spacing in carrier wavelengths.
    #[serde(default = "half")]
    pub spacing_wavelengths: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Source directions in degrees, strictly ascending. Their count is `P`.
    pub doas: Vec<f64>,
    pub snapshots: usize,
    #[serde(default)]
    pub correlation: Correlation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Correlation {
    Named(NamedCorrelation),
    /// Real symmetric matrix, one row per source.
    Matrix(Vec<Vec<f64>>),
}

impl Default for Correlation {
    fn default() -> Self {
        Self::Named(NamedCorrelation::Identity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedCorrelation {
    Identity,
    /// The repaired strongly correlated four-source matrix.
    Strong,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_snr_grid")]
    pub snr_db: Vec<f64>,
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
}

/// `−6, −4, …, 20` dB.
pub fn default_snr_grid() -> Vec<f64> {
    (-3..=10).map(|k| f64::from(2 * k)).collect()
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub name: String,
    /// Column label in the outputs; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_increment: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace_method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_doas: Option<Vec<f64>>,
}

impl EstimatorConfig {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Self::default()
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    pub fn kind(&self) -> Result<EstimatorKind> {
        Ok(self.name.parse::<EstimatorKind>()?)
    }

    /// The configured estimator, rejecting options it does not take.
    pub fn spec(&self) -> Result<EstimatorSpec> {
        let kind = self.kind()?;
        let is_kai = matches!(
            kind,
            EstimatorKind::MsKaiEsprit | EstimatorKind::Iesprit | EstimatorKind::TsEsprit
        );
        let reject = |field: &str, present: bool| -> Result<()> {
            if present {
                Err(HarnessError::Config(format!("`{field}` does not apply to {kind}")))
            } else {
                Ok(())
            }
        };
        reject("mu_increment", !is_kai && self.mu_increment.is_some())?;
        reject("iterations", kind != EstimatorKind::MsKaiEsprit && self.iterations.is_some())?;
        reject(
            "subspace_method",
            !is_kai && kind != EstimatorKind::Esprit && self.subspace_method.is_some(),
        )?;
        reject("grid_step", kind != EstimatorKind::Music && self.grid_step.is_some())?;
        reject("known_doas", kind != EstimatorKind::TsEsprit && self.known_doas.is_some())?;

        let method = self
            .subspace_method
            .as_deref()
            .map(str::parse::<SubspaceMethod>)
            .transpose()?
            .unwrap_or_default();
        let kai = || -> Result<KaiConfig> {
            let mu_grid = match self.mu_increment {
                Some(i) => MuGrid::from_increment(i)?,
                None => KaiConfig::default().mu_grid,
            };
            Ok(KaiConfig {
                mu_grid,
                subspace_method: method,
                iterations: self.iterations,
            })
        };
        Ok(match kind {
            EstimatorKind::Esprit => EstimatorSpec::Esprit { method },
            EstimatorKind::MsKaiEsprit => EstimatorSpec::MsKaiEsprit(kai()?),
            EstimatorKind::Iesprit => EstimatorSpec::Iesprit(kai()?),
            EstimatorKind::TsEsprit => EstimatorSpec::TsEsprit {
                config: kai()?,
                known_doas: self.known_doas.clone().unwrap_or_default(),
            },
            EstimatorKind::Music => match self.grid_step {
                Some(grid_step) => EstimatorSpec::Music { grid_step },
                None => EstimatorSpec::default_for(kind),
            },
            EstimatorKind::RootMusic => EstimatorSpec::RootMusic,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_csv")]
    pub csv: String,
    /// Plots are written as `<prefix>_rmse.svg` and so on.
    #[serde(default = "default_prefix")]
    pub plot_prefix: String,
    #[serde(default)]
    pub per_iteration: bool,
    #[serde(default = "yes")]
    pub plots: bool,
}

fn default_csv() -> String {
    "sweep.csv".into()
}

fn default_prefix() -> String {
    "sweep".into()
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            csv: default_csv(),
            plot_prefix: default_prefix(),
            per_iteration: false,
            plots: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::parse(text, Path::new("<inline>"))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text, path)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|source| HarnessError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let geom = self.geometry()?;
        let sample_snr = self
            .sweep
            .as_ref()
            .and_then(|s| s.snr_db.first().copied())
            .unwrap_or(0.0);
        let scenario = self.scenario(sample_snr)?;
        if scenario.source_count() >= geom.sensor_count() {
            return Err(HarnessError::Config(format!(
                "{} sources need more than {} sensors",
                scenario.source_count(),
                geom.sensor_count()
            )));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.trials == 0 {
                return Err(HarnessError::Config("sweep needs at least one trial".into()));
            }
            for &snr in &sweep.snr_db {
                self.scenario(snr)?;
            }
            if sweep.snr_db.windows(2).any(|w| w[0] >= w[1]) {
                return Err(HarnessError::Config("snr_db must be strictly ascending".into()));
            }
        }
        let mut labels = HashSet::new();
        for e in &self.estimators {
            e.spec()?;
            let label = e.label();
            if label.is_empty() || label.contains([',', '"', '\n']) {
                return Err(HarnessError::Config(format!("bad estimator label `{label}`")));
            }
            if !labels.insert(label.to_string()) {
                return Err(HarnessError::Config(format!("duplicate estimator label `{label}`")));
            }
        }
        if let Some(c) = &self.complexity {
            c.params_at(c.m_min)?;
            if c.m_min > c.m_max {
                return Err(HarnessError::Config("complexity m_min exceeds m_max".into()));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        Ok(ArrayGeometry::new(
            self.geometry.sensors,
            self.geometry.spacing_wavelengths,
            1.0,
        )?)
    }

    pub fn correlation_matrix(&self) -> Result<CMatrix> {
        let p = self.scenario.doas.len();
        match &self.scenario.correlation {
            Correlation::Named(NamedCorrelation::Identity) => Ok(CMatrix::identity(p)),
            Correlation::Named(NamedCorrelation::Strong) => {
                if p != 4 {
                    return Err(HarnessError::Config(format!(
                        "the strong correlation matrix is 4x4 but there are {p} sources"
                    )));
                }
                Ok(strongly_correlated_sources())
            }
            Correlation::Matrix(rows) => CMatrix::from_real_rows(rows)
                .map_err(|e| HarnessError::Config(format!("correlation matrix: {e}"))),
        }
    }

    pub fn scenario(&self, snr_db: f64) -> Result<SourceScenario> {
        Ok(SourceScenario::new(
            self.scenario.doas.clone(),
            self.correlation_matrix()?,
            snr_db,
            self.scenario.snapshots,
        )?)
    }

    /// `(label, estimator)` pairs in configured order.
    pub fn estimator_specs(&self) -> Result<Vec<(String, EstimatorSpec)>> {
        self.estimators
            .iter()
            .map(|e| Ok((e.label().to_string(), e.spec()?)))
            .collect()
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_toml_str(preset_text(name)?)
    }
}

pub fn preset_text(name: &str) -> Result<&'static str> {
    Ok(match name {
        "fig1_complexity" => include_str!("../presets/fig1_complexity.toml"),
        "fig2_uncorrelated" => include_str!("../presets/fig2_uncorrelated.toml"),
        "fig4_correlated" => include_str!("../presets/fig4_correlated.toml"),
        "fig5_periteration" => include_str!("../presets/fig5_periteration.toml"),
        other => {
            return Err(HarnessError::Config(format!(
                "unknown preset `{other}` (available: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}
