//! Multiplication counts of every model over a range of array sizes.

use kai_core::metrics::{ComplexityModel, ComplexityParams};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::report::format_sig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexityConfig {
    #[serde(default = "default_m_min")]
    pub m_min: u32,
    #[serde(default = "default_m_max")]
    pub m_max: u32,
    #[serde(default = "default_snapshots")]
    pub snapshots: u32,
    #[serde(default = "default_sources")]
    pub sources: u32,
    /// Reliability grid size `τ = 1/ι + 1`.
    #[serde(default = "default_tau")]
    pub tau: u32,
    /// Spectral search step in degrees.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_m_min() -> u32 {
    10
}
fn default_m_max() -> u32 {
    100
}
fn default_snapshots() -> u32 {
    25
}
fn default_sources() -> u32 {
    4
}
fn default_tau() -> u32 {
    20
}
fn default_delta() -> f64 {
    0.1
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        Self {
            m_min: default_m_min(),
            m_max: default_m_max(),
            snapshots: default_snapshots(),
            sources: default_sources(),
            tau: default_tau(),
            delta: default_delta(),
        }
    }
}

impl ComplexityConfig {
    pub fn params_at(&self, m: u32) -> Result<ComplexityParams> {
        Ok(ComplexityParams::new(m, self.snapshots, self.sources, self.tau, self.delta)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub m: u32,
    /// One count per model, in [`ComplexityModel::ALL`] order.
    pub counts: Vec<u128>,
}

impl ComplexityRow {
    pub fn count(&self, model: ComplexityModel) -> u128 {
        let k = ComplexityModel::ALL
            .iter()
            .position(|&m| m == model)
            .expect("every model is listed");
        self.counts[k]
    }

    /// MS-KAI-ESPRIT count over AVF count.
    pub fn kai_avf_ratio(&self) -> f64 {
        self.count(ComplexityModel::MsKaiEsprit) as f64 / self.count(ComplexityModel::Avf) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub config: ComplexityConfig,
    pub rows: Vec<ComplexityRow>,
}

impl ComplexityReport {
    /// The array size whose MS-KAI-ESPRIT/AVF ratio is nearest 1; the
    /// smallest such `M` on ties.
    pub fn closest_to_parity(&self) -> Option<&ComplexityRow> {
        self.rows.iter().fold(None, |best: Option<&ComplexityRow>, row| match best {
            Some(b) if (b.kai_avf_ratio() - 1.0).abs() <= (row.kai_avf_ratio() - 1.0).abs() => Some(b),
            _ => Some(row),
        })
    }

    /// Long-form CSV: `model,m,mults,log10_mults`.
    pub fn csv(&self) -> String {
        let mut out = String::from("model,m,mults,log10_mults\n");
        for (k, model) in ComplexityModel::ALL.iter().enumerate() {
            for row in &self.rows {
                let c = row.counts[k];
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    model.name(),
                    row.m,
                    c,
                    format_sig((c as f64).log10())
                ));
            }
        }
        out
    }

    /// Human-readable table of `log10` counts.
    pub fn table(&self) -> String {
        let mut out = format!("{:>5}", "M");
        for model in ComplexityModel::ALL {
            out.push_str(&format!(" {:>14}", model.name()));
        }
        out.push_str(&format!(" {:>10}\n", "kai/avf"));
        for row in &self.rows {
            out.push_str(&format!("{:>5}", row.m));
            for &c in &row.counts {
                out.push_str(&format!(" {:>14.4}", (c as f64).log10()));
            }
            out.push_str(&format!(" {:>10.4}\n", row.kai_avf_ratio()));
        }
        if let Some(best) = self.closest_to_parity() {
            out.push_str(&format!(
                "MS-KAI-ESPRIT/AVF ratio nearest 1 at M = {} ({:.4})\n",
                best.m,
                best.kai_avf_ratio()
            ));
        }
        out
    }
}

pub fn complexity_report(config: &ComplexityConfig) -> Result<ComplexityReport> {
    if config.m_min > config.m_max || config.m_min == 0 {
        return Err(HarnessError::Config(format!(
            "bad sensor range {}:{}",
            config.m_min, config.m_max
        )));
    }
    let rows = (config.m_min..=config.m_max)
        .map(|m| {
            let params = config.params_at(m)?;
            Ok(ComplexityRow {
                m,
                counts: ComplexityModel::ALL
                    .iter()
                    .map(|model| model.multiplications(&params))
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexityReport {
        config: config.clone(),
        rows,
    })
}
