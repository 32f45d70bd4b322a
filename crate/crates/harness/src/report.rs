//! CSV and metadata emission.

use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::sweep::{SweepMeta, SweepResult};

pub const CSV_HEADER: &str =
    "estimator,snr_db,rmse_deg,rmse_db,prob_resolution,crb_sqrt_deg,excluded_trials";

pub const ITERATION_CSV_HEADER: &str = "estimator,snr_db,iteration,rmse_deg,rmse_db,mean_mu_opt";

/// Nine significant digits, plain notation for moderate exponents.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent form");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-5..=12).contains(&exponent) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exponent}");
    }
    let decimals = (8 - exponent).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in &result.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.estimator,
            format_sig(c.snr_db),
            format_sig(c.rmse_deg),
            format_sig(c.rmse_db()),
            format_sig(c.prob_resolution),
            format_sig(c.crb_sqrt_deg),
            c.excluded_trials
        ));
    }
    out
}

/// One row per refinement step of every iterative estimator.
pub fn iteration_csv_string(result: &SweepResult) -> String {
    let mut out = String::from(ITERATION_CSV_HEADER);
    out.push('\n');
    for c in &result.cells {
        for (k, (&rmse, &mu)) in c.iteration_rmse_deg.iter().zip(&c.mean_mu_opt).enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.estimator,
                format_sig(c.snr_db),
                k + 1,
                format_sig(rmse),
                format_sig(20.0 * rmse.log10()),
                format_sig(mu)
            ));
        }
    }
    out
}

#[derive(Serialize)]
struct MetaDocument<'a> {
    #[serde(flatten)]
    meta: &'a SweepMeta,
    estimators: &'a [String],
    snr_db: Vec<String>,
    files: &'a [String],
}

/// JSON sidecar with the config hash, seed and the files written.
pub fn meta_json(result: &SweepResult, files: &[String]) -> String {
    let doc = MetaDocument {
        meta: &result.meta,
        estimators: &result.estimators,
        snr_db: result.snr_db.iter().map(|&s| format_sig(s)).collect(),
        files,
    };
    serde_json::to_string_pretty(&doc).expect("metadata serializes") + "\n"
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, &csv_string(result))
}
