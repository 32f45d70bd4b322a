//! Empirical verification of the covariance-correction MSE inequality.

use std::fmt::Write as _;

use kai_core::array::{ArrayGeometry, SourceScenario, TrialSeed};
use kai_core::CoreError;
use kai_core::metrics::{
    correction_sample, covariance_mse_gap_grid, frobenius_expansion_residual,
    trace_inequality_check, GapEstimate, ProjectorMode,
};
use kai_linalg::{projection_from_basis, CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;

/// Gap means above this many standard errors count as violations.
pub const GAP_TOLERANCE_SE: f64 = 2.0;
pub const EXPANSION_TOLERANCE: f64 = 1e-9;
/// Relative to `‖R‖²_F`.
pub const TRACE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixConfig {
    pub sensors: usize,
    pub doas: Vec<f64>,
    pub snapshots: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub mus: Vec<f64>,
    pub trace_draws: usize,
    pub max_dimension: usize,
}

impl Default for AppendixConfig {
    fn default() -> Self {
        Self {
            sensors: 8,
            doas: vec![10.2, 12.6],
            snapshots: 20,
            snr_db: 0.0,
            trials: 1000,
            base_seed: 1,
            mus: (0..=10).map(|k| f64::from(k) / 10.0).collect(),
            trace_draws: 1000,
            max_dimension: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub mode: ProjectorMode,
    pub gap: GapEstimate,
}

impl GapRow {
    pub fn passes(&self) -> bool {
        self.gap.nonpositive_within(GAP_TOLERANCE_SE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub config: AppendixConfig,
    pub gaps: Vec<GapRow>,
    pub expansion_pairs: usize,
    pub expansion_max_residual: f64,
    pub trace_draws: usize,
    /// Smallest `(Tr QQRR − Tr QRQR) / ‖R‖²_F` over the draws.
    pub trace_min_normalized: f64,
}

impl AppendixReport {
    pub fn expansion_passes(&self) -> bool {
        self.expansion_max_residual < EXPANSION_TOLERANCE
    }

    pub fn trace_passes(&self) -> bool {
        self.trace_min_normalized >= -TRACE_TOLERANCE
    }

    /// True-projector gap rows above tolerance, or a failed identity check.
    /// Estimated-projector rows are informational.
    pub fn violation(&self) -> bool {
        self.gaps
            .iter()
            .any(|r| r.mode == ProjectorMode::True && !r.passes())
            || !self.expansion_passes()
            || !self.trace_passes()
    }

    pub fn table(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "M = {}, DOAs = {:?}, N = {}, SNR = {} dB, L = {}\n",
            c.sensors, c.doas, c.snapshots, c.snr_db, c.trials
        );
        let _ = writeln!(
            out,
            "{:<10} {:>5} {:>14} {:>12} {:>9} {:>6}",
            "mode", "mu", "mean gap", "std error", "excluded", "result"
        );
        for row in &self.gaps {
            let _ = writeln!(
                out,
                "{:<10} {:>5.2} {:>14.6e} {:>12.4e} {:>9} {:>6}",
                row.mode.name(),
                row.gap.mu,
                row.gap.mean,
                row.gap.std_error,
                row.gap.excluded,
                verdict(row.passes(), row.mode == ProjectorMode::True)
            );
        }
        let _ = writeln!(
            out,
            "Frobenius expansion: max residual {:.3e} over {} pairs {}",
            self.expansion_max_residual,
            self.expansion_pairs,
            verdict(self.expansion_passes(), true)
        );
        let _ = writeln!(
            out,
            "trace inequality: min normalized value {:.3e} over {} draws {}",
            self.trace_min_normalized,
            self.trace_draws,
            verdict(self.trace_passes(), true)
        );
        out
    }
}

fn verdict(pass: bool, enforced: bool) -> &'static str {
    match (pass, enforced) {
        (true, _) => "PASS",
        (false, true) => "FAIL",
        (false, false) => "info",
    }
}

pub fn verify_appendix(config: &AppendixConfig) -> Result<AppendixReport> {
    let geom = ArrayGeometry::half_wavelength(config.sensors)?;
    let scenario = SourceScenario::uncorrelated(config.doas.clone(), config.snr_db, config.snapshots)?;

    let mut gaps = Vec::with_capacity(2 * config.mus.len());
    for mode in [ProjectorMode::True, ProjectorMode::Estimated] {
        let grid = covariance_mse_gap_grid(
            &geom,
            &scenario,
            &config.mus,
            config.trials,
            config.base_seed,
            mode,
        )?;
        gaps.extend(grid.into_iter().map(|gap| GapRow { mode, gap }));
    }

    let mut expansion_pairs = 0;
    let mut expansion_max_residual = 0.0_f64;
    for l in 0..config.trials {
        let seed = TrialSeed::new(config.base_seed, l as u64);
        let sample = correction_sample(&geom, &scenario, seed, ProjectorMode::True)?;
        for &mu in config.mus.iter().filter(|&&mu| mu > 0.0) {
            let residual = frobenius_expansion_residual(&sample.error, &sample.correction.scale_real(mu))?;
            expansion_max_residual = expansion_max_residual.max(residual);
            expansion_pairs += 1;
        }
    }

    let trace_min_normalized =
        trace_inequality_draws(config.trace_draws, config.max_dimension, config.base_seed)?;

    Ok(AppendixReport {
        config: config.clone(),
        gaps,
        expansion_pairs,
        expansion_max_residual,
        trace_draws: config.trace_draws,
        trace_min_normalized,
    })
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Minimum of the normalized trace inequality over random projector/PSD
/// pairs of dimension `2..=max_dimension`.
pub fn trace_inequality_draws(draws: usize, max_dimension: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let max_dimension = max_dimension.max(2);
    let mut min = f64::INFINITY;
    for _ in 0..draws {
        let m = rng.random_range(2..=max_dimension);
        let k = rng.random_range(1..m);
        let q = projection_from_basis(&gaussian_matrix(&mut rng, m, k)).map_err(CoreError::from)?;
        let g = gaussian_matrix(&mut rng, m, m);
        let r = g.matmul(&g.adjoint()).map_err(CoreError::from)?;
        let value = trace_inequality_check(&q, &r)? / r.frobenius_norm_sqr();
        min = min.min(value);
    }
    Ok(min)
}
