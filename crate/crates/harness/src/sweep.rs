//! Seeded Monte Carlo sweeps over SNR.
//!
//! Trial `l` draws its data from stream `l` of the base seed at every SNR,
//! so the source waveforms and the unit-variance noise are shared across
//! the SNR grid and every estimator sees the same snapshots.

use kai_core::array::{generate_snapshots, TrialSeed};
use kai_core::estimators::{EstimatorSpec, Observation};
use kai_core::metrics::{crb_deterministic, is_resolved, rmse_from_sums};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// One estimator run scored against the truth. `None` marks a failed run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialScore {
    pub squared_error_sum: f64,
    pub resolved: bool,
    /// Per refinement step, for the iterative estimators.
    pub iteration_squared_errors: Vec<f64>,
    pub mu_opt: Vec<f64>,
}

/// Aggregates for one `(estimator, SNR)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub estimator: String,
    pub snr_db: f64,
    /// NaN when every trial failed.
    pub rmse_deg: f64,
    pub prob_resolution: f64,
    pub crb_sqrt_deg: f64,
    pub excluded_trials: usize,
    pub iteration_rmse_deg: Vec<f64>,
    pub mean_mu_opt: Vec<f64>,
    /// Per-trial scores in trial order.
    pub trials: Vec<Option<TrialScore>>,
}

impl Cell {
    pub fn rmse_db(&self) -> f64 {
        20.0 * self.rmse_deg.log10()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMeta {
    pub config_hash: String,
    pub base_seed: u64,
    pub trials: usize,
    pub rng: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub estimators: Vec<String>,
    pub snr_db: Vec<f64>,
    /// Estimator-major, SNR ascending.
    pub cells: Vec<Cell>,
    pub meta: SweepMeta,
}

impl SweepResult {
    pub fn cell(&self, estimator: &str, snr_db: f64) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && c.snr_db == snr_db)
    }

    /// Cells of one estimator in SNR order.
    pub fn series<'a>(&'a self, estimator: &'a str) -> impl Iterator<Item = &'a Cell> + 'a {
        self.cells.iter().filter(move |c| c.estimator == estimator)
    }
}

/// Runs every configured estimator on `trials` seeded datasets per SNR.
///
/// `threads` fixes the worker count; `None` uses the global pool. The
/// result does not depend on it.
pub fn run_sweep(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Config("the configuration has no [sweep] section".into()))?;
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Threads(e.to_string()))?
            .install(|| sweep_in_pool(cfg, sweep.trials, sweep.base_seed, &sweep.snr_db)),
        None => sweep_in_pool(cfg, sweep.trials, sweep.base_seed, &sweep.snr_db),
    }
}

fn sweep_in_pool(cfg: &ExperimentConfig, trials: usize, base_seed: u64, snrs: &[f64]) -> Result<SweepResult> {
    let geom = cfg.geometry()?;
    let specs = cfg.estimator_specs()?;
    let scenarios = snrs
        .iter()
        .map(|&snr| cfg.scenario(snr))
        .collect::<Result<Vec<_>>>()?;
    let truth = cfg.scenario.doas.clone();
    let p = truth.len();

    let jobs: Vec<(usize, usize)> = (0..snrs.len())
        .flat_map(|s| (0..trials).map(move |l| (s, l)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(s, l)| {
            let set = generate_snapshots(&geom, &scenarios[s], TrialSeed::new(base_seed, l as u64))?;
            let obs = Observation::from_snapshots(&set);
            Ok(specs
                .iter()
                .map(|(_, spec)| score(spec, &obs, &truth, &geom))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<Vec<Option<TrialScore>>>>>()?;

    let crb: Vec<f64> = scenarios
        .iter()
        .map(|sc| {
            generate_snapshots(&geom, sc, TrialSeed::new(base_seed, 0))
                .and_then(|set| crb_deterministic(&geom, sc, &set.sources))
                .unwrap_or(f64::NAN)
        })
        .collect();

    let mut cells = Vec::with_capacity(specs.len() * snrs.len());
    for (e, (label, _)) in specs.iter().enumerate() {
        for (s, &snr_db) in snrs.iter().enumerate() {
            let scores: Vec<Option<TrialScore>> = outcomes[s * trials..(s + 1) * trials]
                .iter()
                .map(|per_estimator| per_estimator[e].clone())
                .collect();
            cells.push(aggregate(label, snr_db, crb[s], scores, p));
        }
    }

    Ok(SweepResult {
        estimators: specs.into_iter().map(|(label, _)| label).collect(),
        snr_db: snrs.to_vec(),
        cells,
        meta: SweepMeta {
            config_hash: cfg.hash(),
            base_seed,
            trials,
            rng: "chacha8",
            version: env!("CARGO_PKG_VERSION"),
        },
    })
}

fn squared_error(truth: &[f64], angles: &[f64]) -> f64 {
    if truth.len() != angles.len() {
        return f64::INFINITY;
    }
    truth.iter().zip(angles).map(|(t, a)| (t - a).powi(2)).sum()
}

fn score(
    spec: &EstimatorSpec,
    obs: &Observation,
    truth: &[f64],
    geom: &kai_core::array::ArrayGeometry,
) -> Option<TrialScore> {
    let est = spec.estimate(obs, truth.len(), geom).ok()?;
    let (iteration_squared_errors, mu_opt) = est
        .diagnostics
        .as_ref()
        .map(|d| {
            d.iterations
                .iter()
                .map(|it| (squared_error(truth, &it.angles), it.mu_opt))
                .unzip()
        })
        .unwrap_or_default();
    Some(TrialScore {
        squared_error_sum: squared_error(truth, &est.angles),
        resolved: is_resolved(truth, &est.angles),
        iteration_squared_errors,
        mu_opt,
    })
}

fn aggregate(label: &str, snr_db: f64, crb: f64, trials: Vec<Option<TrialScore>>, p: usize) -> Cell {
    let ok: Vec<&TrialScore> = trials.iter().flatten().collect();
    let excluded_trials = trials.len() - ok.len();
    let rmse = |sums: Vec<f64>| rmse_from_sums(sums, p).map_or(f64::NAN, |r| r.degrees);
    let rmse_deg = rmse(ok.iter().map(|t| t.squared_error_sum).collect());
    let resolved = ok.iter().filter(|t| t.resolved).count();
    let steps = ok.iter().map(|t| t.mu_opt.len()).max().unwrap_or(0);
    let iteration_rmse_deg = (0..steps)
        .map(|k| rmse(ok.iter().filter_map(|t| t.iteration_squared_errors.get(k).copied()).collect()))
        .collect();
    let mean_mu_opt = (0..steps)
        .map(|k| {
            let mus: Vec<f64> = ok.iter().filter_map(|t| t.mu_opt.get(k).copied()).collect();
            mus.iter().sum::<f64>() / mus.len() as f64
        })
        .collect();
    Cell {
        estimator: label.to_string(),
        snr_db,
        rmse_deg,
        prob_resolution: resolved as f64 / trials.len() as f64,
        crb_sqrt_deg: crb,
        excluded_trials,
        iteration_rmse_deg,
        mean_mu_opt,
        trials,
    }
}
