//! Knowledge-aided covariance correction: the perturbation term, the
//! reliability-factor grid search and the multi-step refinement.

use kai_linalg::{
    complement_projector, least_squares, log_det_hermitian, projection_from_basis, CMatrix,
    LinalgError, C64,
};

use super::esprit::{check_dimension, esprit_covariance};
use super::{check_source_count, esprit, DoaEstimate, EstimatorKind, Observation, SubspaceMethod};
use crate::array::{manifold, ArrayGeometry};
use crate::error::{CoreError, Result};

pub const DEFAULT_MU_INCREMENT: f64 = 0.05;

/// Objective values closer than this count as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

/// Relative size of the diagonal ridge added when the objective argument is
/// numerically indefinite.
const RIDGE_FACTOR: f64 = 1e-10;

/// Ascending reliability factors in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuGrid(Vec<f64>);

impl MuGrid {
    /// `0, ι, 2ι, …` up to 1, which gives `τ = 1/ι + 1` points.
    pub fn from_increment(increment: f64) -> Result<Self> {
        if !(increment > 0.0 && increment <= 1.0) {
            return Err(CoreError::Config(format!(
                "reliability increment {increment} must lie in (0, 1]"
            )));
        }
        let steps = (1.0 / increment + 1e-9).floor() as usize;
        let tau = steps + 1;
        if !(2..=21).contains(&tau) {
            return Err(CoreError::Config(format!(
                "reliability increment {increment} gives {tau} grid points, allowed 2..=21"
            )));
        }
        Ok(Self(
            (0..tau).map(|k| (k as f64 * increment).min(1.0)).collect(),
        ))
    }

    /// An explicit grid, for example `[0.0]`.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(CoreError::Config("reliability grid is empty".into()));
        }
        if let Some(&bad) = points.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(CoreError::MuOutOfRange(bad));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::Config("reliability grid must be ascending".into()));
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KaiConfig {
    pub mu_grid: MuGrid,
    /// Subspace extraction for the initial estimate. The corrected
    /// covariances are always decomposed directly.
    pub subspace_method: SubspaceMethod,
    /// Number of refinement steps; `None` means one per source.
    pub iterations: Option<usize>,
}

impl KaiConfig {
    pub fn with_increment(increment: f64) -> Result<Self> {
        Ok(Self {
            mu_grid: MuGrid::from_increment(increment)?,
            ..Self::default()
        })
    }
}

impl Default for KaiConfig {
    fn default() -> Self {
        Self {
            mu_grid: MuGrid::from_increment(DEFAULT_MU_INCREMENT).expect("default increment is valid"),
            subspace_method: SubspaceMethod::CovarianceEvd,
            iterations: None,
        }
    }
}

/// One point of the objective curve. `value` is `None` when the estimate at
/// that reliability factor failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSample {
    pub mu: f64,
    pub value: Option<f64>,
    pub ridged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub mu_opt: f64,
    pub angles: Vec<f64>,
    pub objective: Vec<ObjectiveSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KaiDiagnostics {
    /// Plain ESPRIT estimates that seed the refinement.
    pub initial: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
}

impl KaiDiagnostics {
    /// Whether any objective evaluation needed the diagonal ridge.
    pub fn ridge_applied(&self) -> bool {
        self.iterations
            .iter()
            .flat_map(|r| &r.objective)
            .any(|s| s.ridged)
    }
}

/// Least-squares amplitudes `(ÂᴴÂ)⁻¹Âᴴx`.
pub fn estimate_amplitudes(a: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
    Ok(least_squares(a, x)?)
}

/// Residual `x − Â·ŝ`.
pub fn noise_component(a: &CMatrix, x: &CMatrix, s: &CMatrix) -> Result<CMatrix> {
    Ok(x.try_sub(&a.matmul(s)?)?)
}

/// `V = Q_A·R̂·(I − Q_A)`.
pub fn perturbation_term(a: &CMatrix, r: &CMatrix) -> Result<CMatrix> {
    let q = projection_from_basis(a)?;
    Ok(q.matmul(r)?.matmul(&complement_projector(&q))?)
}

/// `R̂ − μ(V + Vᴴ)`; returns `R̂` itself when `μ = 0`.
pub fn modified_covariance(r: &CMatrix, v: &CMatrix, mu: f64) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(CoreError::MuOutOfRange(mu));
    }
    let w = v.try_add(&v.adjoint())?;
    Ok(corrected(r, &w, mu))
}

fn corrected(r: &CMatrix, w: &CMatrix, mu: f64) -> CMatrix {
    if mu == 0.0 {
        r.clone()
    } else {
        r - &w.scale_real(mu)
    }
}

fn objective_argument(qb: &CMatrix, qb_perp: &CMatrix, r: &CMatrix, m: usize, p: usize) -> Result<CMatrix> {
    if p >= m {
        return Err(CoreError::Config(format!("need M > P, got M={m}, P={p}")));
    }
    let noise_level = qb_perp.matmul(r)?.trace().re / (m - p) as f64;
    let signal = qb.matmul(r)?.matmul(qb)?;
    Ok(signal.try_add(&qb_perp.scale_real(noise_level))?.hermitian_part())
}

/// `ln det(Q_B·R̂·Q_B + Tr(Q_B⊥·R̂)/(M−P)·Q_B⊥)`.
pub fn sml_objective(qb: &CMatrix, qb_perp: &CMatrix, r: &CMatrix, m: usize, p: usize) -> Result<f64> {
    let arg = objective_argument(qb, qb_perp, r, m, p)?;
    Ok(log_det_hermitian(&arg)?)
}

/// The objective, retried once with a small ridge if the argument is not
/// numerically positive definite.
fn objective_with_ridge(qb: &CMatrix, r: &CMatrix, m: usize, p: usize) -> Result<(f64, bool)> {
    let qb_perp = complement_projector(qb);
    let arg = objective_argument(qb, &qb_perp, r, m, p)?;
    match log_det_hermitian(&arg) {
        Ok(v) => Ok((v, false)),
        Err(LinalgError::NotPositiveDefinite { .. }) => {
            let ridge = RIDGE_FACTOR * r.trace().re / m as f64;
            let mut ridged = arg;
            for i in 0..m {
                ridged[(i, i)] += C64::new(ridge, 0.0);
            }
            Ok((log_det_hermitian(&ridged)?, true))
        }
        Err(e) => Err(e.into()),
    }
}

struct GridPoint {
    value: f64,
    ridged: bool,
    angles: Vec<f64>,
}

fn evaluate_grid_point(
    r: &CMatrix,
    w: &CMatrix,
    mu: f64,
    sources: usize,
    geom: &ArrayGeometry,
) -> Result<GridPoint> {
    let r_mod = corrected(r, w, mu);
    let angles = esprit_covariance(&r_mod, sources, geom)?;
    let qb = projection_from_basis(&manifold(geom, &angles)?)?;
    let (value, ridged) = objective_with_ridge(&qb, r, geom.sensor_count(), sources)?;
    Ok(GridPoint {
        value,
        ridged,
        angles,
    })
}

/// Shared driver: seed with ESPRIT, then refine `iterations` times starting
/// from the steering directions `seed_steering(initial)`.
fn refine(
    obs: &Observation,
    sources: usize,
    geom: &ArrayGeometry,
    cfg: &KaiConfig,
    iterations: usize,
    kind: EstimatorKind,
    seed_steering: impl FnOnce(&[f64]) -> Result<Vec<f64>>,
) -> Result<DoaEstimate> {
    check_source_count(sources, geom)?;
    check_dimension(obs, geom)?;
    let r = obs.covariance();
    let initial = esprit(obs, sources, geom, cfg.subspace_method)?.angles;
    let base = seed_steering(&initial)?;
    let mut steering = base.clone();
    let mut output = initial.clone();
    let mut records = Vec::with_capacity(iterations);

    for n in 1..=iterations {
        let v = perturbation_term(&manifold(geom, &steering)?, r)?;
        let w = &v + &v.adjoint();

        let mut best: Option<(f64, GridPoint)> = None;
        let mut objective = Vec::with_capacity(cfg.mu_grid.len());
        let mut last_error = None;
        for &mu in cfg.mu_grid.points() {
            match evaluate_grid_point(r, &w, mu, sources, geom) {
                Ok(point) => {
                    objective.push(ObjectiveSample {
                        mu,
                        value: Some(point.value),
                        ridged: point.ridged,
                    });
                    let better = best
                        .as_ref()
                        .is_none_or(|(_, b)| point.value < b.value - TIE_TOLERANCE);
                    if better {
                        best = Some((mu, point));
                    }
                }
                Err(e) => {
                    objective.push(ObjectiveSample {
                        mu,
                        value: None,
                        ridged: false,
                    });
                    last_error = Some(e);
                }
            }
        }
        let (mu_opt, point) = best.ok_or_else(|| CoreError::GridExhausted {
            iteration: n,
            last: Box::new(last_error.expect("grid is nonempty")),
        })?;
        output = point.angles;
        records.push(IterationRecord {
            iteration: n,
            mu_opt,
            angles: output.clone(),
            objective,
        });
        // Refined directions for the first n indices, the seed for the rest.
        steering = (0..sources)
            .map(|k| if k < n { output[k] } else { base[k] })
            .collect();
    }

    let mut estimate = DoaEstimate::new(output, kind);
    estimate.diagnostics = Some(KaiDiagnostics {
        initial,
        iterations: records,
    });
    Ok(estimate)
}

pub fn ms_kai_esprit(
    obs: &Observation,
    sources: usize,
    geom: &ArrayGeometry,
    cfg: &KaiConfig,
) -> Result<DoaEstimate> {
    let iterations = cfg.iterations.unwrap_or(sources);
    if !(1..=sources).contains(&iterations) {
        return Err(CoreError::Config(format!(
            "iteration count {iterations} must lie in 1..={sources}"
        )));
    }
    refine(obs, sources, geom, cfg, iterations, EstimatorKind::MsKaiEsprit, |a| {
        Ok(a.to_vec())
    })
}

/// A single correction step with the full initial Vandermonde matrix.
pub fn iesprit(
    obs: &Observation,
    sources: usize,
    geom: &ArrayGeometry,
    cfg: &KaiConfig,
) -> Result<DoaEstimate> {
    refine(obs, sources, geom, cfg, 1, EstimatorKind::Iesprit, |a| Ok(a.to_vec()))
}

/// A single correction step whose Vandermonde matrix uses the known
/// directions in place of the nearest initial estimates.
pub fn ts_esprit(
    obs: &Observation,
    sources: usize,
    geom: &ArrayGeometry,
    cfg: &KaiConfig,
    known_doas: &[f64],
) -> Result<DoaEstimate> {
    if known_doas.len() > sources {
        return Err(CoreError::Config(format!(
            "{} known directions for {sources} sources",
            known_doas.len()
        )));
    }
    if let Some(&bad) = known_doas.iter().find(|t| !(t.abs() < 90.0)) {
        return Err(CoreError::AngleOutOfRange(bad));
    }
    refine(obs, sources, geom, cfg, 1, EstimatorKind::TsEsprit, |initial| {
        let mut steering = initial.to_vec();
        let mut taken = vec![false; initial.len()];
        for &known in known_doas {
            let slot = (0..initial.len())
                .filter(|&i| !taken[i])
                .min_by(|&i, &j| {
                    (initial[i] - known)
                        .abs()
                        .total_cmp(&(initial[j] - known).abs())
                })
                .expect("fewer known directions than sources");
            steering[slot] = known;
            taken[slot] = true;
        }
        Ok(steering)
    })
}
