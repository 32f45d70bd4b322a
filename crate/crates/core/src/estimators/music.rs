//! Noise-subspace estimators: grid-search MUSIC and Root-MUSIC.

use kai_linalg::{hermitian_evd, polynomial_roots, CMatrix, C64};

use super::{check_source_count, DoaEstimate, EstimatorKind};
use crate::array::{steering_unchecked, ArrayGeometry};
use crate::error::{CoreError, Result};

/// Default spectral search step in degrees.
pub const DEFAULT_GRID_STEP: f64 = 0.1;

/// Floor for the MUSIC denominator so exact nulls stay finite.
const DENOMINATOR_FLOOR: f64 = 1e-300;

/// A grid null this far below both neighbours is treated as exact and left
/// unrefined.
const SINGULAR_NULL_RATIO: f64 = 1e-10;

/// Candidate roots may sit this far outside the unit circle.
const UNIT_CIRCLE_SLACK: f64 = 1e-6;

/// Candidates within this distance of the best one tie for selection.
const ROOT_TIE_TOLERANCE: f64 = 1e-6;

/// Allowed mismatch between a root and the nearest conjugate reciprocal.
const PAIRING_TOLERANCE: f64 = 1e-6;

fn noise_subspace(r: &CMatrix, sources: usize, geom: &ArrayGeometry) -> Result<CMatrix> {
    check_source_count(sources, geom)?;
    let m = geom.sensor_count();
    if r.rows() != m || r.cols() != m {
        return Err(CoreError::Config(format!(
            "covariance is {}x{} but the array has {m} sensors",
            r.rows(),
            r.cols()
        )));
    }
    Ok(hermitian_evd(&r.hermitian_part())?.trailing_vectors(m - sources))
}

/// `‖Unᴴ·a(θ)‖²` for every angle of the grid.
fn null_spectrum(un: &CMatrix, geom: &ArrayGeometry, grid: &[f64]) -> Vec<f64> {
    let m = un.rows();
    let k = un.cols();
    grid.iter()
        .map(|&theta| {
            let a = steering_unchecked(geom, theta);
            let mut total = 0.0;
            for j in 0..k {
                let mut acc = C64::new(0.0, 0.0);
                for (i, ai) in a.iter().enumerate().take(m) {
                    acc += un[(i, j)].conj() * ai;
                }
                total += acc.norm_sqr();
            }
            total.max(DENOMINATOR_FLOOR)
        })
        .collect()
}

/// Spectral MUSIC on the grid `−90+Δ, …, 90` with parabolic peak refinement.
pub fn music(r: &CMatrix, sources: usize, geom: &ArrayGeometry, grid_step: f64) -> Result<DoaEstimate> {
    if !(grid_step > 0.0 && grid_step <= 90.0) {
        return Err(CoreError::Config(format!(
            "grid step {grid_step} must lie in (0, 90]"
        )));
    }
    let un = noise_subspace(r, sources, geom)?;
    let count = (180.0 / grid_step).round() as usize;
    let grid: Vec<f64> = (1..=count).map(|k| -90.0 + k as f64 * grid_step).collect();
    let den = null_spectrum(&un, geom, &grid);

    // Peaks of 1/den are strict-left, weak-right minima of den.
    let mut peaks: Vec<usize> = (1..count.saturating_sub(1))
        .filter(|&k| den[k] < den[k - 1] && den[k] <= den[k + 1])
        .collect();
    if peaks.len() < sources {
        return Err(CoreError::Unresolved {
            found: peaks.len(),
            required: sources,
        });
    }
    peaks.sort_by(|&a, &b| den[a].total_cmp(&den[b]).then(a.cmp(&b)));
    peaks.truncate(sources);

    let angles = peaks
        .into_iter()
        .map(|k| {
            let (left, mid, right) = (den[k - 1], den[k], den[k + 1]);
            if mid <= SINGULAR_NULL_RATIO * left.min(right) {
                return grid[k];
            }
            let (y0, y1, y2) = (-left.ln(), -mid.ln(), -right.ln());
            let curvature = y0 - 2.0 * y1 + y2;
            let offset = if curvature < 0.0 {
                (0.5 * (y0 - y2) / curvature).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            grid[k] + offset * grid_step
        })
        .collect();
    Ok(DoaEstimate::new(angles, EstimatorKind::Music))
}

/// Coefficients of `z^(M−1)·aᵀ(1/z)·C·a(z)`, highest degree first: entry
/// `i` is the sum of diagonal `M−1−i` of `C` (positive offsets above the
/// main diagonal).
fn root_music_polynomial(c: &CMatrix) -> Vec<C64> {
    let m = c.rows() as isize;
    (0..2 * m - 1)
        .map(|i| {
            let offset = m - 1 - i;
            (0..m)
                .filter_map(|row| {
                    let col = row + offset;
                    (0..m).contains(&col).then(|| c[(row as usize, col as usize)])
                })
                .sum()
        })
        .collect()
}

pub fn root_music(r: &CMatrix, sources: usize, geom: &ArrayGeometry) -> Result<DoaEstimate> {
    let un = noise_subspace(r, sources, geom)?;
    let c = un.matmul(&un.adjoint())?;
    let roots = polynomial_roots(&root_music_polynomial(&c))?;

    let mut warnings = Vec::new();
    let unpaired = roots
        .iter()
        .filter(|z| z.norm() > 0.0)
        .filter(|z| {
            let mirror = 1.0 / z.conj();
            let gap = roots
                .iter()
                .map(|w| (w - mirror).norm())
                .fold(f64::INFINITY, f64::min);
            gap > PAIRING_TOLERANCE * mirror.norm().max(1.0)
        })
        .count();
    if unpaired > 0 {
        warnings.push(format!(
            "{unpaired} polynomial roots lack a conjugate-reciprocal partner"
        ));
    }

    let mut candidates: Vec<(f64, f64)> = roots
        .iter()
        .filter(|z| z.norm() <= 1.0 + UNIT_CIRCLE_SLACK)
        .filter_map(|z| {
            geom.angle_from_frequency(z.arg())
                .ok()
                .map(|theta| ((1.0 - z.norm()).abs(), theta))
        })
        .collect();
    if candidates.len() < sources {
        return Err(CoreError::TooFewRoots {
            found: candidates.len(),
            required: sources,
        });
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut selected: Vec<f64> = Vec::with_capacity(sources);
    let mut used = vec![false; candidates.len()];
    while selected.len() < sources {
        let best = candidates
            .iter()
            .zip(&used)
            .filter(|(_, &u)| !u)
            .map(|(c, _)| c.0)
            .fold(f64::INFINITY, f64::min);
        let pick = (0..candidates.len())
            .filter(|&i| !used[i] && candidates[i].0 <= best + ROOT_TIE_TOLERANCE)
            .max_by(|&i, &j| {
                let spread = |k: usize| {
                    selected
                        .iter()
                        .map(|s| (s - candidates[k].1).abs())
                        .fold(f64::INFINITY, f64::min)
                };
                // Farthest from the selection, then closest to the circle.
                spread(i)
                    .total_cmp(&spread(j))
                    .then(candidates[j].0.total_cmp(&candidates[i].0))
                    .then(j.cmp(&i))
            })
            .expect("enough candidates remain");
        used[pick] = true;
        selected.push(candidates[pick].1);
    }

    let mut estimate = DoaEstimate::new(selected, EstimatorKind::RootMusic);
    estimate.warnings = warnings;
    Ok(estimate)
}

