//! Accuracy metrics, the deterministic CRB, covariance-correction checks and
//! multiplication-count models.

mod appendix;
mod complexity;
mod crb;

pub use appendix::{
    correction_sample, covariance_mse_gap, covariance_mse_gap_grid, frobenius_expansion_residual,
    trace_inequality_check, CorrectionSample, GapEstimate, ProjectorMode,
};
pub use complexity::{ms_kai_additions, multiplication_count, ComplexityModel, ComplexityParams};
pub use crb::crb_deterministic;

use crate::estimators::DoaEstimate;

/// One estimator run scored against the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub estimates: DoaEstimate,
    pub truth: Vec<f64>,
    pub resolved: bool,
    /// `Σ_p (θ_p − θ̂_p)²` in degrees², sorted-order pairing.
    pub squared_error_sum: f64,
}

impl TrialOutcome {
    pub fn new(truth: &[f64], estimates: DoaEstimate) -> Self {
        let squared_error_sum = if truth.len() == estimates.angles.len() {
            truth
                .iter()
                .zip(&estimates.angles)
                .map(|(t, e)| (t - e).powi(2))
                .sum()
        } else {
            f64::INFINITY
        };
        Self {
            resolved: is_resolved(truth, &estimates.angles),
            truth: truth.to_vec(),
            estimates,
            squared_error_sum,
        }
    }
}

/// Root-mean-square error over trials and sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rmse {
    pub degrees: f64,
}

impl Rmse {
    /// `20·log10` of the error in degrees.
    pub fn db(&self) -> f64 {
        20.0 * self.degrees.log10()
    }
}

/// `sqrt(Σ_l Σ_p (θ_p − θ̂_p(l))² / (L·P))`, or `None` for no trials.
///
/// Terms are summed in sorted order, so the result does not depend on the
/// order of `trials`.
pub fn rmse(trials: &[TrialOutcome], sources: usize) -> Option<Rmse> {
    rmse_from_sums(trials.iter().map(|t| t.squared_error_sum), sources)
}

/// [`rmse`] from per-trial squared-error sums.
pub fn rmse_from_sums(sums: impl IntoIterator<Item = f64>, sources: usize) -> Option<Rmse> {
    let mut sums: Vec<f64> = sums.into_iter().collect();
    if sums.is_empty() || sources == 0 {
        return None;
    }
    sums.sort_by(f64::total_cmp);
    let total: f64 = sums.iter().sum();
    Some(Rmse {
        degrees: (total / (sums.len() * sources) as f64).sqrt(),
    })
}

/// Every estimate lies within half the smallest adjacent true separation
/// of its source.
pub fn is_resolved(truth: &[f64], estimates: &[f64]) -> bool {
    if truth.len() != estimates.len() || truth.is_empty() {
        return false;
    }
    let separation = truth
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(f64::INFINITY, f64::min);
    let threshold = separation / 2.0;
    truth
        .iter()
        .zip(estimates)
        .all(|(t, e)| (t - e).abs() < threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EstimatorKind;

    fn outcome(truth: &[f64], est: &[f64]) -> TrialOutcome {
        TrialOutcome::new(truth, DoaEstimate::new(est.to_vec(), EstimatorKind::Esprit))
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[outcome(&[1.0], &[1.0])], 1).unwrap().degrees, 0.0);
        assert_eq!(rmse(&[outcome(&[1.0], &[3.0])], 1).unwrap().degrees, 2.0);
        let t = [outcome(&[0.0, 10.0], &[1.0, 11.0]), outcome(&[0.0, 10.0], &[-1.0, 9.0])];
        assert_eq!(rmse(&t, 2).unwrap().degrees, 1.0);
        assert!(rmse(&[], 2).is_none());
    }

    #[test]
    fn rmse_in_db() {
        assert!((Rmse { degrees: 10.0 }.db() - 20.0).abs() < 1e-12);
        assert!((Rmse { degrees: 0.1 }.db() + 20.0).abs() < 1e-12);
    }

    #[test]
    fn resolution_examples() {
        assert!(is_resolved(&[10.2, 12.6], &[10.8, 12.0]));
        assert!(!is_resolved(&[10.2, 12.6], &[11.5, 12.6]));
        assert!(is_resolved(&[10.2, 12.6], &[10.2, 12.6]));
        assert!(!is_resolved(&[10.2, 12.6], &[10.2]));
    }
}
