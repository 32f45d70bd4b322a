use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("matrix is rank deficient: estimated rank {rank}, need {required}")]
    Singular { rank: usize, required: usize },

    #[error("matrix is not positive definite: eigenvalue {eigenvalue:e} at index {index}")]
    NotPositiveDefinite { eigenvalue: f64, index: usize },

    #[error("degenerate polynomial: leading coefficient is zero")]
    DegeneratePolynomial,
}

pub type Result<T> = std::result::Result<T, LinalgError>;
