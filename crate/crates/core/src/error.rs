use kai_linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error("invalid array geometry: {0}")]
    Geometry(String),

    #[error("invalid source scenario: {0}")]
    Scenario(String),

    #[error("angle {0}° is outside the open interval (-90°, 90°)")]
    AngleOutOfRange(f64),

    #[error("spatial frequency {gamma:.6} rad maps outside the arcsine domain (argument {argument:.6})")]
    Aliasing { gamma: f64, argument: f64 },

    #[error("reliability factor {0} is outside [0, 1]")]
    MuOutOfRange(f64),

    #[error("invalid estimator configuration: {0}")]
    Config(String),

    #[error("every point of the reliability grid failed at iteration {iteration}: {last}")]
    GridExhausted { iteration: usize, last: Box<CoreError> },

    #[error("found {found} spectral peaks, {required} sources requested")]
    Unresolved { found: usize, required: usize },

    #[error("found {found} candidate roots inside the unit circle, {required} sources requested")]
    TooFewRoots { found: usize, required: usize },

    #[error("unknown complexity model `{0}`")]
    UnknownModel(String),

    #[error("unknown estimator `{0}`")]
    UnknownEstimator(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
