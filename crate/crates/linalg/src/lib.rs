//! Dense complex linear algebra for small array-processing problems.
//!
//! Matrices are row-major [`CMatrix`] values of [`C64`] entries. Everything
//! here is sized for sensor arrays of a few dozen elements, so the routines
//! favour clarity and stability over blocking.

mod eig;
mod error;
mod evd;
mod factor;
mod matrix;
mod poly;
mod qr;
mod svd;

pub use num_complex::Complex64 as C64;

pub use eig::eigenvalues;
pub use error::{LinalgError, Result};
pub use evd::{hermitian_eigenvalues, hermitian_evd, HermitianEig};
pub use factor::{cholesky_hermitian, log_det_hermitian, PD_TOLERANCE};
pub use matrix::CMatrix;
pub use poly::{polynomial_eval, polynomial_roots};
pub use qr::{
    complement_projector, inverse, least_squares, orthonormal_basis, projection_from_basis,
    PivotedQr, RANK_TOLERANCE,
};
pub use svd::{svd, Svd};
