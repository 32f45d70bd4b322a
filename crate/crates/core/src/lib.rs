//! Subspace direction-of-arrival estimation for uniform linear arrays.
//!
//! [`array`] builds the signal model, [`estimators`] holds ESPRIT, the
//! knowledge-aided multi-step refinement and the MUSIC baselines, and
//! [`metrics`] scores them.

pub mod array;
pub mod error;
pub mod estimators;
pub mod metrics;

pub use error::{CoreError, Result};
