//! Experiment configuration, seeded Monte Carlo sweeps and report emission
//! for the `kai-esprit` command line tool.

pub mod appendix;
pub mod complexity;
pub mod config;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod report;
pub mod sweep;

pub use error::{HarnessError, Result};
