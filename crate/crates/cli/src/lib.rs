//! Command-line front end for RDTED median regression: CSV ingestion,
//! design construction, fitting, persistence, prediction, residual
//! diagnostics, sampling and distribution evaluation.
//!
//! Categorical columns are dummy coded against their lexicographically first
//! level, so with an `Origin` column holding `Coppice`, `Natural` and
//! `Planted`, the coefficients are `OriginNatural` and `OriginPlanted`
//! relative to `Coppice`.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod design;
pub mod error;
pub mod model_file;
pub mod report;

pub use error::{CliError, Result};
