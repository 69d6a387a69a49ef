//! Dutta-transformed (DT-G) distribution family and DT-exponential median regression.
//!
//! The DT-G generator turns any baseline CDF `G` on `(0, ∞)` into
//! `F(x) = G(x)·exp(-(1 - G(x))^β)`. With an exponential baseline this gives
//! the two-parameter DTED law, which can be re-expressed through its median
//! `μ` and a shape `σ` (RDTED). The RDTED law supports a median regression
//! model with log links on both parameters.
//!
//! # Modules
//!
//! - [`baseline`] - baseline distribution abstraction and the exponential baseline
//! - [`dtg`] - the generic family: density, survival, hazard, quantile, sampling, mode, moments
//! - [`dted`] - closed-form DT-exponential law and its median parameterization
//! - [`regression`] - maximum likelihood fitting, observed information, Wald tests
//! - [`diagnostics`] - quantile residuals, QQ and worm plot data, SVG rendering
//! - [`numerics`] - quadrature, root finding, quasi-Newton minimization, normal helpers

pub mod baseline;
pub mod diagnostics;
pub mod dted;
pub mod dtg;
pub mod error;
pub mod numerics;
pub mod regression;

pub use baseline::{Baseline, ExponentialBaseline};
pub use dted::{DtedParams, RdtedParams};
pub use dtg::{AuxiliaryY, DtgDistribution};
pub use error::{Error, Result};
pub use regression::{FitOptions, FittedModel, ModelSpec};

/// Library version recorded in saved model files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
