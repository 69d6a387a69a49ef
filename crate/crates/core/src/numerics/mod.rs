//! Numerical building blocks shared by the distribution and regression code.

pub mod hessian;
pub mod normal;
pub mod optim;
pub mod quadrature;
pub mod roots;

pub use hessian::central_hessian;
pub use quadrature::{integrate, QuadratureOptions};
pub use roots::{brent, RootOptions};

/// `log(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-x})`.
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(e^x - 1)` for `x > 0`.
pub(crate) fn log_expm1(x: f64) -> f64 {
    if x > 35.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}
