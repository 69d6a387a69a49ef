//! Baseline distributions on `(0, ∞)` fed into the DT-G generator.

use crate::error::{domain, Result};

/// Relative step of the central-difference fallback for [`Baseline::pdf_derivative`].
pub const PDF_DERIVATIVE_REL_STEP: f64 = 1e-6;

/// A continuous distribution supported on `(0, ∞)` with a continuous density.
///
/// Implementors provide the CDF `G`, density `g` and quantile `G⁻¹`. The
/// density derivative `g′` and the survival function have default
/// implementations that can be overridden with closed forms for accuracy.
pub trait Baseline {
    fn cdf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64;

    /// `p ∈ (0, 1)`.
    fn quantile(&self, p: f64) -> f64;

    /// Parameter vector of the baseline.
    fn params(&self) -> Vec<f64>;

    fn pdf_derivative(&self, x: f64) -> f64 {
        let h = PDF_DERIVATIVE_REL_STEP * x.abs().max(1.0);
        let lo = (x - h).max(0.5 * x);
        let hi = x + h;
        (self.pdf(hi) - self.pdf(lo)) / (hi - lo)
    }

    /// `1 − G(x)`.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// `log(1 − G(x))`.
    fn log_sf(&self, x: f64) -> f64 {
        self.sf(x).ln()
    }

    /// Inverse of the log-survival function: the `x` with `log(1 − G(x)) = log_s`.
    ///
    /// Lets callers reach far upper-tail quantiles whose `1 − p` is not
    /// representable next to 1.
    fn quantile_from_log_sf(&self, log_s: f64) -> f64 {
        self.quantile(-log_s.exp_m1())
    }

    /// Support as `(lower, upper)`. The generator only accepts `(0, ∞)`.
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Exponential baseline `G(x) = 1 − e^{−λx}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialBaseline {
    lambda: f64,
}

impl ExponentialBaseline {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain(format!("rate lambda must be positive, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Baseline for ExponentialBaseline {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -(-self.lambda * x).exp_m1()
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.lambda * (-self.lambda * x).exp()
    }

    fn quantile(&self, p: f64) -> f64 {
        -(-p).ln_1p() / self.lambda
    }

    fn params(&self) -> Vec<f64> {
        vec![self.lambda]
    }

    fn pdf_derivative(&self, x: f64) -> f64 {
        -self.lambda * self.lambda * (-self.lambda * x).exp()
    }

    fn sf(&self, x: f64) -> f64 {
        (-self.lambda * x.max(0.0)).exp()
    }

    fn log_sf(&self, x: f64) -> f64 {
        -self.lambda * x.max(0.0)
    }

    fn quantile_from_log_sf(&self, log_s: f64) -> f64 {
        -log_s / self.lambda
    }
}

/// Checked exponential CDF.
pub fn exp_cdf(lambda: f64, x: f64) -> Result<f64> {
    let b = ExponentialBaseline::new(lambda)?;
    if !(x > 0.0) {
        return Err(domain(format!("x must be positive, got {x}")));
    }
    Ok(b.cdf(x))
}

/// Checked exponential quantile.
pub fn exp_quantile(lambda: f64, p: f64) -> Result<f64> {
    let b = ExponentialBaseline::new(lambda)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("probability must lie in (0, 1), got {p}")));
    }
    Ok(b.quantile(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn grid() -> impl Iterator<Item = f64> {
        (1..100).map(|i| i as f64 / 100.0)
    }

    #[test]
    fn cdf_examples() {
        assert!(exp_cdf(1.0, 1e-300).unwrap() < 1e-299);
        assert!((exp_cdf(1.0, LN_2).unwrap() - 0.5).abs() < 1e-15);
        assert!((exp_cdf(2.0, 1.0).unwrap() - 0.864_664_716_763_387_3).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        assert!((exp_quantile(1.0, 0.5).unwrap() - LN_2).abs() < 1e-15);
        let p = 1.0 - (-1.0f64).exp();
        assert!((exp_quantile(1.0, p).unwrap() - 1.0).abs() < 1e-14);
        assert!((exp_quantile(0.5, 0.9).unwrap() - 4.605_170_185_988_091).abs() < 1e-13);
    }

    #[test]
    fn invalid_arguments() {
        assert!(exp_cdf(0.0, 1.0).is_err());
        assert!(exp_cdf(-1.0, 1.0).is_err());
        assert!(exp_cdf(1.0, 0.0).is_err());
        assert!(exp_cdf(1.0, -2.0).is_err());
        assert!(exp_quantile(1.0, 0.0).is_err());
        assert!(exp_quantile(1.0, 1.0).is_err());
        assert!(exp_quantile(1.0, f64::NAN).is_err());
    }

    #[test]
    fn roundtrip_grid() {
        for lambda in [0.1, 1.0, 7.5] {
            for p in grid() {
                let x = exp_quantile(lambda, p).unwrap();
                assert!((exp_cdf(lambda, x).unwrap() - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = ExponentialBaseline::new(1.7).unwrap();
        for x in [0.01, 0.3, 1.0, 2.5, 6.0] {
            let h = 1e-5 * f64::max(1.0, x);
            let d_cdf = (b.cdf(x + h) - b.cdf(x - h)) / (2.0 * h);
            assert!((d_cdf - b.pdf(x)).abs() < 1e-6);
            let d_pdf = (b.pdf(x + h) - b.pdf(x - h)) / (2.0 * h);
            assert!((d_pdf - b.pdf_derivative(x)).abs() < 1e-5);
        }
    }

    struct NoDerivative;
    impl Baseline for NoDerivative {
        fn cdf(&self, x: f64) -> f64 {
            1.0 - (-x * x).exp()
        }
        fn pdf(&self, x: f64) -> f64 {
            2.0 * x * (-x * x).exp()
        }
        fn quantile(&self, p: f64) -> f64 {
            (-(-p).ln_1p()).sqrt()
        }
        fn params(&self) -> Vec<f64> {
            vec![]
        }
    }

    #[test]
    fn fallback_derivative() {
        let b = NoDerivative;
        for x in [0.2f64, 0.7, 1.5] {
            let exact = (2.0 - 4.0 * x * x) * (-x * x).exp();
            assert!((b.pdf_derivative(x) - exact).abs() < 1e-8);
        }
        assert!((b.log_sf(1.2) + 1.44).abs() < 1e-12);
        assert!((b.quantile_from_log_sf(-1.44) - 1.2).abs() < 1e-12);
    }
}
