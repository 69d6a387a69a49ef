//! DT-exponential law (`G(x) = 1 − e^{−λx}`) in the classical `(β, λ)` form and
//! in the median parameterization `(μ, σ)`.
//!
//! With `c = σ + log 2` and `L = log(2(1 − e^{−c}))`, the median form sets
//! `λ = c/μ` and `β = −log(L)/c`, so that `F(μ) = 1/2` for every `σ > 0`.

use std::f64::consts::LN_2;

use crate::baseline::ExponentialBaseline;
use crate::dtg::DtgDistribution;
use crate::error::{domain, Error, Result};
use crate::numerics::{brent, softplus, RootOptions};

/// Smallest accepted `σ`; `β` diverges as `σ → 0⁺`.
pub const MIN_SIGMA: f64 = 1e-8;

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("x must be positive, got {x}")))
    }
}

/// `log(1 − e^{−z})` for `z > 0`.
fn log_one_minus_exp_neg(z: f64) -> f64 {
    (-(-z).exp_m1()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtedParams {
    pub beta: f64,
    pub lambda: f64,
}

impl DtedParams {
    pub fn new(beta: f64, lambda: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(domain(format!("shape beta must be positive, got {beta}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain(format!("rate lambda must be positive, got {lambda}")));
        }
        Ok(Self { beta, lambda })
    }

    /// The same law seen through the generic generator.
    pub fn to_dtg(&self) -> DtgDistribution<ExponentialBaseline> {
        DtgDistribution::new(
            ExponentialBaseline::new(self.lambda).expect("validated rate"),
            self.beta,
        )
            .expect("validated parameters")
    }

    /// `(1 − e^{−λx})·exp(−e^{−βλx})`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let lx = self.lambda * x;
        Ok(-(-lx).exp_m1() * (-(-self.beta * lx).exp()).exp())
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let lx = self.lambda * x;
        // 1 + β(1 − e^{−λx})e^{−(β−1)λx}
        let log_bracket =
            softplus(self.beta.ln() + log_one_minus_exp_neg(lx) - (self.beta - 1.0) * lx);
        Ok(self.lambda.ln() - lx + log_bracket - (-self.beta * lx).exp())
    }

    /// `λe^{−λx}[1 + β(1 − e^{−λx})e^{−(β−1)λx}]·exp(−e^{−βλx})`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.log_pdf(x).map(f64::exp)
    }

    pub fn sf(&self, t: f64) -> Result<f64> {
        Ok(1.0 - self.cdf(t)?)
    }

    pub fn hrf(&self, t: f64) -> Result<f64> {
        let sf = self.sf(t)?;
        if !(sf > 0.0) {
            return Err(Error::Overflow(format!(
                "survival function underflows to zero at t = {t}; hazard is not representable"
            )));
        }
        Ok(self.pdf(t)? / sf)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.to_dtg().quantile(p)
    }

    /// Median parameterization of the same law.
    ///
    /// Solves `β(σ) = β` for `σ` (the map is strictly decreasing) and sets `μ = (σ + log 2)/λ`.
    pub fn to_rdted(&self) -> Result<RdtedParams> {
        let target = self.beta.ln();
        let residual = |log_sigma: f64| implied_beta(log_sigma.exp()).ln() - target;
        let (lo, hi) = (MIN_SIGMA.ln(), 1e12f64.ln());
        if residual(lo) < 0.0 || residual(hi) > 0.0 {
            return Err(Error::Infeasible(format!(
                "beta = {} has no median parameterization with sigma in [{MIN_SIGMA:e}, 1e12]",
                self.beta
            )));
        }
        let log_sigma = brent(
            residual,
            lo,
            hi,
            RootOptions {
                x_tol: 1e-15,
                max_iter: 200,
            },
        )?;
        let sigma = log_sigma.exp();
        RdtedParams::new((sigma + LN_2) / self.lambda, sigma)
    }
}

/// Solves `τ = (1 − e^{−λq})·exp(−e^{−βλq})` for `β`:
/// `β = −(1/λ)·log[(log((1 − e^{−λq})/τ))^{1/q}]`.
pub fn beta_from_quantile(lambda: f64, q_tau: f64, tau: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain(format!("rate lambda must be positive, got {lambda}")));
    }
    if !(q_tau > 0.0 && q_tau.is_finite()) {
        return Err(domain(format!("quantile q_tau must be positive, got {q_tau}")));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(domain(format!("tau must lie in (0, 1), got {tau}")));
    }
    let base = -(-lambda * q_tau).exp_m1();
    if base <= tau {
        return Err(Error::Infeasible(format!(
            "1 - exp(-lambda*q_tau) = {base} must exceed tau = {tau}"
        )));
    }
    let inner = (base / tau).ln();
    if inner >= 1.0 {
        return Err(Error::Infeasible(format!(
            "log((1 - exp(-lambda*q_tau))/tau) = {inner} must be below 1 for beta > 0"
        )));
    }
    Ok(-inner.ln() / (lambda * q_tau))
}

/// `log L(σ)` where `L = log(2(1 − e^{−(σ+log 2)})) = log(2 − e^{−σ})`.
fn log_l(sigma: f64) -> f64 {
    (-(-sigma).exp_m1()).ln_1p().ln()
}

/// `β` implied by `σ` in the median parameterization.
pub fn implied_beta(sigma: f64) -> f64 {
    -log_l(sigma) / (sigma + LN_2)
}

/// Median parameterization: `μ` is the median, `σ > 0` a shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdtedParams {
    pub mu: f64,
    pub sigma: f64,
}

impl RdtedParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(domain(format!("median mu must be positive, got {mu}")));
        }
        if !(sigma.is_finite() && sigma >= MIN_SIGMA) {
            return Err(domain(format!(
                "sigma must be finite and at least {MIN_SIGMA:e}, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    fn c(&self) -> f64 {
        self.sigma + LN_2
    }

    /// `λ = (σ + log 2)/μ`, `β = −log(L)/(σ + log 2)`.
    pub fn to_classical(&self) -> DtedParams {
        DtedParams {
            beta: implied_beta(self.sigma),
            lambda: self.c() / self.mu,
        }
    }

    /// `(1 − e^{−cx/μ})·exp(−L^{x/μ})`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let t = x / self.mu;
        let l_pow = (t * log_l(self.sigma)).exp();
        Ok(-(-self.c() * t).exp_m1() * (-l_pow).exp())
    }

    /// Log of the three-factor density
    /// `(c/μ)e^{−cx/μ} · [1 − (1/c)·log(L)·(1 − e^{−cx/μ})·e^{cx/μ}·L^{x/μ}] · exp(−L^{x/μ})`.
    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let c = self.c();
        let t = x / self.mu;
        let ln_l = log_l(self.sigma);
        debug_assert!(ln_l < 0.0, "log L must be negative so the bracket is >= 1");
        let coef = -ln_l / c;
        // bracket = 1 + coef·(1 − e^{−ct})·e^{ct}·L^t, accumulated in log space
        let log_term = coef.ln() + log_one_minus_exp_neg(c * t) + c * t + t * ln_l;
        let log_bracket = softplus(log_term);
        Ok((c / self.mu).ln() - c * t + log_bracket - (t * ln_l).exp())
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.log_pdf(x).map(f64::exp)
    }

    pub fn sf(&self, t: f64) -> Result<f64> {
        Ok(1.0 - self.cdf(t)?)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.to_classical().quantile(p)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.to_classical().to_dtg().sample(n, seed)
    }
}
