//! The DT-G generator `F(x) = G(x)·exp(−Ḡ(x)^β)` over an arbitrary baseline.
//!
//! Evaluation works in log space wherever `Ḡ^{β−1}` can blow up (`β < 1` in
//! the upper tail). Quantiles go through the auxiliary variable `Y` on
//! `(0, 1)` with `F_Y(y) = y·exp(−(1 − y)^β)` and `X = G⁻¹(Y)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline::Baseline;
use crate::error::{domain, Error, Result};
use crate::numerics::{brent, integrate, softplus, QuadratureOptions, RootOptions};

/// Tail cut-off for moment integrals over `(ε, ∞)`.
pub const TAIL_SURVIVAL_CUTOFF: f64 = 1e-14;

/// Number of subintervals scanned for sign changes of `d/dx log f`.
pub const MODE_SCAN_SUBINTERVALS: usize = 256;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive, got {x}")))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("probability must lie in (0, 1), got {p}")))
    }
}

/// Auxiliary variable `Y` on `(0, 1)` with `X = G⁻¹(Y)`.
///
/// `F_Y(y) = y·exp(−(1−y)^β)` and
/// `f_Y(y) = 1 − F_W(1−y) + y·f_W(1−y)` with `W ~ Weibull(1, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryY {
    beta: f64,
}

impl AuxiliaryY {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(domain(format!("shape beta must be positive, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub(crate) fn cdf_unchecked(&self, y: f64) -> f64 {
        y * (-(1.0 - y).powf(self.beta)).exp()
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(domain(format!("y must lie in [0, 1], got {y}")));
        }
        Ok(self.cdf_unchecked(y))
    }

    pub fn density(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y < 1.0) {
            return Err(domain(format!("y must lie in (0, 1), got {y}")));
        }
        let w = 1.0 - y;
        let w_beta = w.powf(self.beta);
        let weibull_sf = (-w_beta).exp();
        // f_W(w) = β w^{β−1} e^{−w^β}
        let weibull_pdf = self.beta * (self.beta.ln() + (self.beta - 1.0) * w.ln() - w_beta).exp()
            / self.beta;
        Ok(weibull_sf + y * weibull_pdf)
    }

    /// Solves `q·exp(−(1−q)^β) = p` for `q ∈ [p, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(-self.log_complement_quantile(p)?.exp_m1())
    }

    /// `log(1 − Q_Y(p))`.
    ///
    /// The root is bracketed on `q ∈ [p, 1)` as for [`Self::quantile`], but is
    /// searched in the coordinate `v = log(1 − q)` so that `1 − q` keeps full
    /// relative precision when `β` is small and `q` sits next to 1.
    pub fn log_complement_quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let beta = self.beta;
        let log_p = p.ln();
        // log F_Y at q = 1 − e^v, minus log p; decreasing in v
        let residual = |v: f64| (-v.exp_m1()).ln() - (beta * v).exp() - log_p;

        let upper = (-p).ln_1p();
        if residual(upper) >= 0.0 {
            return Ok(upper);
        }
        let neg_log_p = -log_p;
        let mut lower = (neg_log_p.ln() / beta).min(neg_log_p.ln()).min(upper) - 1.0;
        let mut expansions = 0;
        while residual(lower) <= 0.0 {
            lower = 2.0 * lower - 1.0;
            expansions += 1;
            if expansions > 60 || !lower.is_finite() {
                return Err(Error::RootNotConverged {
                    iterations: expansions,
                    residual: residual(lower),
                });
            }
        }
        brent(
            residual,
            lower,
            upper,
            RootOptions {
                x_tol: 0.0,
                max_iter: 200,
            },
        )
    }
}

/// A DT-G distribution: baseline `G` and shape `β > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DtgDistribution<B> {
    baseline: B,
    beta: f64,
}

impl<B: Baseline> DtgDistribution<B> {
    pub fn new(baseline: B, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(domain(format!("shape beta must be positive, got {beta}")));
        }
        let (lo, hi) = baseline.support();
        if lo != 0.0 || hi != f64::INFINITY {
            return Err(domain(format!(
                "baseline support must be (0, inf), got ({lo}, {hi})"
            )));
        }
        Ok(Self { baseline, beta })
    }

    pub fn baseline(&self) -> &B {
        &self.baseline
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn auxiliary(&self) -> AuxiliaryY {
        AuxiliaryY { beta: self.beta }
    }

    fn sf_pow_beta(&self, x: f64) -> f64 {
        (self.beta * self.baseline.log_sf(x)).exp()
    }

    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.baseline.cdf(x) * (-self.sf_pow_beta(x)).exp()
    }

    pub(crate) fn sf_unchecked(&self, x: f64) -> f64 {
        1.0 - self.cdf_unchecked(x)
    }

    pub(crate) fn log_pdf_unchecked(&self, x: f64) -> f64 {
        let g = self.baseline.pdf(x);
        if !(g > 0.0) {
            return f64::NEG_INFINITY;
        }
        let big_g = self.baseline.cdf(x);
        let log_sf = self.baseline.log_sf(x);
        // log(1 + β G Ḡ^{β−1})
        let bracket = if big_g > 0.0 {
            softplus(self.beta.ln() + big_g.ln() + (self.beta - 1.0) * log_sf)
        } else {
            0.0
        };
        g.ln() + bracket - (self.beta * log_sf).exp()
    }

    /// `F(x) = G(x)·exp(−Ḡ(x)^β)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_positive("x", x)?;
        Ok(self.cdf_unchecked(x))
    }

    /// `f(x) = g(x)·[1 + β G(x) Ḡ(x)^{β−1}]·exp(−Ḡ(x)^β)`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_positive("x", x)?;
        Ok(self.log_pdf_unchecked(x).exp())
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        check_positive("x", x)?;
        Ok(self.log_pdf_unchecked(x))
    }

    /// `S(t) = 1 − F(t)`.
    pub fn sf(&self, t: f64) -> Result<f64> {
        check_positive("t", t)?;
        Ok(self.sf_unchecked(t))
    }

    /// `h(t) = f(t)/S(t)`; fails once `S(t)` has underflowed to zero.
    pub fn hrf(&self, t: f64) -> Result<f64> {
        let sf = self.sf(t)?;
        if !(sf > 0.0) {
            return Err(Error::Overflow(format!(
                "survival function underflows to zero at t = {t}; hazard is not representable"
            )));
        }
        Ok(self.log_pdf_unchecked(t).exp() / sf)
    }

    /// `Q_X(p) = G⁻¹(Q_Y(p))`, evaluated as `Ḡ⁻¹(1 − Q_Y(p))`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        let log_s = self.auxiliary().log_complement_quantile(p)?;
        Ok(self.baseline.quantile_from_log_sf(log_s))
    }

    /// Draws `n` variates by inverse transform with a ChaCha8 stream seeded from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(domain("sample size must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let aux = self.auxiliary();
        (0..n)
            .map(|_| {
                let u = loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        break u;
                    }
                };
                aux.log_complement_quantile(u)
                    .map(|v| self.baseline.quantile_from_log_sf(v))
            })
            .collect()
    }

    /// Analytic `d/dx log f(x)`:
    /// `g′/g + β g Ḡ^{β−2}·{[Ḡ − (β−1)G] / [1 + β G Ḡ^{β−1}] + Ḡ}`.
    pub fn log_pdf_derivative(&self, x: f64) -> Result<f64> {
        check_positive("x", x)?;
        let g = self.baseline.pdf(x);
        let dg = self.baseline.pdf_derivative(x);
        let big_g = self.baseline.cdf(x);
        let sf = self.baseline.sf(x);
        let log_sf = self.baseline.log_sf(x);
        let beta = self.beta;
        let a = beta * big_g * ((beta - 1.0) * log_sf).exp();
        let v = (sf - (beta - 1.0) * big_g) / (1.0 + a);
        Ok(dg / g + beta * g * ((beta - 2.0) * log_sf).exp() * (v + sf))
    }

    /// Locates the interior mode by scanning `d/dx log f` over
    /// `[Q(0.001), Q(0.999)]` and refining the highest `+ → −` crossing.
    pub fn mode(&self) -> Result<f64> {
        let lower = self.quantile(0.001)?;
        let upper = self.quantile(0.999)?;
        let deriv = |x: f64| self.log_pdf_derivative(x).unwrap_or(f64::NAN);
        let step = (upper - lower) / MODE_SCAN_SUBINTERVALS as f64;

        let mut best: Option<(f64, f64)> = None;
        let mut prev_x = lower;
        let mut prev_d = deriv(lower);
        for i in 1..=MODE_SCAN_SUBINTERVALS {
            let x = if i == MODE_SCAN_SUBINTERVALS {
                upper
            } else {
                lower + step * i as f64
            };
            let d = deriv(x);
            if prev_d > 0.0 && d <= 0.0 {
                let root = if d == 0.0 {
                    x
                } else {
                    brent(
                        deriv,
                        prev_x,
                        x,
                        RootOptions {
                            x_tol: 1e-13 * x,
                            max_iter: 200,
                        },
                    )?
                };
                let height = self.log_pdf_unchecked(root);
                if best.is_none_or(|(_, h)| height > h) {
                    best = Some((root, height));
                }
            }
            prev_x = x;
            prev_d = d;
        }

        let Some((mode, _)) = best else {
            return Err(Error::NoInteriorCriticalPoint { lower, upper });
        };
        // Confirm a local maximum with a numerical derivative of log f on either side.
        let h = 1e-4 * mode.max(1e-8);
        let num_deriv = |x: f64| {
            (self.log_pdf_unchecked(x + 0.5 * h) - self.log_pdf_unchecked(x - 0.5 * h)) / h
        };
        if !(num_deriv(mode - h) > 0.0 && num_deriv(mode + h) < 0.0) {
            return Err(Error::NoInteriorCriticalPoint { lower, upper });
        }
        Ok(mode)
    }

    fn survival_integral(&self, order: f64, from: f64, to: f64) -> Result<f64> {
        if to <= from {
            return Ok(0.0);
        }
        let (v, _) = integrate(
            |u| u.powf(order - 1.0) * self.sf_unchecked(u),
            from,
            to,
            QuadratureOptions::default(),
        )?;
        Ok(order * v)
    }

    fn tail_cutoff(&self, start: f64) -> Result<f64> {
        let mut u = start.max(self.quantile(0.5)?);
        for _ in 0..2000 {
            if self.sf_unchecked(u) < TAIL_SURVIVAL_CUTOFF {
                return Ok(u);
            }
            u *= 2.0;
        }
        Err(Error::Overflow(format!(
            "survival function stays above {TAIL_SURVIVAL_CUTOFF:e} up to {u}"
        )))
    }

    fn boundary_term(&self, order: f64, at: f64) -> f64 {
        if at == 0.0 {
            0.0
        } else {
            at.powf(order) * self.sf_unchecked(at)
        }
    }

    /// `E(X^p·1{ε<X<δ}) = ε^p S(ε) − δ^p S(δ) + p ∫_ε^δ u^{p−1} S(u) du`.
    ///
    /// An infinite `δ` is delegated to [`Self::upper_moment`].
    pub fn truncated_moment(&self, order: f64, eps: f64, delta: f64) -> Result<f64> {
        check_positive("moment order p", order)?;
        if !(eps >= 0.0 && delta > eps) {
            return Err(domain(format!(
                "truncation window must satisfy 0 <= eps < delta, got ({eps}, {delta})"
            )));
        }
        if delta.is_infinite() {
            return self.upper_moment(order, eps);
        }
        let value = self.boundary_term(order, eps) - self.boundary_term(order, delta)
            + self.survival_integral(order, eps, delta)?;
        Ok(value.max(0.0))
    }

    /// `E(X^p·1{X>ε}) = ε^p S(ε) + p ∫_ε^∞ u^{p−1} S(u) du`, with the tail cut
    /// where `S(u) < 1e-14`.
    pub fn upper_moment(&self, order: f64, eps: f64) -> Result<f64> {
        check_positive("moment order p", order)?;
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(domain(format!("eps must be finite and non-negative, got {eps}")));
        }
        let cutoff = self.tail_cutoff(eps)?;
        Ok(self.boundary_term(order, eps) + self.survival_integral(order, eps, cutoff)?)
    }

    /// `E(X^p) = p ∫_0^∞ u^{p−1} S(u) du`.
    pub fn moment(&self, order: f64) -> Result<f64> {
        self.upper_moment(order, 0.0)
    }
}
