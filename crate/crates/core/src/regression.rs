//! Median regression with RDTED responses:
//! `log μᵢ = Wᵢᵀα`, `log σᵢ = Zᵢᵀγ`, fitted by maximum likelihood.
//!
//! The joint likelihood is maximized by BFGS with an analytic score, then
//! polished with a few Newton steps on the score. Standard errors come from
//! the inverse of the observed information, i.e. the negated central-difference
//! Hessian of the log-likelihood at the estimate.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use crate::dted::MIN_SIGMA;
use crate::error::{Error, Result};
use crate::numerics::hessian::central_hessian;
use crate::numerics::normal;
use crate::numerics::optim::{minimize, BfgsOptions};
use crate::numerics::{log_expm1, logistic, softplus};

/// Relative singular-value tolerance of the rank check.
pub const RANK_TOL: f64 = 1e-10;

/// Response vector plus design matrices for the `μ` and `σ` linear predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    response: Vec<f64>,
    mu_design: DMatrix<f64>,
    sigma_design: DMatrix<f64>,
    mu_names: Vec<String>,
    sigma_names: Vec<String>,
}

impl ModelSpec {
    /// Builds a specification with generated column names.
    pub fn new(
        response: Vec<f64>,
        mu_design: DMatrix<f64>,
        sigma_design: DMatrix<f64>,
    ) -> Result<Self> {
        let mu_names = (0..mu_design.ncols()).map(|j| format!("mu[{j}]")).collect();
        let sigma_names = (0..sigma_design.ncols())
            .map(|j| format!("sigma[{j}]"))
            .collect();
        Self::with_names(response, mu_design, sigma_design, mu_names, sigma_names)
    }

    pub fn with_names(
        response: Vec<f64>,
        mu_design: DMatrix<f64>,
        sigma_design: DMatrix<f64>,
        mu_names: Vec<String>,
        sigma_names: Vec<String>,
    ) -> Result<Self> {
        let n = response.len();
        if n == 0 {
            return Err(Error::Specification("response is empty".into()));
        }
        if mu_design.nrows() != n || sigma_design.nrows() != n {
            return Err(Error::Specification(format!(
                "design rows ({} for mu, {} for sigma) must equal the number of responses ({n})",
                mu_design.nrows(),
                sigma_design.nrows()
            )));
        }
        let (p1, p2) = (mu_design.ncols(), sigma_design.ncols());
        if p1 == 0 || p2 == 0 {
            return Err(Error::Specification(
                "both design matrices need at least one column".into(),
            ));
        }
        if p1 + p2 >= n {
            return Err(Error::Specification(format!(
                "number of coefficients ({}) must be smaller than the number of observations ({n})",
                p1 + p2
            )));
        }
        if mu_names.len() != p1 || sigma_names.len() != p2 {
            return Err(Error::Specification("column name count mismatch".into()));
        }
        if let Some((i, y)) = response
            .iter()
            .enumerate()
            .find(|(_, y)| !(**y > 0.0 && y.is_finite()))
        {
            return Err(Error::Specification(format!(
                "responses must be finite and strictly positive; observation {i} is {y}"
            )));
        }
        if mu_design.iter().chain(sigma_design.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Specification("design matrices contain non-finite values".into()));
        }
        check_full_rank(&mu_design, &mu_names, "mu")?;
        check_full_rank(&sigma_design, &sigma_names, "sigma")?;
        Ok(Self {
            response,
            mu_design,
            sigma_design,
            mu_names,
            sigma_names,
        })
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn mu_design(&self) -> &DMatrix<f64> {
        &self.mu_design
    }

    pub fn sigma_design(&self) -> &DMatrix<f64> {
        &self.sigma_design
    }

    pub fn mu_names(&self) -> &[String] {
        &self.mu_names
    }

    pub fn sigma_names(&self) -> &[String] {
        &self.sigma_names
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p1(&self) -> usize {
        self.mu_design.ncols()
    }

    pub fn p2(&self) -> usize {
        self.sigma_design.ncols()
    }

    pub fn p(&self) -> usize {
        self.p1() + self.p2()
    }

    fn split<'a>(&self, theta: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        if theta.len() != self.p() {
            return Err(Error::Specification(format!(
                "coefficient vector has length {}, expected {}",
                theta.len(),
                self.p()
            )));
        }
        Ok(theta.split_at(self.p1()))
    }

    /// Linear predictors `(Wα, Zγ)`.
    fn predictors(&self, theta: &[f64]) -> Result<(DVector<f64>, DVector<f64>)> {
        let (alpha, gamma) = self.split(theta)?;
        let eta_mu = &self.mu_design * DVector::from_column_slice(alpha);
        let eta_sigma = &self.sigma_design * DVector::from_column_slice(gamma);
        Ok((eta_mu, eta_sigma))
    }
}

fn rank(matrix: &DMatrix<f64>) -> usize {
    if matrix.ncols() == 0 {
        return 0;
    }
    let sv = matrix.clone().svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * largest).count()
}

/// Rejects a design without full column rank, naming each dependent column
/// and the earlier columns it is a combination of.
pub fn check_full_rank(matrix: &DMatrix<f64>, names: &[String], label: &str) -> Result<()> {
    if rank(matrix) == matrix.ncols() {
        return Ok(());
    }
    let mut kept: Vec<usize> = Vec::new();
    let mut problems = Vec::new();
    for j in 0..matrix.ncols() {
        let mut cols = kept.clone();
        cols.push(j);
        let sub = matrix.select_columns(&cols);
        if rank(&sub) == cols.len() {
            kept.push(j);
            continue;
        }
        let target = matrix.column(j).into_owned();
        let partners: Vec<String> = if kept.is_empty() {
            Vec::new()
        } else {
            let base = matrix.select_columns(&kept);
            let coef = base
                .svd(true, true)
                .solve(&target, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(kept.len()));
            let scale = coef.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            kept.iter()
                .zip(coef.iter())
                .filter(|(_, c)| c.abs() > 1e-8 * scale)
                .map(|(k, _)| format!("'{}'", names[*k]))
                .collect()
        };
        if partners.is_empty() {
            problems.push(format!("'{}' is identically zero", names[j]));
        } else {
            problems.push(format!(
                "'{}' is collinear with {}",
                names[j],
                partners.join(", ")
            ));
        }
    }
    Err(Error::Specification(format!(
        "{label} design is rank deficient: {}",
        problems.join("; ")
    )))
}

/// `log L(σ)` with `L = log(2 − e^{−σ})`.
fn log_l(sigma: f64) -> f64 {
    (-(-sigma).exp_m1()).ln_1p().ln()
}

/// Contribution `ℓᵢ` of one observation, written as the three printed terms:
/// `log(c/μ) − c y/μ`, `log[1 − (1/c)·log(L)·(1 − e^{−cy/μ})·e^{cy/μ}·L^{y/μ}]`, `−L^{y/μ}`.
pub fn observation_loglik(y: f64, mu: f64, sigma: f64) -> f64 {
    let c = sigma + LN_2;
    let t = y / mu;
    let ln_l = log_l(sigma);
    let first = (c / mu).ln() - c * t;
    let second = softplus((-ln_l / c).ln() + (-(-c * t).exp_m1()).ln() + c * t + t * ln_l);
    let third = -(t * ln_l).exp();
    first + second + third
}

/// `(ℓᵢ, ∂ℓᵢ/∂log μᵢ, ∂ℓᵢ/∂log σᵢ)` through the classical parameters `λ = c/μ`, `β = −log L/c`.
fn observation_score(y: f64, mu: f64, sigma: f64) -> (f64, f64, f64) {
    let c = sigma + LN_2;
    let ln_l = log_l(sigma);
    let lambda = c / mu;
    let beta = -ln_l / c;
    let z = lambda * y;
    let e_bz = (-beta * z).exp();
    // log(B − 1) where B = 1 + β(1 − e^{−z})e^{−(β−1)z}
    let s = beta.ln() - beta * z + log_expm1(z);
    let w = logistic(s);
    let value = lambda.ln() - z + softplus(s) - e_bz;

    let d_lambda = 1.0 / lambda - y + w * y * (1.0 / (-(-z).exp_m1()) - beta) + beta * y * e_bz;
    let d_beta = w * (1.0 / beta - z) + z * e_bz;

    let d_eta_mu = -lambda * d_lambda;
    let l = ln_l.exp();
    let dl_dc = 1.0 / c.exp_m1();
    let dbeta_dc = -(dl_dc / l) / c + ln_l / (c * c);
    let d_eta_sigma = sigma * (d_lambda / mu + dbeta_dc * d_beta);
    (value, d_eta_mu, d_eta_sigma)
}

/// `ℓ(θ) = Σᵢ ℓᵢ(θ)`, summed in observation order.
///
/// Returns `−∞` when a link overflows or any term is not finite.
pub fn log_likelihood(spec: &ModelSpec, theta: &[f64]) -> Result<f64> {
    let (eta_mu, eta_sigma) = spec.predictors(theta)?;
    let mut total = 0.0;
    for i in 0..spec.n() {
        let term = observation_loglik(spec.response[i], eta_mu[i].exp(), eta_sigma[i].exp());
        if !term.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        total += term;
    }
    Ok(total)
}

/// `(ℓ(θ), ∇ℓ(θ))` with the analytic score. Non-finite states give `(−∞, 0)`.
pub fn log_likelihood_and_score(spec: &ModelSpec, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (eta_mu, eta_sigma) = spec.predictors(theta)?;
    let (p1, p2) = (spec.p1(), spec.p2());
    let mut total = 0.0;
    let mut grad = vec![0.0; p1 + p2];
    for i in 0..spec.n() {
        let (v, d_mu, d_sigma) =
            observation_score(spec.response[i], eta_mu[i].exp(), eta_sigma[i].exp());
        if !(v.is_finite() && d_mu.is_finite() && d_sigma.is_finite()) {
            return Ok((f64::NEG_INFINITY, vec![0.0; p1 + p2]));
        }
        total += v;
        for j in 0..p1 {
            grad[j] += d_mu * spec.mu_design[(i, j)];
        }
        for k in 0..p2 {
            grad[p1 + k] += d_sigma * spec.sigma_design[(i, k)];
        }
    }
    Ok((total, grad))
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Score max-norm required for convergence.
    pub grad_tol: f64,
    /// Relative log-likelihood change required for convergence.
    pub rel_tol: f64,
    /// Newton refinement steps on the score after the quasi-Newton phase.
    pub polish_steps: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
            rel_tol: 1e-10,
            polish_steps: 8,
        }
    }
}

/// Estimates and Wald inference for a fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    /// `(α, γ)` stacked.
    pub theta_hat: Vec<f64>,
    pub p1: usize,
    pub p2: usize,
    pub names: Vec<String>,
    pub info_inverse: DMatrix<f64>,
    pub std_errors: Vec<f64>,
    pub z_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_max_norm: f64,
    pub message: String,
}

impl FittedModel {
    /// Assembles a fitted model from an estimate and `J⁻¹(θ̂)`.
    pub fn from_parts(
        theta_hat: Vec<f64>,
        p1: usize,
        names: Vec<String>,
        info_inverse: DMatrix<f64>,
        loglik: f64,
        converged: bool,
        iterations: usize,
        gradient_max_norm: f64,
        message: String,
    ) -> Self {
        let p = theta_hat.len();
        let std_errors: Vec<f64> = (0..p).map(|j| info_inverse[(j, j)].sqrt()).collect();
        let z_stats: Vec<f64> = theta_hat
            .iter()
            .zip(&std_errors)
            .map(|(t, s)| t / s)
            .collect();
        let p_values = z_stats.iter().map(|z| normal::two_sided_p(*z)).collect();
        Self {
            theta_hat,
            p1,
            p2: p - p1,
            names,
            info_inverse,
            std_errors,
            z_stats,
            p_values,
            loglik,
            converged,
            iterations,
            gradient_max_norm,
            message,
        }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.theta_hat[..self.p1]
    }

    pub fn gamma(&self) -> &[f64] {
        &self.theta_hat[self.p1..]
    }

    /// Fitted `(μᵢ, σᵢ)` for every observation of `spec`.
    pub fn fitted_parameters(&self, spec: &ModelSpec) -> Result<Vec<(f64, f64)>> {
        let (eta_mu, eta_sigma) = spec.predictors(&self.theta_hat)?;
        Ok(eta_mu
            .iter()
            .zip(eta_sigma.iter())
            .map(|(m, s)| (m.exp(), s.exp()))
            .collect())
    }
}

/// Least-squares projection of a constant linear predictor onto a design.
fn constant_start(design: &DMatrix<f64>, value: f64) -> Vec<f64> {
    let target = DVector::from_element(design.nrows(), value);
    design
        .clone()
        .svd(true, true)
        .solve(&target, 1e-12)
        .map(|v| v.as_slice().to_vec())
        .unwrap_or_else(|_| vec![0.0; design.ncols()])
}

fn sample_median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Starting values `μᵢ⁽⁰⁾ = med(y)`, `σᵢ⁽⁰⁾ = 1` mapped through the log links.
pub fn initial_theta(spec: &ModelSpec) -> Vec<f64> {
    start_with_sigma(spec, 1.0)
}

/// `μᵢ⁽⁰⁾ = med(y)` and a constant `σᵢ⁽⁰⁾ = sigma`.
fn start_with_sigma(spec: &ModelSpec, sigma: f64) -> Vec<f64> {
    let mut theta = constant_start(&spec.mu_design, sample_median(&spec.response).ln());
    theta.extend(constant_start(&spec.sigma_design, sigma.ln()));
    theta
}

/// Constant `σ⁽⁰⁾` values tried by [`fit`], the first being [`initial_theta`].
pub const SIGMA_STARTS: [f64; 5] = [1.0, 0.5, 0.25, 0.1, 0.05];

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Newton steps on the score with a central-difference Jacobian of the score.
///
/// Returns the number of accepted steps and the relative log-likelihood change
/// of the last one.
fn polish(spec: &ModelSpec, theta: &mut Vec<f64>, steps: usize) -> Result<(usize, f64)> {
    let p = theta.len();
    let (mut value, mut grad) = log_likelihood_and_score(spec, theta)?;
    let mut taken = 0;
    let mut last_change = f64::INFINITY;
    for _ in 0..steps {
        if max_abs(&grad) == 0.0 {
            break;
        }
        let mut hess = DMatrix::zeros(p, p);
        let mut probe = theta.clone();
        for j in 0..p {
            let h = 1e-6 * theta[j].abs().max(1.0);
            probe[j] = theta[j] + h;
            let (_, gp) = log_likelihood_and_score(spec, &probe)?;
            probe[j] = theta[j] - h;
            let (_, gm) = log_likelihood_and_score(spec, &probe)?;
            probe[j] = theta[j];
            for k in 0..p {
                hess[(k, j)] = (gp[k] - gm[k]) / (2.0 * h);
            }
        }
        let neg_hess = -(&hess + hess.transpose()) * 0.5;
        let Some(chol) = neg_hess.cholesky() else {
            break;
        };
        let step = chol.solve(&DVector::from_column_slice(&grad));
        let candidate: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        let (v_new, g_new) = log_likelihood_and_score(spec, &candidate)?;
        if !(v_new.is_finite() && max_abs(&g_new) < max_abs(&grad) && v_new >= value - 1e-9 * value.abs().max(1.0)) {
            break;
        }
        *theta = candidate;
        last_change = (v_new - value).abs() / value.abs().max(1.0);
        value = v_new;
        grad = g_new;
        taken += 1;
    }
    Ok((taken, last_change))
}

struct Ascent {
    theta: Vec<f64>,
    loglik: f64,
    gradient_max_norm: f64,
    iterations: usize,
    converged: bool,
    message: String,
}

fn ascend(spec: &ModelSpec, theta0: &[f64], options: &FitOptions) -> Result<Ascent> {
    let bfgs = BfgsOptions {
        max_iter: options.max_iter,
        grad_tol: options.grad_tol,
        rel_tol: options.rel_tol,
        ..BfgsOptions::default()
    };
    let outcome = minimize(
        |theta| match log_likelihood_and_score(spec, theta) {
            Ok((v, g)) => (-v, g.into_iter().map(|x| -x).collect()),
            Err(_) => (f64::INFINITY, vec![0.0; theta.len()]),
        },
        theta0,
        bfgs,
    );

    let mut theta = outcome.x;
    let mut iterations = outcome.iterations;
    let mut message = outcome.message;
    let mut converged = outcome.converged;
    if outcome.value.is_finite() {
        let (taken, last_change) = polish(spec, &mut theta, options.polish_steps)?;
        iterations += taken;
        // the quasi-Newton phase can stall once ℓ stops resolving further
        // ascent; Newton steps on the score finish the job
        if !converged && taken > 0 && last_change < options.rel_tol {
            converged = true;
            message = "converged after Newton refinement".into();
        }
    }
    let (loglik, grad) = log_likelihood_and_score(spec, &theta)?;
    let grad_norm = max_abs(&grad);
    if converged && grad_norm >= options.grad_tol {
        converged = false;
        message = format!("score max-norm {grad_norm:e} above tolerance after refinement");
    }
    Ok(Ascent {
        theta,
        loglik,
        gradient_max_norm: grad_norm,
        iterations,
        converged,
        message,
    })
}

/// Maximum likelihood fit.
///
/// `ℓ` is often bimodal in `σ` (a mode with `β < 1` and one with `β > 1`), and
/// an ascent from `σ⁽⁰⁾ = 1` alone can stop at the lower one. The fit ascends
/// from each of [`SIGMA_STARTS`] and keeps the highest finite `ℓ`, preferring
/// earlier starts on ties. Ascents that leave the domain (some `σᵢ` below
/// [`MIN_SIGMA`], where the law degenerates to the exponential) are discarded;
/// if all do, the `σ⁽⁰⁾ = 1` ascent is returned unconverged.
///
/// A fit that does not reach the convergence criteria is still returned, with
/// `converged = false`; standard errors are NaN if the information matrix is
/// not positive definite there.
pub fn fit(spec: &ModelSpec, options: &FitOptions) -> Result<FittedModel> {
    let mut best: Option<Ascent> = None;
    let mut first: Option<Ascent> = None;
    let mut iterations = 0;
    for sigma0 in SIGMA_STARTS {
        let ascent = ascend(spec, &start_with_sigma(spec, sigma0), options)?;
        iterations += ascent.iterations;
        let (_, eta_sigma) = spec.predictors(&ascent.theta)?;
        let inside = eta_sigma.iter().all(|e| e.exp() >= MIN_SIGMA);
        let better = inside
            && ascent.loglik.is_finite()
            && best
                .as_ref()
                .is_none_or(|b| ascent.loglik > b.loglik + 1e-9 * b.loglik.abs().max(1.0));
        if better {
            best = Some(ascent);
        } else if first.is_none() && best.is_none() {
            first = Some(ascent);
        }
    }
    let Ascent {
        theta,
        loglik,
        gradient_max_norm,
        converged,
        mut message,
        ..
    } = match (best, first) {
        (Some(b), _) => b,
        (None, Some(mut f)) => {
            f.converged = false;
            f.message = format!("every start left the domain σ ≥ {MIN_SIGMA:e}; {}", f.message);
            f
        }
        (None, None) => unreachable!("at least one start"),
    };
    let p = spec.p();
    let info_inverse = match observed_information(spec, &theta) {
        Ok((_, inv)) => inv,
        Err(e) if converged => return Err(e),
        Err(e) => {
            message = format!("{message}; {e}");
            DMatrix::from_element(p, p, f64::NAN)
        }
    };
    let mut names: Vec<String> = spec.mu_names.clone();
    names.extend(spec.sigma_names.iter().cloned());
    Ok(FittedModel::from_parts(
        theta,
        spec.p1(),
        names,
        info_inverse,
        loglik,
        converged,
        iterations,
        gradient_max_norm,
        message,
    ))
}

/// Converts a Hessian of the log-likelihood into `(J, J⁻¹)` with `J = −(H + Hᵀ)/2`.
pub fn information_from_hessian(hessian: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let info = -(hessian + hessian.transpose()) * 0.5;
    if info.iter().any(|v| !v.is_finite()) {
        return Err(Error::Inference(
            "observed information contains non-finite entries".into(),
        ));
    }
    let Some(chol) = info.clone().cholesky() else {
        return Err(Error::Inference(
            "observed information is not positive definite (not a maximum, or a flat direction)"
                .into(),
        ));
    };
    let inverse = chol.inverse();
    Ok((info, inverse))
}

/// Observed information `J(θ̂)` and its inverse from a central-difference Hessian of `ℓ`.
pub fn observed_information(
    spec: &ModelSpec,
    theta_hat: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    spec.split(theta_hat)?;
    let hessian = central_hessian(
        |t| log_likelihood(spec, t).unwrap_or(f64::NEG_INFINITY),
        theta_hat,
    );
    information_from_hessian(&hessian)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldTest {
    pub z: f64,
    pub p_value: f64,
}

/// `z = (θ̂ⱼ − θⱼ⁰)/se(θ̂ⱼ)` with two-sided normal p-value.
pub fn wald_test(fitted: &FittedModel, j: usize, theta0: f64) -> Result<WaldTest> {
    let Some(&se) = fitted.std_errors.get(j) else {
        return Err(Error::Inference(format!(
            "coefficient index {j} out of range (p = {})",
            fitted.theta_hat.len()
        )));
    };
    if !(se > 0.0 && se.is_finite()) {
        return Err(Error::Inference(format!(
            "standard error of coefficient {j} is {se}; Wald statistic undefined"
        )));
    }
    let z = (fitted.theta_hat[j] - theta0) / se;
    Ok(WaldTest {
        z,
        p_value: normal::two_sided_p(z),
    })
}

fn apply_log_link(design: &DMatrix<f64>, coef: &[f64], label: &str) -> Result<Vec<f64>> {
    if design.ncols() != coef.len() {
        return Err(Error::Specification(format!(
            "{label} design has {} columns, model expects {}",
            design.ncols(),
            coef.len()
        )));
    }
    let eta = design * DVector::from_column_slice(coef);
    Ok(eta.iter().map(|e| e.exp()).collect())
}

/// Fitted medians `exp(W α̂)` for new design rows.
pub fn predict_median(fitted: &FittedModel, mu_design: &DMatrix<f64>) -> Result<Vec<f64>> {
    apply_log_link(mu_design, fitted.alpha(), "mu")
}

/// Fitted `σ = exp(Z γ̂)` for new design rows.
pub fn predict_sigma(fitted: &FittedModel, sigma_design: &DMatrix<f64>) -> Result<Vec<f64>> {
    apply_log_link(sigma_design, fitted.gamma(), "sigma")
}
