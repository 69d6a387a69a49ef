#![allow(dead_code)]

use dtg_core::{DtgDistribution, ExponentialBaseline, ModelSpec};
use nalgebra::DMatrix;

/// 1% critical value of the KS statistic scaled by `√n`.
pub const KS_CRIT_1PCT: f64 = 1.627;

/// Two-sided Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn dtg(lambda: f64, beta: f64) -> DtgDistribution<ExponentialBaseline> {
    DtgDistribution::new(ExponentialBaseline::new(lambda).unwrap(), beta).unwrap()
}

pub fn intercept(n: usize) -> DMatrix<f64> {
    DMatrix::from_element(n, 1, 1.0)
}

/// Intercept-only specification with responses drawn at `(mu, sigma)`.
pub fn intercept_only(mu: f64, sigma: f64, n: usize, seed: u64) -> ModelSpec {
    let y = dtg_core::RdtedParams::new(mu, sigma)
        .unwrap()
        .sample(n, seed)
        .unwrap();
    ModelSpec::new(y, intercept(n), intercept(n)).unwrap()
}

/// Responses from a two-covariate median model; returns `(spec, true θ)`.
pub fn covariate_model(n: usize, seed: u64) -> (ModelSpec, Vec<f64>) {
    let theta = vec![0.4, 0.03, -0.3, -1.2, 0.2];
    let mut w = DMatrix::zeros(n, 3);
    let mut z = DMatrix::zeros(n, 2);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let age = 10.0 + (i * 37 % 101) as f64;
        let flag = if i % 3 == 0 { 1.0 } else { 0.0 };
        w[(i, 0)] = 1.0;
        w[(i, 1)] = age;
        w[(i, 2)] = flag;
        z[(i, 0)] = 1.0;
        z[(i, 1)] = flag;
        let mu = (theta[0] + theta[1] * age + theta[2] * flag).exp();
        let sigma = (theta[3] + theta[4] * flag).exp();
        let draw = dtg_core::RdtedParams::new(mu, sigma)
            .unwrap()
            .sample(1, seed.wrapping_mul(1_000_003).wrapping_add(i as u64))
            .unwrap();
        y.push(draw[0]);
    }
    (ModelSpec::new(y, w, z).unwrap(), theta)
}
