//! Quantile residuals and the QQ / worm plot data built from them.

mod svg;

pub use svg::{render_svg, svg_string, PlotKind};

use crate::dted::RdtedParams;
use crate::error::{Error, Result};
use crate::numerics::normal;
use crate::regression::{FittedModel, ModelSpec};

/// CDF values are clamped to `[CDF_CLAMP, 1 − CDF_CLAMP]` before `Φ⁻¹`.
pub const CDF_CLAMP: f64 = 1e-15;

/// Two-sided pointwise band multiplier of the worm plot.
pub const BAND_Z: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileResiduals {
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

/// `rᵢ = Φ⁻¹(F(yᵢ; μ̂ᵢ, σ̂ᵢ))`.
pub fn quantile_residuals(fitted: &FittedModel, spec: &ModelSpec) -> Result<QuantileResiduals> {
    let mut warnings = Vec::new();
    if !fitted.converged {
        warnings.push(format!(
            "model did not converge ({}); residuals are computed at the last iterate",
            fitted.message
        ));
    }
    let params = fitted.fitted_parameters(spec)?;
    let values = spec
        .response()
        .iter()
        .zip(params)
        .map(|(&y, (mu, sigma))| {
            let u = RdtedParams::new(mu, sigma)?.cdf(y)?;
            Ok(normal::quantile(u.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(QuantileResiduals { values, warnings })
}

/// Blom plotting position `(i − 0.375)/(n + 0.25)` for 1-based rank `i`.
pub fn plotting_position(rank: usize, n: usize) -> f64 {
    (rank as f64 - 0.375) / (n as f64 + 0.25)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotPoint {
    pub theoretical: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
}

fn sorted(residuals: &[f64]) -> Vec<f64> {
    let mut r = residuals.to_vec();
    r.sort_by(f64::total_cmp);
    r
}

/// Ordered residuals against `Φ⁻¹` of the Blom positions.
pub fn qq_plot_data(residuals: &[f64]) -> Result<Vec<PlotPoint>> {
    let n = residuals.len();
    if n < 2 {
        return Err(Error::Domain(format!("QQ plot needs at least 2 residuals, got {n}")));
    }
    Ok(sorted(residuals)
        .into_iter()
        .enumerate()
        .map(|(i, value)| PlotPoint {
            theoretical: normal::quantile(plotting_position(i + 1, n)),
            value,
        })
        .collect())
}

/// De-trended QQ points with pointwise 95% bands
/// `±1.96·sqrt(pᵢ(1 − pᵢ)/n)/φ(zᵢ)`.
pub fn worm_plot_data(residuals: &[f64]) -> Result<(Vec<PlotPoint>, Vec<Band>)> {
    let n = residuals.len();
    if n < 10 {
        return Err(Error::Domain(format!("worm plot needs at least 10 residuals, got {n}")));
    }
    let qq = qq_plot_data(residuals)?;
    let mut points = Vec::with_capacity(n);
    let mut bands = Vec::with_capacity(n);
    for (i, pt) in qq.iter().enumerate() {
        let p = plotting_position(i + 1, n);
        let half = BAND_Z * (p * (1.0 - p) / n as f64).sqrt() / normal::pdf(pt.theoretical);
        points.push(PlotPoint {
            theoretical: pt.theoretical,
            value: pt.value - pt.theoretical,
        });
        bands.push(Band {
            lower: -half,
            upper: half,
        });
    }
    Ok((points, bands))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSummary {
    pub mean: f64,
    /// Sample variance (divisor `n − 1`).
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl ResidualSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
        Self {
            mean,
            variance: m2 * n / (n - 1.0),
            skewness: m3 / m2.powf(1.5),
            excess_kurtosis: m4 / (m2 * m2) - 3.0,
        }
    }
}

/// Everything needed to draw and summarize the residual diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub residuals: Vec<f64>,
    pub qq_points: Vec<PlotPoint>,
    /// Empty when fewer than 10 residuals are available.
    pub worm_points: Vec<PlotPoint>,
    pub bands: Vec<Band>,
    pub summary: ResidualSummary,
    pub warnings: Vec<String>,
}

impl DiagnosticsReport {
    pub fn from_residuals(residuals: Vec<f64>) -> Result<Self> {
        let qq_points = qq_plot_data(&residuals)?;
        let (worm_points, bands) = if residuals.len() >= 10 {
            worm_plot_data(&residuals)?
        } else {
            (Vec::new(), Vec::new())
        };
        let summary = ResidualSummary::of(&residuals);
        Ok(Self {
            residuals,
            qq_points,
            worm_points,
            bands,
            summary,
            warnings: Vec::new(),
        })
    }

    pub fn from_model(fitted: &FittedModel, spec: &ModelSpec) -> Result<Self> {
        let r = quantile_residuals(fitted, spec)?;
        let mut report = Self::from_residuals(r.values)?;
        report.warnings = r.warnings;
        Ok(report)
    }

    /// Fraction of worm points inside their bands.
    pub fn fraction_inside_bands(&self) -> f64 {
        if self.worm_points.is_empty() {
            return f64::NAN;
        }
        let inside = self
            .worm_points
            .iter()
            .zip(&self.bands)
            .filter(|(p, b)| p.value >= b.lower && p.value <= b.upper)
            .count();
        inside as f64 / self.worm_points.len() as f64
    }
}
