//! JSON persistence of fitted models.

use std::fs;
use std::path::Path;

use dtg_core::FittedModel;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::design::{Design, Formula};
use crate::error::{CliError, Result};

pub const FORMAT: &str = "dtg-rdted-model";

/// Non-finite floats are written as `null` and read back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Real(#[serde(with = "nullable")] pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub response: String,
    pub links: [String; 2],
    pub mu: Formula,
    pub sigma: Formula,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub parameter: String,
    pub name: String,
    pub estimate: f64,
    pub std_error: Real,
    pub z: Real,
    pub p_value: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    pub gradient_max_norm: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub library_version: String,
    pub spec: SpecEcho,
    pub coefficients: Vec<Coefficient>,
    /// `J⁻¹(θ̂)`, row major, in coefficient order.
    pub info_inverse: Vec<Vec<Real>>,
    pub loglik: f64,
    pub convergence: Convergence,
}

impl ModelFile {
    pub fn new(response: &str, design: &Design, fitted: &FittedModel) -> Self {
        let p1 = fitted.p1;
        let coefficients = (0..fitted.theta_hat.len())
            .map(|j| Coefficient {
                parameter: if j < p1 { "mu" } else { "sigma" }.into(),
                name: fitted.names[j].clone(),
                estimate: fitted.theta_hat[j],
                std_error: Real(fitted.std_errors[j]),
                z: Real(fitted.z_stats[j]),
                p_value: Real(fitted.p_values[j]),
            })
            .collect();
        let info_inverse = fitted
            .info_inverse
            .row_iter()
            .map(|r| r.iter().map(|&v| Real(v)).collect())
            .collect();
        Self {
            format: FORMAT.into(),
            library_version: dtg_core::VERSION.into(),
            spec: SpecEcho {
                response: response.into(),
                links: ["log".into(), "log".into()],
                mu: design.mu.clone(),
                sigma: design.sigma.clone(),
                n: design.spec.n(),
            },
            coefficients,
            info_inverse,
            loglik: fitted.loglik,
            convergence: Convergence {
                converged: fitted.converged,
                iterations: fitted.iterations,
                gradient_max_norm: fitted.gradient_max_norm,
                message: fitted.message.clone(),
            },
        }
    }

    /// Rebuilds the fitted model carried by the file.
    pub fn fitted(&self) -> Result<FittedModel> {
        let p = self.coefficients.len();
        let p1 = self.coefficients.iter().filter(|c| c.parameter == "mu").count();
        if self.info_inverse.len() != p || self.info_inverse.iter().any(|r| r.len() != p) {
            return Err(CliError::usage("model file: info_inverse does not match the coefficients"));
        }
        let info = DMatrix::from_fn(p, p, |i, j| self.info_inverse[i][j].0);
        Ok(FittedModel::from_parts(
            self.coefficients.iter().map(|c| c.estimate).collect(),
            p1,
            self.coefficients.iter().map(|c| c.name.clone()).collect(),
            info,
            self.loglik,
            self.convergence.converged,
            self.convergence.iterations,
            self.convergence.gradient_max_norm,
            self.convergence.message.clone(),
        ))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| CliError::usage(format!("invalid model file: {e}")))?;
        if file.format != FORMAT {
            return Err(CliError::usage(format!(
                "model file format '{}' is not '{FORMAT}'",
                file.format
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }
}
