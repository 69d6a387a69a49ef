//! Model configuration and dummy-coded design matrices.

use dtg_core::ModelSpec;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{Column, DatasetTable};
use crate::error::{CliError, Result};

pub const INTERCEPT: &str = "(Intercept)";

/// Which columns enter each linear predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub response: String,
    /// Terms of the median predictor. `1` is the implicit intercept, `0`
    /// removes it.
    pub mu_terms: Vec<String>,
    pub sigma_terms: Vec<String>,
    /// Columns to treat as categorical even if they look numeric.
    pub factors: Vec<String>,
}

/// One side of the model after term parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Formula {
    pub intercept: bool,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    Numeric { column: String },
    /// Dummy coded against `levels[0]`.
    Factor { column: String, levels: Vec<String> },
}

impl Term {
    pub fn column(&self) -> &str {
        match self {
            Term::Numeric { column } | Term::Factor { column, .. } => column,
        }
    }
}

impl ModelConfig {
    /// Every dataset column the configuration refers to, response first.
    pub fn referenced_columns(&self) -> Vec<String> {
        let mut out = vec![self.response.clone()];
        for t in self.mu_terms.iter().chain(&self.sigma_terms) {
            if !is_intercept_token(t) && !out.contains(t) {
                out.push(t.clone());
            }
        }
        out
    }
}

fn is_intercept_token(t: &str) -> bool {
    matches!(t, "1" | "0" | "-1")
}

/// Resolves term names against the table's column types.
pub fn parse_formula(table: &DatasetTable, terms: &[String]) -> Result<Formula> {
    let intercept = !terms.iter().any(|t| t == "0" || t == "-1");
    let mut out: Vec<Term> = Vec::new();
    for name in terms.iter().filter(|t| !is_intercept_token(t)) {
        if out.iter().any(|t| t.column() == name) {
            continue;
        }
        out.push(match table.column(name)? {
            Column::Numeric(_) => Term::Numeric { column: name.clone() },
            Column::Categorical { levels, .. } => Term::Factor {
                column: name.clone(),
                levels: levels.clone(),
            },
        });
    }
    if !intercept && out.is_empty() {
        return Err(CliError::usage("a predictor needs an intercept or at least one term"));
    }
    Ok(Formula { intercept, terms: out })
}

/// Column names of the design matrix built from `formula`.
pub fn column_names(formula: &Formula) -> Vec<String> {
    let mut names = Vec::new();
    if formula.intercept {
        names.push(INTERCEPT.to_string());
    }
    for term in &formula.terms {
        match term {
            Term::Numeric { column } => names.push(column.clone()),
            Term::Factor { column, levels } => {
                names.extend(levels.iter().skip(1).map(|l| format!("{column}{l}")));
            }
        }
    }
    names
}

/// Builds the design matrix of `formula` on `table`.
///
/// Factor levels come from the formula, so a value the formula has not seen
/// is an error naming it.
pub fn design_matrix(table: &DatasetTable, formula: &Formula) -> Result<DMatrix<f64>> {
    let n = table.n_rows();
    let names = column_names(formula);
    let mut m = DMatrix::zeros(n, names.len());
    let mut j = 0;
    if formula.intercept {
        m.column_mut(0).fill(1.0);
        j = 1;
    }
    for term in &formula.terms {
        match (term, table.column(term.column())?) {
            (Term::Numeric { .. }, Column::Numeric(values)) => {
                for (i, v) in values.iter().enumerate() {
                    m[(i, j)] = *v;
                }
                j += 1;
            }
            (Term::Factor { column, levels }, Column::Categorical { values, .. }) => {
                for (i, v) in values.iter().enumerate() {
                    match levels.iter().position(|l| l == v) {
                        Some(0) => {}
                        Some(k) => m[(i, j + k - 1)] = 1.0,
                        None => {
                            return Err(CliError::usage(format!(
                                "unknown level '{v}' in column '{column}' (known: {})",
                                levels.join(", ")
                            )))
                        }
                    }
                }
                j += levels.len().saturating_sub(1);
            }
            (Term::Numeric { column }, _) => {
                return Err(CliError::usage(format!("column '{column}' must be numeric")))
            }
            (Term::Factor { column, .. }, _) => {
                return Err(CliError::usage(format!("column '{column}' must be categorical")))
            }
        }
    }
    Ok(m)
}

/// Positive numeric response vector.
pub fn response(table: &DatasetTable, name: &str) -> Result<Vec<f64>> {
    match table.column(name)? {
        Column::Numeric(v) => Ok(v.clone()),
        Column::Categorical { .. } => Err(CliError::usage(format!("response '{name}' is not numeric"))),
    }
}

/// The regression specification and the formulas that produced it.
#[derive(Debug, Clone)]
pub struct Design {
    pub spec: ModelSpec,
    pub mu: Formula,
    pub sigma: Formula,
}

/// Dummy codes the configured model on `table` and checks full rank.
pub fn build_design(table: &DatasetTable, config: &ModelConfig) -> Result<Design> {
    let mu = parse_formula(table, &config.mu_terms)?;
    let sigma = parse_formula(table, &config.sigma_terms)?;
    let spec = ModelSpec::with_names(
        response(table, &config.response)?,
        design_matrix(table, &mu)?,
        design_matrix(table, &sigma)?,
        column_names(&mu),
        column_names(&sigma),
    )?;
    Ok(Design { spec, mu, sigma })
}
