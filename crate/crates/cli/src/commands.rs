//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::Path;

use dtg_core::diagnostics::{quantile_residuals, render_svg, DiagnosticsReport, PlotKind};
use dtg_core::regression::{fit, predict_median, predict_sigma};
use dtg_core::{DtedParams, FitOptions, FittedModel, ModelSpec, RdtedParams};

use crate::args::{Cli, Command, DistArgs, DistFunction, FitArgs, ParamArgs, PredictArgs, ResidualsArgs, SampleArgs};
use crate::dataset::{ingest_csv, DatasetTable};
use crate::design::{build_design, design_matrix, response, Formula, ModelConfig, Term};
use crate::error::{CliError, Result};
use crate::model_file::ModelFile;
use crate::report::{coefficient_table, format_significant};

/// Digits printed by `dist`.
pub const DIST_DIGITS: usize = 10;

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a, out, err),
        Command::Predict(a) => cmd_predict(&a, out, err),
        Command::Dist(a) => cmd_dist(&a, out),
        Command::Sample(a) => cmd_sample(&a, out),
        Command::Residuals(a) => cmd_residuals(&a, out, err),
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        context: "standard output".into(),
        source: e,
    }
}

fn write_text(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}

fn warn_dropped(table: &DatasetTable, path: &Path, err: &mut dyn Write) {
    if table.dropped_rows > 0 {
        let _ = writeln!(
            err,
            "warning: dropped {} row(s) of {} with empty or unparseable cells",
            table.dropped_rows,
            path.display()
        );
    }
}

fn factor_columns(formulas: &[&Formula]) -> Vec<String> {
    formulas
        .iter()
        .flat_map(|f| f.terms.iter())
        .filter_map(|t| match t {
            Term::Factor { column, .. } => Some(column.clone()),
            Term::Numeric { .. } => None,
        })
        .collect()
}

fn formula_columns(formulas: &[&Formula]) -> Vec<String> {
    formulas
        .iter()
        .flat_map(|f| f.terms.iter())
        .map(|t| t.column().to_string())
        .collect()
}

/// Per-row fitted values and residuals as CSV text.
fn residual_csv(rows: &[usize], spec: &ModelSpec, fitted: &FittedModel, residuals: &[f64]) -> Result<String> {
    let params = fitted.fitted_parameters(spec)?;
    let mut text = String::from("row,y,median,sigma,residual\n");
    for (k, ((&y, (mu, sigma)), r)) in spec.response().iter().zip(params).zip(residuals).enumerate() {
        text.push_str(&format!("{},{y},{mu},{sigma},{r}\n", rows[k]));
    }
    Ok(text)
}

fn write_plots(dir: &Path, report: &DiagnosticsReport, err: &mut dyn Write) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    render_svg(report, PlotKind::Qq, &dir.join("qq.svg"))?;
    if report.worm_points.is_empty() {
        let _ = writeln!(err, "warning: worm plot needs at least 10 residuals; skipped");
    } else {
        render_svg(report, PlotKind::Worm, &dir.join("worm.svg"))?;
    }
    Ok(())
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    if !(args.tol > 0.0) {
        return Err(CliError::usage("--tol must be positive"));
    }
    let config = ModelConfig {
        response: args.response.clone(),
        mu_terms: args.mu.clone(),
        sigma_terms: args.sigma.clone(),
        factors: args.factor.clone(),
    };
    let table = ingest_csv(&args.data, &config.referenced_columns(), &config.factors)?;
    warn_dropped(&table, &args.data, err);
    let design = build_design(&table, &config)?;
    let options = FitOptions {
        max_iter: args.max_iter,
        grad_tol: args.tol,
        ..FitOptions::default()
    };
    let fitted = fit(&design.spec, &options)?;
    let model = ModelFile::new(&config.response, &design, &fitted);
    model.save(&args.out)?;
    out.write_all(coefficient_table(&model).as_bytes()).map_err(stdout_err)?;

    if args.residuals.is_some() || args.plots.is_some() {
        let residuals = quantile_residuals(&fitted, &design.spec)?;
        for w in &residuals.warnings {
            let _ = writeln!(err, "warning: {w}");
        }
        if let Some(path) = &args.residuals {
            let text = residual_csv(&table.rows, &design.spec, &fitted, &residuals.values)?;
            write_text(Some(path), &text, out)?;
        }
        if let Some(dir) = &args.plots {
            let report = DiagnosticsReport::from_residuals(residuals.values)?;
            write_plots(dir, &report, err)?;
        }
    }

    if !fitted.converged {
        return Err(CliError::NonConvergence(format!(
            "fit did not converge: {} (score max-norm {:e} after {} iterations)",
            fitted.message, fitted.gradient_max_norm, fitted.iterations
        )));
    }
    Ok(())
}

/// Design matrices of a saved model on new data; `with_response` also reads the response.
fn saved_design(
    model: &ModelFile,
    data: &Path,
    with_response: bool,
    err: &mut dyn Write,
) -> Result<(DatasetTable, nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>)> {
    let formulas = [&model.spec.mu, &model.spec.sigma];
    let mut columns = formula_columns(&formulas);
    if with_response {
        columns.insert(0, model.spec.response.clone());
    }
    if columns.is_empty() {
        // intercept-only model: still need the row count
        columns.push(model.spec.response.clone());
    }
    let table = ingest_csv(data, &columns, &factor_columns(&formulas))?;
    warn_dropped(&table, data, err);
    let w = design_matrix(&table, &model.spec.mu)?;
    let z = design_matrix(&table, &model.spec.sigma)?;
    Ok((table, w, z))
}

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let model = ModelFile::load(&args.model)?;
    let fitted = model.fitted()?;
    let (table, w, z) = saved_design(&model, &args.data, false, err)?;
    let medians = predict_median(&fitted, &w)?;
    let sigmas = predict_sigma(&fitted, &z)?;
    let mut text = String::from("row,median,sigma\n");
    for ((row, m), s) in table.rows.iter().zip(&medians).zip(&sigmas) {
        text.push_str(&format!("{row},{m},{s}\n"));
    }
    write_text(args.out.as_deref(), &text, out)
}

pub fn cmd_residuals(args: &ResidualsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let model = ModelFile::load(&args.model)?;
    let fitted = model.fitted()?;
    let (table, w, z) = saved_design(&model, &args.data, true, err)?;
    let spec = ModelSpec::new(response(&table, &model.spec.response)?, w, z)?;
    let residuals = quantile_residuals(&fitted, &spec)?;
    for msg in &residuals.warnings {
        let _ = writeln!(err, "warning: {msg}");
    }
    let text = residual_csv(&table.rows, &spec, &fitted, &residuals.values)?;
    write_text(args.out.as_deref(), &text, out)?;
    if let Some(dir) = &args.plots {
        let report = DiagnosticsReport::from_residuals(residuals.values)?;
        write_plots(dir, &report, err)?;
    }
    Ok(())
}

enum Law {
    Classical(DtedParams),
    Median(RdtedParams),
}

impl Law {
    fn from_args(p: &ParamArgs) -> Result<Self> {
        match (p.beta, p.lambda, p.mu, p.sigma) {
            (Some(beta), Some(lambda), None, None) => Ok(Law::Classical(DtedParams::new(beta, lambda)?)),
            (None, None, Some(mu), Some(sigma)) => Ok(Law::Median(RdtedParams::new(mu, sigma)?)),
            _ => Err(CliError::usage(
                "give either --beta and --lambda, or --mu and --sigma",
            )),
        }
    }

    fn classical(&self) -> DtedParams {
        match self {
            Law::Classical(c) => *c,
            Law::Median(m) => m.to_classical(),
        }
    }
}

pub fn cmd_dist(args: &DistArgs, out: &mut dyn Write) -> Result<()> {
    let law = Law::from_args(&args.params)?;
    let points = match args.function {
        DistFunction::Quantile | DistFunction::Moment => &args.p,
        _ => &args.x,
    };
    if points.is_empty() {
        let flag = match args.function {
            DistFunction::Quantile | DistFunction::Moment => "--p",
            _ => "--x",
        };
        return Err(CliError::usage(format!("{flag} is required")));
    }
    let classical = law.classical();
    let mut text = String::new();
    for &v in points {
        let value = match (args.function, &law) {
            (DistFunction::Pdf, Law::Median(m)) => m.pdf(v)?,
            (DistFunction::Cdf, Law::Median(m)) => m.cdf(v)?,
            (DistFunction::Sf, Law::Median(m)) => m.sf(v)?,
            (DistFunction::Quantile, Law::Median(m)) => m.quantile(v)?,
            (DistFunction::Pdf, _) => classical.pdf(v)?,
            (DistFunction::Cdf, _) => classical.cdf(v)?,
            (DistFunction::Sf, _) => classical.sf(v)?,
            (DistFunction::Quantile, _) => classical.quantile(v)?,
            (DistFunction::Hrf, _) => classical.hrf(v)?,
            (DistFunction::Moment, _) => {
                let delta = args.delta.unwrap_or(f64::INFINITY);
                classical.to_dtg().truncated_moment(v, args.eps, delta)?
            }
        };
        text.push_str(&format_significant(value, DIST_DIGITS));
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(stdout_err)
}

pub fn cmd_sample(args: &SampleArgs, out: &mut dyn Write) -> Result<()> {
    if args.n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let draws = match Law::from_args(&args.params)? {
        Law::Classical(c) => c.to_dtg().sample(args.n, args.seed)?,
        Law::Median(m) => m.sample(args.n, args.seed)?,
    };
    let mut text = String::with_capacity(20 * args.n + 2);
    text.push_str("x\n");
    for x in draws {
        text.push_str(&format!("{x}\n"));
    }
    write_text(args.out.as_deref(), &text, out)
}
