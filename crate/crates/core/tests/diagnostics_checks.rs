mod common;

use common::{covariate_model, intercept_only, ks_statistic, KS_CRIT_1PCT};
use dtg_core::diagnostics::{
    qq_plot_data, quantile_residuals, render_svg, svg_string, DiagnosticsReport, PlotKind,
};
use dtg_core::regression::fit;
use dtg_core::{FitOptions, FittedModel, ModelSpec, RdtedParams};
use nalgebra::DMatrix;

fn fitted(spec: &ModelSpec) -> FittedModel {
    let m = fit(spec, &FitOptions::default()).unwrap();
    assert!(m.converged, "{}", m.message);
    m
}

#[test]
fn probability_integral_transform_is_uniform() {
    let truth = RdtedParams::new(2.5, 0.8).unwrap();
    let y = truth.sample(10_000, 31).unwrap();
    let u: Vec<f64> = y.iter().map(|&v| truth.cdf(v).unwrap()).collect();
    let ks = ks_statistic(&u, |x| x.clamp(0.0, 1.0));
    assert!(ks * 100.0 < KS_CRIT_1PCT, "{ks}");
}

#[test]
fn residuals_are_calibrated() {
    let (spec, _) = covariate_model(10_000, 17);
    let report = DiagnosticsReport::from_model(&fitted(&spec), &spec).unwrap();
    let s = report.summary;
    assert!(s.mean.abs() < 0.05, "{s:?}");
    assert!((0.9..1.1).contains(&s.variance), "{s:?}");
    assert!(s.skewness.abs() < 0.1, "{s:?}");
    assert!(s.excess_kurtosis.abs() < 0.2, "{s:?}");
    assert!(report.fraction_inside_bands() >= 0.95);
    assert!(report.warnings.is_empty());
}

#[test]
fn intercept_only_residuals_are_calibrated() {
    let spec = intercept_only(3.0, 0.5, 5000, 23);
    let r = quantile_residuals(&fitted(&spec), &spec).unwrap().values;
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let var = r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.05 && (0.9..1.1).contains(&var), "{mean} {var}");
}

#[test]
fn residual_at_fitted_median_is_zero_and_monotone() {
    let spec = intercept_only(3.0, 0.5, 200, 3);
    let m = fitted(&spec);
    let mu = m.theta_hat[0].exp();
    let mut y: Vec<f64> = (1..=40).map(|k| mu * k as f64 / 20.0).collect();
    y.push(mu);
    let n = y.len();
    let probe = ModelSpec::new(
        y,
        DMatrix::from_element(n, 1, 1.0),
        DMatrix::from_element(n, 1, 1.0),
    )
    .unwrap();
    let r = quantile_residuals(&m, &probe).unwrap().values;
    assert!(r[n - 1].abs() < 1e-10, "{}", r[n - 1]);
    assert!(r[..n - 1].windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn residuals_stay_finite_in_the_tails() {
    let spec = intercept_only(3.0, 0.5, 200, 3);
    let m = fitted(&spec);
    let y = vec![1e-12, 1e4, 3.0];
    let probe = ModelSpec::new(y, DMatrix::from_element(3, 1, 1.0), DMatrix::from_element(3, 1, 1.0)).unwrap();
    let r = quantile_residuals(&m, &probe).unwrap().values;
    assert!(r.iter().all(|v| v.is_finite() && v.abs() < 8.3), "{r:?}");
}

#[test]
fn non_converged_fit_carries_a_warning() {
    let spec = intercept_only(3.0, 0.5, 200, 3);
    let m = fit(&spec, &FitOptions { max_iter: 1, polish_steps: 0, ..Default::default() }).unwrap();
    assert!(!m.converged);
    assert_eq!(quantile_residuals(&m, &spec).unwrap().warnings.len(), 1);
}

#[test]
fn qq_of_two_points_is_symmetric() {
    let qq = qq_plot_data(&[1.0, -1.0]).unwrap();
    assert_eq!(qq[0].theoretical, -qq[1].theoretical);
    assert_eq!((qq[0].value, qq[1].value), (-1.0, 1.0));
    assert!(qq_plot_data(&[0.3]).is_err());
}

#[test]
fn svg_is_well_formed_with_one_circle_per_point() {
    let spec = intercept_only(3.0, 0.5, 385, 9);
    let report = DiagnosticsReport::from_model(&fitted(&spec), &spec).unwrap();
    for kind in [PlotKind::Qq, PlotKind::Worm] {
        let text = svg_string(&report, kind).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        let circles = doc.descendants().filter(|n| n.has_tag_name("circle")).count();
        assert_eq!(circles, 385);
        let texts: Vec<&str> = doc
            .descendants()
            .filter(|n| n.has_tag_name("text"))
            .filter_map(|n| n.text())
            .collect();
        assert!(texts.iter().any(|t| t.contains("plot")), "{texts:?}");
        if kind == PlotKind::Worm {
            let dotted = doc
                .descendants()
                .filter(|n| n.attribute("stroke-dasharray").is_some())
                .count();
            assert_eq!(dotted, 2);
        }
    }
}

#[test]
fn rendering_is_deterministic() {
    let spec = intercept_only(3.0, 0.5, 300, 4);
    let report = DiagnosticsReport::from_model(&fitted(&spec), &spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    render_svg(&report, PlotKind::Worm, &a).unwrap();
    render_svg(&report, PlotKind::Worm, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let bad = dir.path().join("missing").join("x.svg");
    assert!(matches!(
        render_svg(&report, PlotKind::Qq, &bad),
        Err(dtg_core::Error::Io(_))
    ));
}

#[test]
fn tiny_reports_are_rejected() {
    let report = DiagnosticsReport::from_residuals(vec![0.1, -0.2, 0.3]).unwrap();
    assert!(svg_string(&report, PlotKind::Qq).is_ok());
    assert!(svg_string(&report, PlotKind::Worm).is_err());
    assert!(DiagnosticsReport::from_residuals(vec![0.1]).is_err());
}
