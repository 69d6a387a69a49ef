//! Standalone SVG rendering of the QQ and worm plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::DiagnosticsReport;
use crate::error::{Error, Result};

const WIDTH: f64 = 520.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Qq,
    Worm,
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn padded(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        let pad = |lo: f64, hi: f64| {
            let span = (hi - lo).max(1e-9);
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (x_lo, x_hi) = pad(x_lo, x_hi);
        let (y_lo, y_hi) = pad(y_lo, y_hi);
        Self { x_lo, x_hi, y_lo, y_hi }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - TOP - BOTTOM)
    }
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.2}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn axes(out: &mut String, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000000"/>"##,
        x1 - x0,
        y0 - y1
    );
    for t in nice_ticks(frame.x_lo, frame.x_hi) {
        let x = frame.px(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000000"/><text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"##,
            y0 + 5.0,
            y0 + 18.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(frame.y_lo, frame.y_hi) {
        let y = frame.py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#000000"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"##,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.2}" y="22" font-size="15" text-anchor="middle">{title}</text>"##,
        WIDTH / 2.0
    );
    let _ = writeln!(
        out,
        r##"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{x_label}</text>"##,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        out,
        r##"<text x="18" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 18 {:.2})">{y_label}</text>"##,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn polyline(out: &mut String, frame: &Frame, pts: impl Iterator<Item = (f64, f64)>, style: &str) {
    let coords: Vec<String> = pts
        .map(|(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" {style}/>"#,
        coords.join(" ")
    );
}

fn points(out: &mut String, frame: &Frame, pts: impl Iterator<Item = (f64, f64)>) {
    out.push_str("<g fill=\"#1f4e79\" fill-opacity=\"0.7\">\n");
    for (x, y) in pts {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.2"/>"#, frame.px(x), frame.py(y));
    }
    out.push_str("</g>\n");
}

/// Renders the QQ or worm panel of `report` as SVG text.
pub fn svg_string(report: &DiagnosticsReport, kind: PlotKind) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="100%" height="100%" fill="#ffffff"/>"##
    );
    match kind {
        PlotKind::Qq => {
            let qq = &report.qq_points;
            if qq.len() < 2 {
                return Err(Error::Domain("QQ plot needs at least 2 points".into()));
            }
            let (x_lo, x_hi) = (qq[0].theoretical, qq[qq.len() - 1].theoretical);
            let y_lo = qq.iter().map(|p| p.value).fold(f64::INFINITY, f64::min).min(x_lo);
            let y_hi = qq.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max).max(x_hi);
            let frame = Frame::padded(x_lo, x_hi, y_lo, y_hi);
            axes(&mut out, &frame, "QQ plot of quantile residuals", "Theoretical quantiles", "Sample quantiles");
            polyline(&mut out, &frame, [(x_lo, x_lo), (x_hi, x_hi)].into_iter(), r##"stroke="#c0392b" stroke-width="1.5""##);
            points(&mut out, &frame, qq.iter().map(|p| (p.theoretical, p.value)));
        }
        PlotKind::Worm => {
            let worm = &report.worm_points;
            if worm.is_empty() {
                return Err(Error::Domain("worm plot needs at least 10 points".into()));
            }
            let (x_lo, x_hi) = (worm[0].theoretical, worm[worm.len() - 1].theoretical);
            let extent = worm
                .iter()
                .map(|p| p.value.abs())
                .chain(report.bands.iter().map(|b| b.upper.abs().min(4.0)))
                .fold(0.0, f64::max)
                .max(0.1);
            let frame = Frame::padded(x_lo, x_hi, -extent, extent);
            axes(&mut out, &frame, "Worm plot of quantile residuals", "Unit normal quantile", "Deviation");
            polyline(&mut out, &frame, [(x_lo, 0.0), (x_hi, 0.0)].into_iter(), r##"stroke="#7f7f7f""##);
            let dotted = r##"stroke="#000000" stroke-dasharray="2,3""##;
            let clip = |v: f64| v.clamp(-extent, extent);
            polyline(&mut out, &frame, worm.iter().zip(&report.bands).map(|(p, b)| (p.theoretical, clip(b.lower))), dotted);
            polyline(&mut out, &frame, worm.iter().zip(&report.bands).map(|(p, b)| (p.theoretical, clip(b.upper))), dotted);
            points(&mut out, &frame, worm.iter().map(|p| (p.theoretical, p.value)));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes the chosen plot to `path`.
pub fn render_svg(report: &DiagnosticsReport, kind: PlotKind, path: &Path) -> Result<()> {
    let svg = svg_string(report, kind)?;
    fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_nice() {
        assert_eq!(nice_ticks(-2.1, 2.1), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(fmt_tick(-0.0), "0");
        assert_eq!(fmt_tick(0.5), "0.5");
    }
}
