//! Text formatting of numbers and the coefficient table.

use std::fmt::Write as _;

use crate::model_file::ModelFile;

/// Plain decimal with `digits` significant digits and no trailing zeros.
///
/// Magnitudes outside `[1e-15, 1e21)` fall back to scientific notation.
pub fn format_significant(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits_str: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits_str = digits_str.trim_end_matches('0');
    let digits_str = if digits_str.is_empty() { "0" } else { digits_str };

    if !(-15..21).contains(&exp) {
        let (head, tail) = digits_str.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let len = digits_str.len() as i32;
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits_str)
    } else if exp + 1 >= len {
        format!("{}{}", digits_str, "0".repeat((exp + 1 - len) as usize))
    } else {
        let (int, frac) = digits_str.split_at((exp + 1) as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

/// p-value as displayed in the coefficient table.
pub fn format_p_value(p: f64) -> String {
    if p.is_nan() {
        "NA".into()
    } else if p < 0.001 {
        "<0.001".into()
    } else {
        format!("{p:.3}")
    }
}

fn fixed(v: f64, decimals: usize) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v:.decimals$}")
    }
}

/// Estimates, standard errors, z statistics and p-values, one row per coefficient.
pub fn coefficient_table(model: &ModelFile) -> String {
    let label = |c: &crate::model_file::Coefficient| format!("{}: {}", c.parameter, c.name);
    let width = model
        .coefficients
        .iter()
        .map(|c| label(c).chars().count())
        .max()
        .unwrap_or(0)
        .max(9);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "RDTED median regression, log links, n = {}, response {}",
        model.spec.n, model.spec.response
    );
    let _ = writeln!(
        out,
        "{:<width$} {:>10} {:>10} {:>9} {:>8}",
        "Parameter", "Estimate", "Std.Error", "z-stat", "p-value"
    );
    for c in &model.coefficients {
        let _ = writeln!(
            out,
            "{:<width$} {:>10} {:>10} {:>9} {:>8}",
            label(c),
            fixed(c.estimate, 4),
            fixed(c.std_error.0, 4),
            fixed(c.z.0, 3),
            format_p_value(c.p_value.0)
        );
    }
    let conv = &model.convergence;
    let _ = writeln!(out, "log-likelihood: {}", fixed(model.loglik, 4));
    let _ = writeln!(
        out,
        "{} after {} iterations (score max-norm {:.2e})",
        if conv.converged { "converged" } else { "NOT converged" },
        conv.iterations,
        conv.gradient_max_norm
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.437_554_247_511_763_9, 10), "0.4375542475");
        assert_eq!(format_significant(2.0, 10), "2");
        assert_eq!(format_significant(-1.5, 10), "-1.5");
        assert_eq!(format_significant(123_456_789_012.0, 10), "123456789000");
        assert_eq!(format_significant(0.000_123_4, 10), "0.0001234");
        assert_eq!(format_significant(1.999_999_999_99, 10), "2");
        assert_eq!(format_significant(1e-300, 10), "1e-300");
        assert_eq!(format_significant(0.0, 10), "0");
        assert_eq!(format_significant(f64::INFINITY, 10), "inf");
    }

    #[test]
    fn p_values() {
        assert_eq!(format_p_value(1e-30), "<0.001");
        assert_eq!(format_p_value(0.0123), "0.012");
        assert_eq!(format_p_value(f64::NAN), "NA");
    }
}
