//! BFGS quasi-Newton minimization with a step-length bound and Armijo backtracking.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Convergence requires the gradient max-norm below this value.
    pub grad_tol: f64,
    /// ...and the relative change of the objective below this value.
    pub rel_tol: f64,
    /// Largest allowed component of a single step.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
            rel_tol: 1e-10,
            max_step: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub message: String,
}

fn max_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Minimizes an objective given as `x ↦ (value, gradient)`.
///
/// Non-finite values are treated as +∞ so the line search backs off.
pub fn minimize<F>(mut objective: F, x0: &[f64], opts: BfgsOptions) -> BfgsOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let p = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let (mut f, g0) = objective(x.as_slice());
    let mut g = DVector::from_vec(g0);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return BfgsOutcome {
            x: x0.to_vec(),
            value: f,
            gradient: g.as_slice().to_vec(),
            iterations: 0,
            converged: false,
            message: "objective is not finite at the starting point".into(),
        };
    }

    let mut h_inv = DMatrix::<f64>::identity(p, p);
    let mut fresh = true;
    let mut rel_change = f64::INFINITY;
    let mut message = String::from("iteration limit reached");
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        if max_norm(&g) < opts.grad_tol && rel_change < opts.rel_tol {
            converged = true;
            message = "converged".into();
            break;
        }
        iterations += 1;

        let mut d = -(&h_inv * &g);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            h_inv = DMatrix::identity(p, p);
            fresh = true;
            d = -g.clone();
            slope = g.dot(&d);
        }
        let longest = max_norm(&d);
        if longest > opts.max_step {
            d *= opts.max_step / longest;
            slope = g.dot(&d);
        }

        let mut accepted = None;
        let mut t = 1.0;
        // objective changes below this are indistinguishable from roundoff
        let noise = 1e-12 * f.abs().max(1.0);
        for _ in 0..60 {
            let trial = &x + &d * t;
            if trial == x {
                break;
            }
            let (ft, gt) = objective(trial.as_slice());
            if ft.is_finite() && gt.iter().all(|v| v.is_finite()) {
                let gt = DVector::from_vec(gt);
                let armijo = ft <= f + 1e-4 * t * slope;
                // approximate Wolfe: trust the directional derivative once
                // the decrease is buried in roundoff
                let dphi = gt.dot(&d);
                let approx_wolfe = ft <= f + noise && dphi >= 0.9 * slope && dphi <= -0.8 * slope;
                if armijo || approx_wolfe {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            t *= 0.5;
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            if !fresh {
                h_inv = DMatrix::identity(p, p);
                fresh = true;
                continue;
            }
            if max_norm(&g) < opts.grad_tol {
                // No further decrease is representable; the gradient test already holds.
                converged = true;
                message = "converged (line search exhausted at stationary point)".into();
            } else {
                message = "line search failed".into();
            }
            break;
        };

        let s = &x_new - &x;
        let y = &g_new - &g;
        rel_change = (f_new - f).abs() / f.abs().max(1.0);
        x = x_new;
        f = f_new;
        g = g_new;

        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                h_inv = DMatrix::identity(p, p) * (sy / y.dot(&y));
                fresh = false;
            }
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H ← H − ρ(H y sᵀ + s yᵀ H) + (ρ² yᵀHy + ρ) s sᵀ
            h_inv -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
            h_inv += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
    }

    if !converged && max_norm(&g) < opts.grad_tol && rel_change < opts.rel_tol {
        converged = true;
        message = "converged".into();
    }

    BfgsOutcome {
        x: x.as_slice().to_vec(),
        value: f,
        gradient: g.as_slice().to_vec(),
        iterations,
        converged,
        message,
    }
}
