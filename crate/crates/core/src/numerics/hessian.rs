//! Central finite-difference Hessians.

use nalgebra::DMatrix;

/// Relative step used by the observed-information computation.
pub const HESSIAN_REL_STEP: f64 = 1e-5;

/// Central-difference Hessian of `f` at `x` with steps `h_j = 1e-5·max(1, |x_j|)`.
///
/// The off-diagonal stencil is symmetric in `(j, k)`, so the result is symmetric
/// up to evaluation noise; callers may still symmetrize.
pub fn central_hessian<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> DMatrix<f64> {
    let p = x.len();
    let steps: Vec<f64> = x
        .iter()
        .map(|v| HESSIAN_REL_STEP * v.abs().max(1.0))
        .collect();
    let mut point = x.to_vec();
    let f0 = f(&point);
    let mut h = DMatrix::zeros(p, p);

    for j in 0..p {
        let hj = steps[j];
        point[j] = x[j] + hj;
        let fp = f(&point);
        point[j] = x[j] - hj;
        let fm = f(&point);
        point[j] = x[j];
        h[(j, j)] = (fp - 2.0 * f0 + fm) / (hj * hj);

        for k in 0..j {
            let hk = steps[k];
            let mut eval = |dj: f64, dk: f64| {
                point[j] = x[j] + dj;
                point[k] = x[k] + dk;
                let v = f(&point);
                point[j] = x[j];
                point[k] = x[k];
                v
            };
            let fpp = eval(hj, hk);
            let fpm = eval(hj, -hk);
            let fmp = eval(-hj, hk);
            let fmm = eval(-hj, -hk);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hj * hk);
            h[(j, k)] = v;
            h[(k, j)] = v;
        }
    }
    h
}
