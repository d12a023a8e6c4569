//! Quadrature on uniform grids and an adaptive Simpson integrator.

use crate::error::{Error, Result};

/// Composite Simpson rule over uniformly spaced samples.
///
/// Needs an odd number of samples (an even number of intervals).
pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Domain(format!("Simpson rule needs an odd number of at least 3 samples, got {n}")));
    }
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok(h / 3.0 * (values[0] + 4.0 * odd + 2.0 * even + values[n - 1]))
}

/// Running integral `F_i = ∫_{x_0}^{x_i} f` of uniformly spaced samples.
///
/// Each interval uses the cubic through four neighbouring samples (shifted
/// one-sided at the ends), so the result is fourth-order accurate at every
/// node, not only at even ones.
pub fn cumulative(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::Domain(format!("cumulative quadrature needs at least 4 samples, got {n}")));
    }
    let f = values;
    let c = h / 24.0;
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let piece = if i == 0 {
            c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if i == n - 2 {
            c * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1])
        } else {
            c * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
        };
        out[i + 1] = out[i] + piece;
    }
    Ok(out)
}

/// Running integral of a function known with its derivative at the nodes.
///
/// Integrates the cubic Hermite interpolant exactly:
/// `∫_{x_i}^{x_{i+1}} = h/2 (f_i + f_{i+1}) + h²/12 (f'_i - f'_{i+1})`.
pub fn cumulative_hermite(values: &[f64], slopes: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        out[i + 1] = out[i] + 0.5 * h * (values[i] + values[i + 1]) + h * h / 12.0 * (slopes[i] - slopes[i + 1]);
    }
    out
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let seg = Segment { a, b, fa, fm, fb, whole };
    refine(&mut f, seg, tol, max_depth)
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn refine<F>(f: &mut F, s: Segment, tol: f64, depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (s.a + s.b);
    let lm = 0.5 * (s.a + m);
    let rm = 0.5 * (m + s.b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - s.a) / 6.0 * (s.fa + 4.0 * flm + s.fm);
    let right = (s.b - m) / 6.0 * (s.fm + 4.0 * frm + s.fb);
    let delta = left + right - s.whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "adaptive quadrature did not reach tolerance {tol:e} on [{:.6}, {:.6}]",
            s.a, s.b
        )));
    }
    let l = Segment { a: s.a, b: m, fa: s.fa, fm: flm, fb: s.fm, whole: left };
    let r = Segment { a: m, b: s.b, fa: s.fm, fm: frm, fb: s.fb, whole: right };
    Ok(refine(f, l, 0.5 * tol, depth - 1)? + refine(f, r, 0.5 * tol, depth - 1)?)
}
