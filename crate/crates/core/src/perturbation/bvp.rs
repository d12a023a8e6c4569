//! Finite-difference solver for `Lₙu = -u'' - u'/r + (n²/r²)u = b` on a disk.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{RadialGridFunction, MIN_POINTS};

/// Default number of grid intervals on `[0, R]`.
pub const BVP_INTERVALS: usize = 512;

/// Solution of a mode boundary value problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeBvpResult {
    /// `u` on `[0, R]`.
    pub solution: RadialGridFunction,
    /// Second-order one-sided `u'(R)`.
    pub boundary_derivative: f64,
    /// Largest interior residual of the discrete system relative to `max|b|`.
    pub residual: f64,
}

/// Solves `Lₙu = b` on `[0, r0]` with `u(r0) = boundary_value`, taking `b`
/// at the nodes of `rhs`.
///
/// Regularity at the origin is imposed as `u(0) = 0` for `n ≥ 1` and as the
/// symmetric limit `-2u''(0) = b(0)` for `n = 0`. Central differences give
/// second-order accuracy; the tridiagonal system is solved directly.
pub fn solve_ln_bvp(n: u32, rhs: &RadialGridFunction, boundary_value: f64, r0: f64) -> Result<ModeBvpResult> {
    if (rhs.r_max() - r0).abs() > 1e-12 * r0 {
        return Err(Error::Domain(format!("right side is given on [0, {}] but the disk has radius {r0}", rhs.r_max())));
    }
    solve_on_nodes(n, rhs.values(), boundary_value, r0)
}

/// Same as [`solve_ln_bvp`] with `b` sampled from a function on `intervals`
/// uniform intervals.
pub fn solve_ln_bvp_fn<F>(n: u32, mut b: F, boundary_value: f64, r0: f64, intervals: usize) -> Result<ModeBvpResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let h = r0 / intervals as f64;
    let values = (0..=intervals).map(|i| b(i as f64 * h)).collect::<Result<Vec<_>>>()?;
    solve_on_nodes(n, &values, boundary_value, r0)
}

fn solve_on_nodes(n: u32, b: &[f64], boundary_value: f64, r0: f64) -> Result<ModeBvpResult> {
    let len = b.len();
    if len < MIN_POINTS {
        return Err(Error::Domain(format!("BVP grid needs at least {MIN_POINTS} points, got {len}")));
    }
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!("disk radius must be positive, got {r0}")));
    }
    let m = len - 1;
    let h = r0 / m as f64;
    let n2 = (n as f64).powi(2);
    // Row i couples u[i-1], u[i], u[i+1].
    let coeffs = |i: usize| -> (f64, f64, f64) {
        let r = i as f64 * h;
        let lower = -1.0 / (h * h) + 1.0 / (2.0 * r * h);
        let diag = 2.0 / (h * h) + n2 / (r * r);
        let upper = -1.0 / (h * h) - 1.0 / (2.0 * r * h);
        (lower, diag, upper)
    };

    let first = if n == 0 { 0 } else { 1 };
    let size = m - first;
    let mut lower = vec![0.0; size];
    let mut diag = vec![0.0; size];
    let mut upper = vec![0.0; size];
    let mut right = vec![0.0; size];
    for (k, i) in (first..m).enumerate() {
        if i == 0 {
            diag[k] = 4.0 / (h * h);
            upper[k] = -4.0 / (h * h);
            right[k] = b[0];
            continue;
        }
        let (l, d, u) = coeffs(i);
        lower[k] = l;
        diag[k] = d;
        upper[k] = u;
        right[k] = b[i];
        if i == m - 1 {
            right[k] -= u * boundary_value;
            upper[k] = 0.0;
        }
    }
    let interior = thomas(&lower, &diag, &upper, &right)?;

    let mut u = vec![0.0; len];
    u[first..m].copy_from_slice(&interior);
    u[m] = boundary_value;

    let scale = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut residual = 0.0f64;
    for i in 1..m {
        let (l, d, up) = coeffs(i);
        let ri = l * u[i - 1] + d * u[i] + up * u[i + 1] - b[i];
        residual = residual.max(ri.abs());
    }
    let residual = if scale > 0.0 { residual / scale } else { residual };
    if residual > 1e-8 {
        return Err(Error::Numerical(format!("BVP residual {residual:e} exceeds 1e-8")));
    }
    let boundary_derivative = (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * h);
    Ok(ModeBvpResult { solution: RadialGridFunction::from_samples(r0, u)?, boundary_derivative, residual })
}

/// Tridiagonal solve; `lower[0]` and `upper[last]` are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], right: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    for i in 0..n {
        if i > 0 {
            denom = diag[i] - lower[i] * c[i - 1];
        }
        if denom.abs() < f64::MIN_POSITIVE {
            return Err(Error::Numerical(format!("singular tridiagonal system at row {i}")));
        }
        c[i] = upper[i] / denom;
        d[i] = (right[i] - if i > 0 { lower[i] * d[i - 1] } else { 0.0 }) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: f64 = 3.3;

    type Profile = Box<dyn Fn(f64) -> f64>;

    /// Max error against the manufactured solution for mode `n`.
    fn manufactured_error(n: u32, intervals: usize) -> f64 {
        let nf = n as f64;
        let (u, b): (Profile, Profile) = if n == 0 {
            (
                Box::new(|r: f64| r.cos() - R.cos()),
                Box::new(|r: f64| if r == 0.0 { 2.0 } else { r.cos() + r.sin() / r }),
            )
        } else {
            (
                Box::new(move |r: f64| r.powi(n as i32) * (R - r)),
                Box::new(move |r: f64| (2.0 * nf + 1.0) * r.powi(n as i32 - 1)),
            )
        };
        let sol = solve_ln_bvp_fn(n, |r| Ok(b(r)), u(R), R, intervals).unwrap();
        sol.solution.rows().iter().map(|&(r, v)| (v - u(r)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_data_gives_zero() {
        let sol = solve_ln_bvp_fn(3, |_| Ok(0.0), 0.0, R, 128).unwrap();
        assert!(sol.solution.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn second_order_convergence() {
        for n in [0, 2, 5] {
            let ratio = manufactured_error(n, 128) / manufactured_error(n, 256);
            assert!((ratio - 4.0).abs() < 0.4, "n = {n}: ratio {ratio}");
        }
    }

    #[test]
    fn boundary_value_is_exact() {
        let sol = solve_ln_bvp_fn(2, |r| Ok(r.sin()), 0.37, R, 128).unwrap();
        assert_eq!(*sol.solution.values().last().unwrap(), 0.37);
    }

    #[test]
    fn mismatched_radius_is_rejected() {
        let g = RadialGridFunction::new(1.0, vec![0.0; 65], vec![0.0; 65]).unwrap();
        assert!(solve_ln_bvp(2, &g, 0.0, 2.0).is_err());
    }
}
