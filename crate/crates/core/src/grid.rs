//! Radial functions sampled on a uniform grid over `[0, r_max]`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest admissible number of nodes.
pub const MIN_POINTS: usize = 64;

/// Samples of a radial function together with nodal slopes.
///
/// Between nodes the function is the cubic Hermite interpolant of values and
/// slopes, which is `C¹` and reproduces the samples at the nodes. Outside
/// `[0, r_max]` the end cubic is continued.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGridFunction {
    r_max: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    #[serde(skip)]
    h: f64,
}

impl RadialGridFunction {
    pub fn new(r_max: f64, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Domain(format!("grid extent must be positive, got {r_max}")));
        }
        if values.len() < MIN_POINTS {
            return Err(Error::Domain(format!("grid needs at least {MIN_POINTS} points, got {}", values.len())));
        }
        if slopes.len() != values.len() {
            return Err(Error::Domain(format!("{} values but {} slopes", values.len(), slopes.len())));
        }
        let h = r_max / (values.len() - 1) as f64;
        Ok(Self { r_max, values, slopes, h })
    }

    /// Samples `f` and its derivative `df` at `n_points` uniform nodes.
    pub fn from_fn<F, D>(r_max: f64, n_points: usize, mut f: F, mut df: D) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
        D: FnMut(f64) -> Result<f64>,
    {
        let h = r_max / (n_points.max(2) - 1) as f64;
        let mut values = Vec::with_capacity(n_points);
        let mut slopes = Vec::with_capacity(n_points);
        for i in 0..n_points {
            let r = i as f64 * h;
            values.push(f(r)?);
            slopes.push(df(r)?);
        }
        Self::new(r_max, values, slopes)
    }

    /// Builds slopes from the samples by fourth-order finite differences.
    pub fn from_samples(r_max: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < MIN_POINTS {
            return Err(Error::Domain(format!("grid needs at least {MIN_POINTS} points, got {n}")));
        }
        let h = r_max / (n - 1) as f64;
        let v = &values;
        let slopes = (0..n)
            .map(|i| {
                let d = if i < 2 {
                    let c: [f64; 5] =
                        if i == 0 { [-25.0, 48.0, -36.0, 16.0, -3.0] } else { [-3.0, -10.0, 18.0, -6.0, 1.0] };
                    (0..5).map(|k| c[k] * v[k]).sum::<f64>()
                } else if i + 2 >= n {
                    let b = n - 5;
                    let c: [f64; 5] =
                        if i == n - 1 { [3.0, -16.0, 36.0, -48.0, 25.0] } else { [-1.0, 6.0, -18.0, 10.0, 3.0] };
                    (0..5).map(|k| c[k] * v[b + k]).sum::<f64>()
                } else {
                    v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]
                };
                d / (12.0 * h)
            })
            .collect();
        Self::new(r_max, values, slopes)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn locate(&self, r: f64) -> (usize, f64, f64) {
        let h = self.h;
        let x = r / h;
        let i = (x.max(0.0) as usize).min(self.values.len() - 2);
        (i, x - i as f64, h)
    }

    /// Interpolated value at `r`.
    pub fn eval(&self, r: f64) -> f64 {
        let (i, t, h) = self.locate(r);
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * m1
    }

    /// Derivative of the interpolant at `r`.
    pub fn eval_deriv(&self, r: f64) -> f64 {
        let (i, t, h) = self.locate(r);
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) * (f0 - f1) / h + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (3.0 * t2 - 2.0 * t) * m1
    }

    /// `(r, value)` pairs at the nodes.
    pub fn rows(&self) -> Vec<(f64, f64)> {
        (0..self.values.len()).map(|i| (self.node(i), self.values[i])).collect()
    }

    /// Largest nodal difference of values against another grid of equal shape.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.values.len() != other.values.len() || self.r_max != other.r_max {
            return Err(Error::Domain("grids differ in shape".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cosine() -> RadialGridFunction {
        RadialGridFunction::from_fn(2.0, 65, |r| Ok(r.cos()), |r| Ok(-r.sin())).unwrap()
    }

    #[test]
    fn rejects_small_grids() {
        assert!(RadialGridFunction::new(1.0, vec![0.0; 10], vec![0.0; 10]).is_err());
        assert!(RadialGridFunction::new(1.0, vec![0.0; 64], vec![0.0; 63]).is_err());
        assert!(RadialGridFunction::new(0.0, vec![0.0; 64], vec![0.0; 64]).is_err());
    }

    #[test]
    fn reproduces_nodes() {
        let g = cosine();
        for i in 0..g.n_points() {
            assert_eq!(g.eval(g.node(i)), g.values()[i]);
        }
    }

    #[test]
    fn finite_difference_slopes_are_fourth_order() {
        let err = |n: usize| {
            let v = (0..n).map(|i| (2.0 * i as f64 / (n - 1) as f64).exp()).collect();
            let g = RadialGridFunction::from_samples(2.0, v).unwrap();
            (0..n).map(|i| (g.slopes()[i] - g.node(i).exp()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(65) / err(129);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn interpolant_is_accurate(r in 0.0f64..2.0) {
            let g = cosine();
            prop_assert!((g.eval(r) - r.cos()).abs() < 1e-8);
            prop_assert!((g.eval_deriv(r) + r.sin()).abs() < 1e-5);
        }
    }

    #[test]
    fn derivative_is_continuous_at_nodes() {
        let g = cosine();
        let x = g.node(10);
        assert_abs_diff_eq!(g.eval_deriv(x - 1e-12), g.eval_deriv(x + 1e-12), epsilon = 1e-9);
    }
}
