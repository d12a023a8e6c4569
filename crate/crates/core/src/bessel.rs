//! Modified Bessel functions of the first kind, integer order.
//!
//! Everything is evaluated from the ascending power series
//! `I_n(x) = (x/2)^n Σ_k (x/2)^{2k} / (k! (n+k)!)`. The model only needs
//! moderate arguments, so there is no asymptotic branch; arguments above
//! [`SeriesConfig::argument_cap`] are rejected.
//!
//! The series is summed in the scaled form `S_n(x) = I_n(x) n! / (x/2)^n`,
//! which keeps ratios such as `I_{n+1}/I_n` free of underflow at large `n`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Truncation and range settings for the series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesConfig {
    pub max_terms: usize,
    pub term_tolerance: f64,
    pub argument_cap: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { max_terms: 200, term_tolerance: 1e-16, argument_cap: 30.0 }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 30 {
            return Err(Error::Domain(format!("max_terms must be at least 30, got {}", self.max_terms)));
        }
        if !(self.term_tolerance > 0.0 && self.term_tolerance <= 1e-8) {
            return Err(Error::Domain(format!("term_tolerance must lie in (0, 1e-8], got {}", self.term_tolerance)));
        }
        if !(self.argument_cap > 0.0 && self.argument_cap.is_finite()) {
            return Err(Error::Domain(format!("argument_cap must be positive, got {}", self.argument_cap)));
        }
        Ok(())
    }

    fn check_argument(&self, x: f64) -> Result<()> {
        if !(x >= 0.0) || x > self.argument_cap {
            return Err(Error::Domain(format!("Bessel argument {x} outside [0, {}]", self.argument_cap)));
        }
        Ok(())
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Default)]
struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `Σ_k q^k n! / (k! (n+k)!)` with `q = (x/2)^2`.
fn scaled_series(n: u32, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    let q = 0.25 * x * x;
    let nf = n as f64;
    let mut acc = Accumulator::default();
    let mut term = 1.0;
    acc.add(term);
    for k in 0..cfg.max_terms {
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (nf + kf + 1.0));
        let partial = acc.value();
        if term < cfg.term_tolerance * partial {
            return Ok(partial);
        }
        acc.add(term);
    }
    Err(Error::Convergence { what: "Bessel series", limit: cfg.max_terms })
}

/// `(x/2)^n / n!` accumulated factor by factor.
fn leading_factor(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    (1..=n).fold(1.0, |acc, j| acc * h / j as f64)
}

/// Modified Bessel function `I_n(x)` for `0 ≤ x ≤ argument_cap`.
pub fn besseli(n: u32, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    cfg.check_argument(x)?;
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    Ok(leading_factor(n, x) * scaled_series(n, x, cfg)?)
}

/// Ratio `I_{n+1}(x) / I_n(x)`, finite for every `n` including `x = 0`.
pub fn besseli_ratio(n: u32, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    cfg.check_argument(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let s0 = scaled_series(n, x, cfg)?;
    let s1 = scaled_series(n + 1, x, cfg)?;
    Ok(0.5 * x / (n as f64 + 1.0) * s1 / s0)
}

/// Derivative `I_n'(x)`.
///
/// `n = 0` returns `I_1`. For `n ≥ 1` the two recurrences
/// `I_{n-1} - (n/x) I_n` and `I_{n+1} + (n/x) I_n` are averaged, which
/// gives `(I_{n-1} + I_{n+1}) / 2` and avoids the cancellation of either
/// route at small `x`. At `x = 0` the series limit is returned.
pub fn besseli_prime(n: u32, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    cfg.check_argument(x)?;
    if n == 0 {
        return besseli(1, x, cfg);
    }
    if x == 0.0 {
        return Ok(if n == 1 { 0.5 } else { 0.0 });
    }
    let lower = besseli(n - 1, x, cfg)?;
    let upper = besseli(n + 1, x, cfg)?;
    Ok(0.5 * (lower + upper))
}

/// `I_n'(x)` from the term-by-term differentiated series.
///
/// Independent of the recurrences; used to audit them.
pub fn besseli_prime_series(n: u32, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    cfg.check_argument(x)?;
    if x == 0.0 {
        return Ok(if n == 1 { 0.5 } else { 0.0 });
    }
    let h = 0.5 * x;
    let q = h * h;
    let nf = n as f64;
    // Term k: (n+2k)/2 * h^{n+2k-1} / (k! (n+k)!).
    let (mut base, k0) = if n == 0 {
        // The k = 0 term vanishes; start at k = 1 with h / 1!.
        (h, 1usize)
    } else {
        (leading_factor(n - 1, x) / nf, 0usize)
    };
    let mut acc = Accumulator::default();
    acc.add(0.5 * (nf + 2.0 * k0 as f64) * base);
    for k in k0..k0 + cfg.max_terms {
        let kf = k as f64;
        base *= q / ((kf + 1.0) * (nf + kf + 1.0));
        let term = 0.5 * (nf + 2.0 * kf + 2.0) * base;
        let partial = acc.value();
        if term < cfg.term_tolerance * partial {
            return Ok(partial);
        }
        acc.add(term);
    }
    Err(Error::Convergence { what: "differentiated Bessel series", limit: cfg.max_terms })
}

/// Product `I_m(x) I_n(x)` from its own single power series.
pub fn product_series(m: u32, n: u32, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    cfg.check_argument(x)?;
    if x == 0.0 {
        return Ok(if m == 0 && n == 0 { 1.0 } else { 0.0 });
    }
    let (mf, nf) = (m as f64, n as f64);
    let q = 0.25 * x * x;
    // k = 0 term: (m+n)! h^{m+n} / (m! n! (m+n)!) = h^m/m! * h^n/n!.
    let mut term = leading_factor(m, x) * leading_factor(n, x);
    let mut acc = Accumulator::default();
    acc.add(term);
    for k in 0..cfg.max_terms {
        let kf = k as f64;
        let s = mf + nf + 2.0 * kf;
        term *= q * (s + 1.0) * (s + 2.0) / ((kf + 1.0) * (mf + kf + 1.0) * (nf + kf + 1.0) * (mf + nf + kf + 1.0));
        let partial = acc.value();
        if term < cfg.term_tolerance * partial {
            return Ok(partial);
        }
        acc.add(term);
    }
    Err(Error::Convergence { what: "Bessel product series", limit: cfg.max_terms })
}

/// Worst residuals of the standard identities over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `max |I_n' + (n/x) I_n - I_{n-1}|`, `n ≥ 1`.
    pub lowering_residual: f64,
    /// `max |I_n' - (n/x) I_n - I_{n+1}|`, `n ≥ 0`.
    pub raising_residual: f64,
    /// `max |d/dx(x^{n+1} I_{n+1}) - x^{n+1} I_n| / x^{n+1}`.
    pub power_derivative_residual: f64,
    /// `max |I_{n-1} - I_{n+1} - (2n/x) I_n|`, `n ≥ 1`.
    pub three_term_residual: f64,
    /// `I_{n-1} I_{n+1} < I_n^2` everywhere.
    pub turan_upper_holds: bool,
    /// `I_{n-1} I_{n+1} > I_n^2 - (2/x) I_n I_{n+1}` everywhere.
    pub turan_lower_holds: bool,
    /// `max |P_{mn} - I_m I_n| / (I_m I_n)` for the product series `P_{mn}`.
    pub product_residual: f64,
}

/// Checks the recurrence, inequality and product identities on `x_grid`
/// for orders up to `n_max`.
pub fn verify_identities(x_grid: &[f64], n_max: u32, cfg: &SeriesConfig) -> Result<IdentityReport> {
    if x_grid.is_empty() {
        return Err(Error::Domain("identity grid is empty".into()));
    }
    if n_max < 2 {
        return Err(Error::Domain(format!("n_max must be at least 2, got {n_max}")));
    }
    let mut report = IdentityReport {
        lowering_residual: 0.0,
        raising_residual: 0.0,
        power_derivative_residual: 0.0,
        three_term_residual: 0.0,
        turan_upper_holds: true,
        turan_lower_holds: true,
        product_residual: 0.0,
    };
    for &x in x_grid {
        if !(x > 0.0) || x > cfg.argument_cap {
            return Err(Error::Domain(format!("grid point {x} outside (0, {}]", cfg.argument_cap)));
        }
        let values = (0..=n_max + 1).map(|n| besseli(n, x, cfg)).collect::<Result<Vec<_>>>()?;
        for n in 0..=n_max {
            let k = n as usize;
            let nf = n as f64;
            let d = besseli_prime_series(n, x, cfg)?;
            let raising = ((-nf / x).mul_add(values[k], d) - values[k + 1]).abs();
            report.raising_residual = report.raising_residual.max(raising);

            let dn1 = besseli_prime_series(n + 1, x, cfg)?;
            let power = (((nf + 1.0) / x).mul_add(values[k + 1], dn1) - values[k]).abs();
            report.power_derivative_residual = report.power_derivative_residual.max(power);

            if n >= 1 {
                let lowering = ((nf / x).mul_add(values[k], d) - values[k - 1]).abs();
                report.lowering_residual = report.lowering_residual.max(lowering);
                let three = ((-2.0 * nf / x).mul_add(values[k], values[k - 1] - values[k + 1])).abs();
                report.three_term_residual = report.three_term_residual.max(three);

                let cross = values[k - 1] * values[k + 1];
                let square = values[k] * values[k];
                report.turan_upper_holds &= cross < square;
                report.turan_lower_holds &= cross > square - 2.0 / x * values[k] * values[k + 1];
            }
            for m in 0..=n {
                let direct = values[m as usize] * values[k];
                let series = product_series(m, n, x, cfg)?;
                let rel = (series - direct).abs() / direct;
                report.product_residual = report.product_residual.max(rel);
            }
        }
    }
    Ok(report)
}
