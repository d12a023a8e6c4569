//! Radially symmetric steady state.
//!
//! Three routes are provided:
//! - the delay-free radius `R⁰` and its closed-form nutrient and pressure
//!   profiles ([`build_zeroth`]);
//! - the first-order correction in `τ`, `R* ≈ R⁰ + τR¹`
//!   ([`compute_tau_expansion`]);
//! - the full construction with the delay kept exactly, by a contraction
//!   mapping on the pressure and bisection on the radius
//!   ([`fixed_point_solve`]).

mod fixed_point;

pub use fixed_point::{
    contraction_bound, fixed_point_solve, fixed_point_solve_with, pressure_bound, solve_pressure_at_radius,
    FixedPointConfig, FixedPointSolution, InitialPressure, PressureSolution,
};

use serde::Serialize;

use crate::bessel::{besseli, besseli_ratio, SeriesConfig};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Physical constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Proliferation intensity `μ`.
    pub mu: f64,
    /// Threshold nutrient concentration `σ̃`.
    pub sigma_tilde: f64,
    /// Time delay `τ`.
    pub tau: f64,
    /// Nutrient time constant; only the quasi-steady case `0` is supported.
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(mu: f64, sigma_tilde: f64, tau: f64) -> Result<Self> {
        let p = Self { mu, sigma_tilde, tau, lambda: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Domain(format!("mu must be finite and non-negative, got {}", self.mu)));
        }
        if !(self.sigma_tilde > 0.0 && self.sigma_tilde < 1.0) {
            return Err(Error::Domain(format!("sigma_tilde must lie in (0, 1), got {}", self.sigma_tilde)));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::Domain(format!("tau must be finite and non-negative, got {}", self.tau)));
        }
        if self.lambda != 0.0 {
            return Err(Error::Domain(format!(
                "only the quasi-steady case lambda = 0 is supported, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }
}

/// `P₀(R) = I₁(R) / (R I₀(R))`, decreasing from `1/2` at `R = 0`.
pub fn p0_function(radius: f64, cfg: &SeriesConfig) -> Result<f64> {
    if radius == 0.0 {
        return Ok(0.5);
    }
    Ok(besseli_ratio(0, radius, cfg)? / radius)
}

/// Delay-free stationary radius: the root of `P₀(R) = σ̃/2`.
///
/// Bisection on `[0, b]`, where `b` is doubled until `P₀(b) < σ̃/2`. The
/// returned radius has `|P₀(R) - σ̃/2| < tol`.
pub fn solve_r0(sigma_tilde: f64, tol: f64) -> Result<f64> {
    if !(sigma_tilde > 0.0 && sigma_tilde < 1.0) {
        return Err(Error::Domain(format!("sigma_tilde must lie in (0, 1), got {sigma_tilde}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let cfg = SeriesConfig::default();
    let target = 0.5 * sigma_tilde;
    let residual = |r: f64| -> Result<f64> { Ok(p0_function(r, &cfg)? - target) };

    let mut lo = 0.0;
    let mut hi = 1.0f64;
    while residual(hi)? >= 0.0 {
        if hi >= cfg.argument_cap {
            return Err(Error::Range(format!(
                "no stationary radius below {} for sigma_tilde = {sigma_tilde}",
                cfg.argument_cap
            )));
        }
        lo = hi;
        hi = (2.0 * hi).min(cfg.argument_cap);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = (residual(lo)?.abs(), residual(hi)?.abs());
    let (root, res) = if rl <= rh { (lo, rl) } else { (hi, rh) };
    if res >= tol {
        return Err(Error::Convergence { what: "stationary radius bisection", limit: 200 });
    }
    Ok(root)
}

/// Closed-form leading-order steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZerothOrderSolution {
    pub mu: f64,
    pub sigma_tilde: f64,
    /// Delay-free radius `R⁰`.
    pub r0: f64,
    pub i0_r0: f64,
    pub i1_r0: f64,
    pub i2_r0: f64,
    /// `p⁰''(R⁰) = μ[2I₁/(R⁰I₀) - 1]`.
    pub p0_second_at_r0: f64,
    /// `p⁰'''(R⁰) = μ[1/R⁰ - 2I₁/((R⁰)²I₀) - I₁/I₀]`.
    pub p0_third_at_r0: f64,
    #[serde(skip)]
    pub cfg: SeriesConfig,
}

/// Assembles the leading-order steady state for `params`.
pub fn build_zeroth(params: &ModelParams) -> Result<ZerothOrderSolution> {
    params.validate()?;
    let cfg = SeriesConfig::default();
    let r0 = solve_r0(params.sigma_tilde, 1e-13)?;
    let i0 = besseli(0, r0, &cfg)?;
    let i1 = besseli(1, r0, &cfg)?;
    let i2 = besseli(2, r0, &cfg)?;
    let mu = params.mu;
    Ok(ZerothOrderSolution {
        mu,
        sigma_tilde: params.sigma_tilde,
        r0,
        i0_r0: i0,
        i1_r0: i1,
        i2_r0: i2,
        p0_second_at_r0: mu * (2.0 * i1 / (r0 * i0) - 1.0),
        p0_third_at_r0: mu * (1.0 / r0 - 2.0 * i1 / (r0 * r0 * i0) - i1 / i0),
        cfg,
    })
}

impl ZerothOrderSolution {
    fn i(&self, n: u32, r: f64) -> Result<f64> {
        besseli(n, r, &self.cfg)
    }

    /// `I₁'(r) = I₀(r) - I₁(r)/r`.
    fn i1_prime(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.5);
        }
        Ok(self.i(0, r)? - self.i(1, r)? / r)
    }

    /// `I₁''(r) = (1 + 1/r²) I₁ - I₁'/r`, via the series `I₁'' = (3I₁ + I₃)/4`.
    fn i1_second(&self, r: f64) -> Result<f64> {
        Ok(0.25 * (3.0 * self.i(1, r)? + self.i(3, r)?))
    }

    /// `σ⁰(r) = I₀(r) / I₀(R⁰)`.
    pub fn sigma0(&self, r: f64) -> Result<f64> {
        Ok(self.i(0, r)? / self.i0_r0)
    }

    pub fn sigma0_prime(&self, r: f64) -> Result<f64> {
        Ok(self.i(1, r)? / self.i0_r0)
    }

    pub fn sigma0_second(&self, r: f64) -> Result<f64> {
        Ok(self.i1_prime(r)? / self.i0_r0)
    }

    /// `p⁰(r) = (μσ̃/4) r² - μ I₀(r)/I₀(R⁰) + 1/R⁰ + μ - (μσ̃/4)(R⁰)²`.
    pub fn p0(&self, r: f64) -> Result<f64> {
        let q = 0.25 * self.mu * self.sigma_tilde;
        Ok(q * r * r - self.mu * self.sigma0(r)? + 1.0 / self.r0 + self.mu - q * self.r0 * self.r0)
    }

    pub fn p0_prime(&self, r: f64) -> Result<f64> {
        Ok(0.5 * self.mu * self.sigma_tilde * r - self.mu * self.sigma0_prime(r)?)
    }

    pub fn p0_second(&self, r: f64) -> Result<f64> {
        Ok(0.5 * self.mu * self.sigma_tilde - self.mu * self.sigma0_second(r)?)
    }

    pub fn p0_third(&self, r: f64) -> Result<f64> {
        Ok(-self.mu * self.i1_second(r)? / self.i0_r0)
    }

    /// `|P₀(R⁰) - σ̃/2|`.
    pub fn radius_residual(&self) -> f64 {
        (self.i1_r0 / (self.r0 * self.i0_r0) - 0.5 * self.sigma_tilde).abs()
    }
}

/// `A(x) = 2(I₀I₂ - I₁²)`, negative for `x > 0`.
pub fn a_coefficient(x: f64, cfg: &SeriesConfig) -> Result<f64> {
    let (i0, i1, i2) = (besseli(0, x, cfg)?, besseli(1, x, cfg)?, besseli(2, x, cfg)?);
    Ok(2.0 * (i0 * i2 - i1 * i1))
}

/// `B(x) = -2I₁I₂ + xI₁² - xI₀I₂`, negative for `x > 0`.
pub fn b_coefficient(x: f64, cfg: &SeriesConfig) -> Result<f64> {
    let (i0, i1, i2) = (besseli(0, x, cfg)?, besseli(1, x, cfg)?, besseli(2, x, cfg)?);
    Ok(-2.0 * i1 * i2 + x * i1 * i1 - x * i0 * i2)
}

/// First-order correction in `τ` of the steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauExpansion {
    /// `R¹ = μB(R⁰)/A(R⁰)`.
    pub r1: f64,
    pub a_value: f64,
    pub b_value: f64,
    /// `p¹''(R⁰)`.
    pub p1_second_at_r0: f64,
    pub zeroth: ZerothOrderSolution,
}

/// Computes `R¹`, `σ¹` and `p¹'` from their closed forms.
pub fn compute_tau_expansion(params: &ModelParams, zeroth: &ZerothOrderSolution) -> Result<TauExpansion> {
    params.validate()?;
    if params.mu != zeroth.mu || params.sigma_tilde != zeroth.sigma_tilde {
        return Err(Error::Domain("parameters do not match the zeroth-order solution".into()));
    }
    let z = zeroth;
    let (r, i0, i1, i2) = (z.r0, z.i0_r0, z.i1_r0, z.i2_r0);
    let mu = params.mu;
    let a_value = a_coefficient(r, &z.cfg)?;
    let b_value = b_coefficient(r, &z.cfg)?;
    let r1 = mu * b_value / a_value;
    let p1_second_at_r0 = mu * mu * i1 / (r * i0 * i0) * (i2 - r * i1)
        + mu * mu / (2.0 * i0 * i0) * (i0 * i0 - 2.0 * i0 * i1 / r + i1 * i1)
        + mu * r1 * i1 / (i0 * i0) * (i0 - i1 / r);
    Ok(TauExpansion { r1, a_value, b_value, p1_second_at_r0, zeroth: *z })
}

impl TauExpansion {
    /// `R⁰ + τR¹`.
    pub fn radius(&self, tau: f64) -> f64 {
        self.zeroth.r0 + tau * self.r1
    }

    /// `σ¹(r) = -I₀(r) I₁(R⁰) R¹ / I₀(R⁰)²`.
    pub fn sigma1(&self, r: f64) -> Result<f64> {
        let z = &self.zeroth;
        Ok(-besseli(0, r, &z.cfg)? * z.i1_r0 / (z.i0_r0 * z.i0_r0) * self.r1)
    }

    pub fn sigma1_prime(&self, r: f64) -> Result<f64> {
        let z = &self.zeroth;
        Ok(-besseli(1, r, &z.cfg)? * z.i1_r0 / (z.i0_r0 * z.i0_r0) * self.r1)
    }

    /// Closed-form antiderivative expression for `∂p¹/∂r`.
    pub fn p1_prime(&self, r: f64) -> Result<f64> {
        let z = &self.zeroth;
        let mu = z.mu;
        let (i0, i1) = (besseli(0, r, &z.cfg)?, besseli(1, r, &z.cfg)?);
        let i0r = z.i0_r0;
        Ok(mu * mu * z.sigma_tilde / (2.0 * i0r) * (2.0 * i1 - r * i0)
            + mu * mu / (i0r * i0r) * (0.5 * r * (i1 * i1 - i0 * i0) + i0 * i1)
            + mu * z.i1_r0 / (i0r * i0r) * self.r1 * i1)
    }
}

/// First-order mass balance at the boundary:
/// `R¹I₁/I₀ + R⁰(I₀+I₂)/(2I₀) R¹ - σ̃R⁰R¹ + ∫₀^{R⁰} (σ⁰'p⁰' + σ¹) r dr`.
///
/// Zero for a consistent `(R⁰, R¹)` pair. The integral is evaluated by
/// adaptive Simpson quadrature.
pub fn residual_integral(zeroth: &ZerothOrderSolution, tauexp: &TauExpansion) -> Result<f64> {
    let z = zeroth;
    let r1 = tauexp.r1;
    let integral =
        adaptive_simpson(|r| Ok((z.sigma0_prime(r)? * z.p0_prime(r)? + tauexp.sigma1(r)?) * r), 0.0, z.r0, 1e-14, 40)?;
    Ok(r1 * z.i1_r0 / z.i0_r0 + z.r0 * (z.i0_r0 + z.i2_r0) / (2.0 * z.i0_r0) * r1 - z.sigma_tilde * z.r0 * r1
        + integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(mu: f64) -> ModelParams {
        ModelParams::new(mu, 0.5, 0.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(-1.0, 0.5, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.5, -0.1).is_err());
        let mut p = params(1.0);
        p.lambda = 1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn r0_limits_and_errors() {
        assert!(solve_r0(0.999, 1e-13).unwrap() < 0.1);
        assert!(matches!(solve_r0(1.2, 1e-13), Err(Error::Domain(_))));
        assert!(matches!(solve_r0(0.01, 1e-13), Err(Error::Range(_))));
    }

    #[test]
    fn zeroth_boundary_values() {
        let z = build_zeroth(&params(1.3)).unwrap();
        assert_relative_eq!(z.sigma0(z.r0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(z.p0(z.r0).unwrap(), 1.0 / z.r0, max_relative = 1e-14);
        assert_relative_eq!(z.p0_second(z.r0).unwrap(), z.p0_second_at_r0, max_relative = 1e-12);
        assert_relative_eq!(z.p0_third(z.r0).unwrap(), z.p0_third_at_r0, max_relative = 1e-12);
        assert!(z.p0_prime(z.r0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn zeroth_derivatives_match_finite_differences() {
        let z = build_zeroth(&params(0.8)).unwrap();
        let h = 1e-4;
        for r in [0.3, 1.1, z.r0 - 0.01] {
            let fd1 = (z.p0(r + h).unwrap() - z.p0(r - h).unwrap()) / (2.0 * h);
            let fd2 = (z.p0_prime(r + h).unwrap() - z.p0_prime(r - h).unwrap()) / (2.0 * h);
            let fd3 = (z.p0_second(r + h).unwrap() - z.p0_second(r - h).unwrap()) / (2.0 * h);
            assert!((fd1 - z.p0_prime(r).unwrap()).abs() < 1e-8);
            assert!((fd2 - z.p0_second(r).unwrap()).abs() < 1e-8);
            assert!((fd3 - z.p0_third(r).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn tau_expansion_signs_and_zero_mu() {
        let z = build_zeroth(&params(0.0)).unwrap();
        let t = compute_tau_expansion(&params(0.0), &z).unwrap();
        assert_eq!(t.r1, 0.0);
        assert_eq!(residual_integral(&z, &t).unwrap(), 0.0);

        let z = build_zeroth(&params(1.0)).unwrap();
        let t = compute_tau_expansion(&params(1.0), &z).unwrap();
        assert!(t.a_value < 0.0 && t.b_value < 0.0 && t.r1 > 0.0);
    }

    #[test]
    fn p1_second_matches_finite_difference() {
        let p = params(1.7);
        let z = build_zeroth(&p).unwrap();
        let t = compute_tau_expansion(&p, &z).unwrap();
        let h = 1e-5;
        let fd = (t.p1_prime(z.r0 + h).unwrap() - t.p1_prime(z.r0 - h).unwrap()) / (2.0 * h);
        assert!((fd - t.p1_second_at_r0).abs() < 1e-8);
    }

    #[test]
    fn mismatched_parameters_are_rejected() {
        let z = build_zeroth(&params(1.0)).unwrap();
        assert!(compute_tau_expansion(&params(2.0), &z).is_err());
    }
}
