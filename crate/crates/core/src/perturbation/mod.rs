//! Linear stability of the steady state under `cos(nθ)` boundary modes.
//!
//! The boundary `r = R⁰ + ε(ρₙ⁰(t) + τρₙ¹(t)) cos(nθ)` is expanded to first
//! order in `τ`. The leading amplitude obeys `ρₙ⁰' = gₙ ρₙ⁰`; the first-order
//! amplitude obeys `ρₙ¹' = gₙ ρₙ¹ + (forcing ∝ ρₙ⁰)`. The `sin(nθ)` modes
//! have identical dynamics and are not treated separately.

mod bvp;
mod fields;
mod first_order;

pub use bvp::{solve_ln_bvp, solve_ln_bvp_fn, ModeBvpResult, BVP_INTERVALS};
pub use fields::{mode_zeroth_fields, ModeZerothFields};
pub use first_order::{
    default_step, first_order_coefficients, rho1_rhs, rho1_trajectory, tail_fit_rate, FirstOrderCoefficients,
    ModeTrajectory, TrajectoryOptions,
};

use serde::Serialize;

use crate::bessel::{besseli_ratio, SeriesConfig};
use crate::error::{Error, Result};
use crate::stationary::ModelParams;

/// `1 - 2I₁(x)/(xI₀(x)) - I₁(x)Iₙ₊₁(x)/(I₀(x)Iₙ(x))`.
///
/// Positive for `n ≥ 2`, negative for `n = 0`, identically zero for `n = 1`.
pub fn growth_bracket(n: u32, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {x}")));
    }
    let r0 = besseli_ratio(0, x, cfg)?;
    let rn = besseli_ratio(n, x, cfg)?;
    Ok(1.0 - 2.0 * r0 / x - r0 * rn)
}

/// Growth rate `gₙ = μ·bracket - n(n²-1)/R³` of mode `n` about radius `r0`.
pub fn growth_rate(n: u32, params: &ModelParams, r0: f64) -> Result<f64> {
    let cfg = SeriesConfig::default();
    let nf = n as f64;
    Ok(params.mu * growth_bracket(n, r0, &cfg)? - nf * (nf * nf - 1.0) / r0.powi(3))
}

/// Value of `μ` at which mode `n` turns neutral; `+∞` for `n ∈ {0, 1}`.
pub fn mode_threshold(n: u32, r0: f64) -> Result<f64> {
    if n < 2 {
        return Ok(f64::INFINITY);
    }
    let cfg = SeriesConfig::default();
    let bracket = growth_bracket(n, r0, &cfg)?;
    if !(bracket > 0.0) {
        return Err(Error::Invariant(format!(
            "growth bracket of mode {n} is {bracket:e} at radius {r0}, expected positive"
        )));
    }
    let nf = n as f64;
    Ok(nf * (nf * nf - 1.0) / r0.powi(3) / bracket)
}

/// Highest mode scanned when confirming that `n = 2` attains the minimum.
pub const MU_STAR_SCAN: u32 = 32;

/// Critical intensity `μ* = min_n μₙ⁰ = μ₂⁰`.
pub fn mu_star(r0: f64) -> Result<f64> {
    let star = mode_threshold(2, r0)?;
    for n in 3..=MU_STAR_SCAN {
        let t = mode_threshold(n, r0)?;
        if t < star {
            return Err(Error::Invariant(format!("threshold of mode {n} ({t}) lies below that of mode 2 ({star})")));
        }
    }
    Ok(star)
}

/// Bisects the sign change of `gₙ(μ)` on `[lo, hi]` down to a relative width.
///
/// Returns the final bracket `(lo, hi)` with `gₙ(lo) < 0 < gₙ(hi)`.
pub fn bracket_sign_change(n: u32, sigma_tilde: f64, r0: f64, lo: f64, hi: f64, rel_width: f64) -> Result<(f64, f64)> {
    let g = |mu: f64| growth_rate(n, &ModelParams { mu, sigma_tilde, tau: 0.0, lambda: 0.0 }, r0);
    let (mut lo, mut hi) = (lo, hi);
    if !(g(lo)? < 0.0 && g(hi)? > 0.0) {
        return Err(Error::Range(format!("growth rate of mode {n} does not change sign on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        if hi - lo <= rel_width * 0.5 * (lo + hi) {
            return Ok((lo, hi));
        }
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence { what: "growth-rate sign bisection", limit: 200 })
}

/// Stability class of a mode at given `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Stable,
    Neutral,
    Unstable,
}

impl Classification {
    /// Classifies by the sign of `gₙ`; `|gₙ| ≤ tol` counts as neutral.
    pub fn from_rate(g: f64, tol: f64) -> Self {
        if g.abs() <= tol {
            Self::Neutral
        } else if g < 0.0 {
            Self::Stable
        } else {
            Self::Unstable
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Neutral => "neutral",
            Self::Unstable => "unstable",
        }
    }
}

/// Initial amplitudes of one mode together with its constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeState {
    pub n: u32,
    pub rho0_init: f64,
    pub rho1_init: f64,
    pub growth_rate: f64,
    /// `C₁(0)`, coefficient of `rⁿ` in `qₙ⁰ + μwₙ⁰`.
    pub c1: f64,
    /// `C₃(0)`, coefficient of `Iₙ(r)` in `wₙ¹`.
    pub c3: f64,
    pub threshold: f64,
}

impl ModeState {
    /// Builds the mode state about the steady state of `params`.
    pub fn new(n: u32, params: &ModelParams, rho0_init: f64, rho1_init: f64) -> Result<Self> {
        let zeroth = crate::stationary::build_zeroth(params)?;
        let tauexp = crate::stationary::compute_tau_expansion(params, &zeroth)?;
        let fields = mode_zeroth_fields(n, params, &zeroth)?;
        Ok(Self {
            n,
            rho0_init,
            rho1_init,
            growth_rate: growth_rate(n, params, zeroth.r0)?,
            c1: fields.c1 * rho0_init,
            c3: fields::c3_coefficient(n, &zeroth, tauexp.r1, rho0_init, rho1_init)?,
            threshold: mode_threshold(n, zeroth.r0)?,
        })
    }
}

/// `ρₙ⁰(t) = ρₙ⁰(0) e^{gₙ t}`.
pub fn rho0_trajectory(mode: &ModeState, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    Ok(mode.rho0_init * (mode.growth_rate * t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::solve_r0;
    use approx::assert_relative_eq;

    fn r0() -> f64 {
        solve_r0(0.5, 1e-13).unwrap()
    }

    #[test]
    fn mode_one_is_neutral() {
        for k in 1..=20 {
            let p = ModelParams::new(0.37 * k as f64, 0.5, 0.0).unwrap();
            assert!(growth_rate(1, &p, r0()).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn mode_zero_decays() {
        let p = ModelParams::new(1.0, 0.5, 0.0).unwrap();
        assert!(growth_rate(0, &p, r0()).unwrap() < 0.0);
    }

    #[test]
    fn thresholds_increase() {
        assert_eq!(mode_threshold(0, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(mode_threshold(1, 1.0).unwrap(), f64::INFINITY);
        let t: Vec<f64> = (2..=16).map(|n| mode_threshold(n, r0()).unwrap()).collect();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn threshold_zeroes_growth_rate() {
        let mu = mode_threshold(2, r0()).unwrap();
        let p = ModelParams::new(mu, 0.5, 0.0).unwrap();
        assert!(growth_rate(2, &p, r0()).unwrap().abs() < 1e-10);
        assert_relative_eq!(mu_star(r0()).unwrap(), mu);
    }

    #[test]
    fn sign_change_is_bracketed() {
        let star = mu_star(r0()).unwrap();
        let (lo, hi) = bracket_sign_change(2, 0.5, r0(), 0.5 * star, 2.0 * star, 1e-10).unwrap();
        assert!(lo <= star && star <= hi);
        assert!((hi - lo) / star < 1e-10);
    }

    #[test]
    fn classification() {
        assert_eq!(Classification::from_rate(-1.0, 1e-12), Classification::Stable);
        assert_eq!(Classification::from_rate(0.0, 1e-12), Classification::Neutral);
        assert_eq!(Classification::from_rate(1.0, 1e-12).as_str(), "unstable");
    }

    #[test]
    fn rho0_is_exponential() {
        let p = ModelParams::new(1.0, 0.5, 0.0).unwrap();
        let m = ModeState::new(2, &p, 0.3, 0.0).unwrap();
        let v = rho0_trajectory(&m, 2.0).unwrap();
        assert_relative_eq!(v, 0.3 * (2.0 * m.growth_rate).exp());
        let zero = ModeState::new(2, &p, 0.0, 0.0).unwrap();
        assert_eq!(rho0_trajectory(&zero, 5.0).unwrap(), 0.0);
        let one = ModeState::new(1, &p, 0.3, 0.0).unwrap();
        assert!((rho0_trajectory(&one, 50.0).unwrap() - 0.3).abs() < 1e-12);
    }
}
