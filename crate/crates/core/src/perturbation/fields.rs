//! Leading-order perturbation fields of a single mode.

use serde::Serialize;

use crate::bessel::{besseli, besseli_prime, besseli_ratio, SeriesConfig};
use crate::error::{Error, Result};
use crate::stationary::{ModelParams, ZerothOrderSolution};

/// Nutrient and pressure perturbations `wₙ⁰`, `qₙ⁰` of mode `n`, per unit
/// amplitude scaled by `rho`.
///
/// `wₙ⁰ = -I₁(R⁰)Iₙ(r)/(I₀(R⁰)Iₙ(R⁰))·ρ` and `qₙ⁰ = C₁rⁿ - μwₙ⁰`, where `C₁`
/// enforces `qₙ⁰(R⁰) = (n²-1)/(R⁰)²·ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeZerothFields {
    pub n: u32,
    pub rho: f64,
    pub mu: f64,
    pub r0: f64,
    pub c1: f64,
    /// `∂qₙ⁰/∂r(R⁰) = [n(n²-1)/(R⁰)³ + μI₁Iₙ₊₁/(I₀Iₙ)]ρ`.
    pub q0_prime_at_r0: f64,
    /// Closed-form `∂²qₙ⁰/∂r²(R⁰)`.
    pub q0_second_at_r0: f64,
    /// `I₁(R⁰)/(I₀(R⁰)Iₙ(R⁰))`.
    w_scale: f64,
    #[serde(skip)]
    cfg: SeriesConfig,
}

/// Builds the leading-order fields of mode `n` with unit amplitude.
pub fn mode_zeroth_fields(n: u32, params: &ModelParams, zeroth: &ZerothOrderSolution) -> Result<ModeZerothFields> {
    if params.mu != zeroth.mu || params.sigma_tilde != zeroth.sigma_tilde {
        return Err(Error::Domain("parameters do not match the zeroth-order solution".into()));
    }
    let cfg = zeroth.cfg;
    let r0 = zeroth.r0;
    let mu = params.mu;
    let nf = n as f64;
    let (i0, i1) = (zeroth.i0_r0, zeroth.i1_r0);
    let in_r0 = besseli(n, r0, &cfg)?;
    let ratio_n = besseli_ratio(n, r0, &cfg)?;
    let k = nf * nf - 1.0;
    let c1 = (k / (r0 * r0) - mu * i1 / i0) / r0.powi(n as i32);
    let q0_prime_at_r0 = nf * k / r0.powi(3) + mu * i1 / i0 * ratio_n;
    let q0_second_at_r0 = nf * (nf - 1.0) / (r0 * r0) * (k / (r0 * r0) - mu * i1 / i0) - mu * i1 * ratio_n / (r0 * i0)
        + mu * (r0 * r0 + nf * nf - nf) * i1 / (r0 * r0 * i0);
    Ok(ModeZerothFields { n, rho: 1.0, mu, r0, c1, q0_prime_at_r0, q0_second_at_r0, w_scale: i1 / (i0 * in_r0), cfg })
}

impl ModeZerothFields {
    /// Same fields for amplitude `rho`.
    pub fn with_amplitude(self, rho: f64) -> Self {
        let s = rho / self.rho;
        Self {
            rho,
            c1: self.c1 * s,
            q0_prime_at_r0: self.q0_prime_at_r0 * s,
            q0_second_at_r0: self.q0_second_at_r0 * s,
            ..self
        }
    }

    fn rn(&self, r: f64) -> f64 {
        r.powi(self.n as i32)
    }

    /// `d(rⁿ)/dr`.
    fn rn_prime(&self, r: f64) -> f64 {
        match self.n {
            0 => 0.0,
            n => n as f64 * r.powi(n as i32 - 1),
        }
    }

    pub fn w0(&self, r: f64) -> Result<f64> {
        Ok(-self.w_scale * besseli(self.n, r, &self.cfg)? * self.rho)
    }

    /// `∂wₙ⁰/∂r = -I₁(R⁰)/(I₀(R⁰)Iₙ(R⁰))·(Iₙ₊₁(r) + (n/r)Iₙ(r))·ρ`.
    pub fn w0_prime(&self, r: f64) -> Result<f64> {
        Ok(-self.w_scale * besseli_prime(self.n, r, &self.cfg)? * self.rho)
    }

    pub fn q0(&self, r: f64) -> Result<f64> {
        Ok(self.c1 * self.rn(r) - self.mu * self.w0(r)?)
    }

    pub fn q0_prime(&self, r: f64) -> Result<f64> {
        Ok(self.c1 * self.rn_prime(r) - self.mu * self.w0_prime(r)?)
    }
}

/// `C₃` such that `wₙ¹ = C₃ Iₙ(r)` meets its boundary condition.
pub(crate) fn c3_coefficient(n: u32, zeroth: &ZerothOrderSolution, r1: f64, rho0: f64, rho1: f64) -> Result<f64> {
    let cfg = zeroth.cfg;
    let r0 = zeroth.r0;
    let (i0, i1) = (zeroth.i0_r0, zeroth.i1_r0);
    let in_r0 = besseli(n, r0, &cfg)?;
    let ratio_n = besseli_ratio(n, r0, &cfg)?;
    let g = i1 / i0;
    let bracket = g * ratio_n + (n as f64 + 1.0) * g / r0 - 1.0 + g * g;
    Ok((bracket * r1 * rho0 - g * rho1) / in_r0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::build_zeroth;
    use approx::assert_abs_diff_eq;

    fn setup(n: u32) -> ModeZerothFields {
        let p = ModelParams::new(1.3, 0.5, 0.0).unwrap();
        let z = build_zeroth(&p).unwrap();
        mode_zeroth_fields(n, &p, &z).unwrap().with_amplitude(0.7)
    }

    /// Fourth-order central difference.
    fn d(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn boundary_value_of_q0() {
        for n in 0..6 {
            let f = setup(n);
            let nf = n as f64;
            assert_abs_diff_eq!(f.q0(f.r0).unwrap(), (nf * nf - 1.0) / (f.r0 * f.r0) * 0.7, epsilon = 1e-12);
        }
    }

    #[test]
    fn cached_derivatives_match_finite_differences() {
        for n in 0..6 {
            let f = setup(n);
            let fd1 = d(|r| f.q0(r).unwrap(), f.r0, 1e-3);
            let fd2 = d(|r| f.q0_prime(r).unwrap(), f.r0, 1e-3);
            assert_abs_diff_eq!(f.q0_prime_at_r0, fd1, epsilon = 1e-8);
            assert_abs_diff_eq!(f.q0_prime(f.r0).unwrap(), f.q0_prime_at_r0, epsilon = 1e-12);
            assert_abs_diff_eq!(f.q0_second_at_r0, fd2, epsilon = 1e-8);
            let fdw = d(|r| f.w0(r).unwrap(), 1.1, 1e-3);
            assert_abs_diff_eq!(f.w0_prime(1.1).unwrap(), fdw, epsilon = 1e-8);
        }
    }

    #[test]
    fn mode_one_closed_form() {
        let f = setup(1);
        let z = build_zeroth(&ModelParams::new(1.3, 0.5, 0.0).unwrap()).unwrap();
        for &r in &[0.3, 1.0, 2.5] {
            let expect =
                -1.3 * z.i1_r0 / (z.r0 * z.i0_r0) * 0.7 * r + 1.3 * besseli(1, r, &z.cfg).unwrap() / z.i0_r0 * 0.7;
            assert_abs_diff_eq!(f.q0(r).unwrap(), expect, epsilon = 1e-13);
        }
    }
}
