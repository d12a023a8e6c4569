//! First-order-in-`τ` amplitude dynamics of a mode.
//!
//! With `η = qₙ¹ + μwₙ¹` the first-order pressure perturbation splits into
//! three inhomogeneous solves of `Lₙu = b` with `u(R⁰) = 0`, driven by
//! `μσ⁰'qₙ⁰'`, `μwₙ⁰'p⁰'` and `-μ∂ₜwₙ⁰ = -μgₙwₙ⁰`, plus the harmonic part
//! `C₄rⁿ` carrying the boundary value `qₙ¹(R⁰) + μwₙ¹(R⁰)`. Mode `1` is
//! assembled from explicit particular solutions instead.

use serde::Serialize;

use super::bvp::{solve_ln_bvp_fn, BVP_INTERVALS};
use super::fields::{c3_coefficient, mode_zeroth_fields};
use super::{growth_rate, rho0_trajectory, ModeState};
use crate::bessel::{besseli, besseli_prime};
use crate::error::{Error, Result};
use crate::stationary::{build_zeroth, compute_tau_expansion, ModelParams, TauExpansion};

/// Right side `dρₙ¹/dt` at amplitudes `(ρₙ⁰, ρₙ¹)`.
///
/// Time enters only through the amplitudes, so the right side is a linear
/// form in `(rho0, rho1)`.
pub fn rho1_rhs(n: u32, rho0: f64, rho1: f64, params: &ModelParams, tauexp: &TauExpansion) -> Result<f64> {
    if n == 1 {
        mode_one_rhs(rho0, rho1, params, tauexp)
    } else {
        general_rhs(n, rho0, rho1, params, tauexp, BVP_INTERVALS)
    }
}

fn general_rhs(
    n: u32,
    rho0: f64,
    rho1: f64,
    params: &ModelParams,
    tauexp: &TauExpansion,
    intervals: usize,
) -> Result<f64> {
    let z = &tauexp.zeroth;
    let (r0, mu, r1) = (z.r0, params.mu, tauexp.r1);
    let nf = n as f64;
    let k = nf * nf - 1.0;
    let f = mode_zeroth_fields(n, params, z)?.with_amplitude(rho0);
    let g = growth_rate(n, params, r0)?;

    let mut inhomogeneous = 0.0;
    if rho0 != 0.0 {
        let b1 = |r: f64| Ok(mu * z.sigma0_prime(r)? * f.q0_prime(r)?);
        let b2 = |r: f64| Ok(mu * f.w0_prime(r)? * z.p0_prime(r)?);
        let b3 = |r: f64| Ok(-mu * g * f.w0(r)?);
        inhomogeneous += solve_ln_bvp_fn(n, b1, 0.0, r0, intervals)?.boundary_derivative;
        inhomogeneous += solve_ln_bvp_fn(n, b2, 0.0, r0, intervals)?.boundary_derivative;
        inhomogeneous += solve_ln_bvp_fn(n, b3, 0.0, r0, intervals)?.boundary_derivative;
    }

    let q1_r0 = -f.q0_prime_at_r0 * r1 + k / (r0 * r0) * rho1 - 2.0 * k * r1 / r0.powi(3) * rho0;
    let c3 = c3_coefficient(n, z, r1, rho0, rho1)?;
    let w1_r0 = c3 * besseli(n, r0, &z.cfg)?;
    let w1_prime_r0 = c3 * besseli_prime(n, r0, &z.cfg)?;
    let harmonic_prime = nf * (q1_r0 + mu * w1_r0) / r0;
    let q1_prime_r0 = inhomogeneous + harmonic_prime - mu * w1_prime_r0;

    Ok(-z.p0_second_at_r0 * rho1
        - z.p0_third_at_r0 * r1 * rho0
        - tauexp.p1_second_at_r0 * rho0
        - f.q0_second_at_r0 * r1
        - q1_prime_r0)
}

/// Mode `1` from the particular solutions
/// `y₁ = (r/2)(1 - 2I₂)`, `y₂ = (r/4)(I₀I₂ - I₁²)`, `y₃ = -I₁` and the
/// harmonic `C₅r`.
fn mode_one_rhs(rho0: f64, rho1: f64, params: &ModelParams, tauexp: &TauExpansion) -> Result<f64> {
    let z = &tauexp.zeroth;
    let (r, mu, r1) = (z.r0, params.mu, tauexp.r1);
    let (i0, i1, i2) = (z.i0_r0, z.i1_r0, z.i2_r0);

    let y1 = 0.5 * r * (1.0 - 2.0 * i2);
    let y1p = 0.5 + i2 - r * i1;
    let y2 = 0.25 * r * (i0 * i2 - i1 * i1);
    let y2p = -0.25 * i0 * i0 + 0.5 * i0 * i1 / r - 0.25 * i1 * i1;
    let y3 = -i1;
    let y3p = -i0 + i1 / r;

    let k1 = -mu * mu * rho0 * i1 / (r * i0 * i0);
    let k2 = 2.0 * mu * mu * rho0 / (i0 * i0);
    let k3 = mu * (i1 * r1 * rho0 / (i0 * i0) - rho1 / i0);

    let q1_r0 = -mu * i2 / i0 * r1 * rho0;
    let c5 = (q1_r0 - k1 * y1 - k2 * y2 - k3 * y3) / r;
    let q1_prime_r0 = c5 + k1 * y1p + k2 * y2p + k3 * y3p;
    let q0_second_r0 = mu * rho0 * (-1.0 / r + 2.0 * i1 / (r * r * i0) + i1 / i0);

    Ok(-z.p0_second_at_r0 * rho1
        - z.p0_third_at_r0 * r1 * rho0
        - tauexp.p1_second_at_r0 * rho0
        - q0_second_r0 * r1
        - q1_prime_r0)
}

/// `dρₙ¹/dt = rho1_coeff·ρₙ¹ + forcing_coeff·ρₙ⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrderCoefficients {
    pub n: u32,
    pub rho1_coeff: f64,
    pub forcing_coeff: f64,
    /// `gₙ`, which `rho1_coeff` must reproduce.
    pub growth_rate: f64,
}

/// Extracts the linear form of [`rho1_rhs`] by evaluating it on unit amplitudes.
pub fn first_order_coefficients(n: u32, params: &ModelParams, tauexp: &TauExpansion) -> Result<FirstOrderCoefficients> {
    let rho1_coeff = rho1_rhs(n, 0.0, 1.0, params, tauexp)?;
    let forcing_coeff = rho1_rhs(n, 1.0, 0.0, params, tauexp)?;
    let growth_rate = growth_rate(n, params, tauexp.zeroth.r0)?;
    let scale = growth_rate.abs().max(params.mu).max(1.0);
    if (rho1_coeff - growth_rate).abs() > 1e-9 * scale {
        return Err(Error::Invariant(format!(
            "mode {n}: homogeneous first-order rate {rho1_coeff} differs from growth rate {growth_rate}"
        )));
    }
    Ok(FirstOrderCoefficients { n, rho1_coeff, forcing_coeff, growth_rate })
}

/// Settings of [`rho1_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryOptions {
    pub t_end: f64,
    /// Step; `None` selects `min(0.01, 0.1/|gₙ|)`.
    pub dt: Option<f64>,
    /// Keep the `ρₙ⁰` forcing; `false` integrates the homogeneous equation.
    pub forcing: bool,
    /// Largest accepted step-doubling discrepancy, relative to the local scale.
    pub step_tol: f64,
    /// Upper bound on the number of stored samples.
    pub max_samples: usize,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { t_end: 10.0, dt: None, forcing: true, step_tol: 1e-9, max_samples: 20_000 }
    }
}

/// Sampled amplitudes of one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTrajectory {
    pub n: u32,
    pub tau: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub rho0: Vec<f64>,
    pub rho1: Vec<f64>,
    /// `ρₙ⁰ + τρₙ¹`.
    pub combined: Vec<f64>,
    pub coefficients: FirstOrderCoefficients,
}

/// Integrates the first-order amplitude of `mode` with classical RK4 and a
/// step-doubling check on every step.
pub fn rho1_trajectory(mode: &ModeState, params: &ModelParams, opts: &TrajectoryOptions) -> Result<ModeTrajectory> {
    let zeroth = build_zeroth(params)?;
    let tauexp = compute_tau_expansion(params, &zeroth)?;
    let coeffs = first_order_coefficients(mode.n, params, &tauexp)?;
    integrate(mode, params.tau, coeffs, opts)
}

/// Default step `min(0.01, 0.1/|g|)`.
pub fn default_step(g: f64) -> f64 {
    if g == 0.0 {
        0.01
    } else {
        0.01f64.min(0.1 / g.abs())
    }
}

pub(crate) fn integrate(
    mode: &ModeState,
    tau: f64,
    coeffs: FirstOrderCoefficients,
    opts: &TrajectoryOptions,
) -> Result<ModeTrajectory> {
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be positive, got {}", opts.t_end)));
    }
    let dt = opts.dt.unwrap_or_else(|| default_step(coeffs.growth_rate));
    if !(dt > 0.0 && dt <= opts.t_end) {
        return Err(Error::Domain(format!("dt must lie in (0, t_end], got {dt}")));
    }
    let forcing = if opts.forcing { coeffs.forcing_coeff } else { 0.0 };
    let a = coeffs.rho1_coeff;
    let rhs = |t: f64, y: f64| -> Result<f64> { Ok(a * y + forcing * rho0_trajectory(mode, t)?) };
    let step = |t: f64, y: f64, h: f64| -> Result<(f64, f64)> {
        let k1 = rhs(t, y)?;
        let k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)?;
        let k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)?;
        let k4 = rhs(t + h, y + h * k3)?;
        Ok((y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1))
    };

    let steps = (opts.t_end / dt).round() as usize;
    let stride = steps.div_ceil(opts.max_samples.max(1)).max(1);
    let mut times = vec![0.0];
    let mut rho1 = vec![mode.rho1_init];
    let mut y = mode.rho1_init;
    for i in 0..steps {
        let t = i as f64 * dt;
        let (full, k1) = step(t, y, dt)?;
        let (mid, _) = step(t, y, 0.5 * dt)?;
        let (half, _) = step(t + 0.5 * dt, mid, 0.5 * dt)?;
        let discrepancy = (full - half).abs();
        let scale = y.abs() + (dt * k1).abs() + half.abs();
        if discrepancy > opts.step_tol * scale {
            return Err(Error::StepSize { t, discrepancy });
        }
        y = half;
        if (i + 1) % stride == 0 || i + 1 == steps {
            times.push((i + 1) as f64 * dt);
            rho1.push(y);
        }
    }
    let rho0 = times.iter().map(|&t| rho0_trajectory(mode, t)).collect::<Result<Vec<_>>>()?;
    let combined = rho0.iter().zip(&rho1).map(|(a, b)| a + tau * b).collect();
    Ok(ModeTrajectory { n: mode.n, tau, dt, times, rho0, rho1, combined, coefficients: coeffs })
}

/// Least-squares slope of `ln|v|` against `t` over the trailing `fraction`
/// of the time span; zero samples are skipped.
pub fn tail_fit_rate(times: &[f64], values: &[f64], fraction: f64) -> Result<f64> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::Domain("tail fit needs equally long, non-empty series".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Domain(format!("tail fraction must lie in (0, 1], got {fraction}")));
    }
    let t_end = *times.last().unwrap_or(&0.0);
    let t_start = t_end - fraction * (t_end - times[0]);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= t_start && **v != 0.0)
        .map(|(t, v)| (*t, v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Domain("tail fit needs at least two non-zero samples".into()));
    }
    let k = pts.len() as f64;
    let (mt, ml) = pts.iter().fold((0.0, 0.0), |(a, b), (t, l)| (a + t / k, b + l / k));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (t, l)| (a + (t - mt) * (l - ml), b + (t - mt) * (t - mt)));
    Ok(sxy / sxx)
}
