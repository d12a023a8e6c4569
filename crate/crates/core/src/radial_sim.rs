//! Time-dependent radially symmetric evolution with the delay kept exactly.
//!
//! The radius obeys
//! `R'(t) = (μ/R)[∫₀ᴿ σ(ξ(t-τ; r, t), t-τ) r dr - σ̃R²/2]`
//! with the quasi-steady nutrient `σ(x, s) = I₀(x)/I₀(R(s))`. The cell
//! positions `ξ` one delay in the past are traced backward along
//! `dξ/ds = -∂p/∂r(ξ, s)` through pressure-gradient profiles stored at every
//! step (method of steps). A profile is rebuilt from
//!
//! `∂p/∂r(r) = -μ[I₁(r)/I₀(R(t-τ)) - σ̃r/2] - (μ/r)∫₀ʳ [σ(ξ) - σ(y)] y dy`,
//!
//! so quadrature only sees the `O(τ)` displacement part of the source.
//!
//! Profiles are interpolated in time by Lagrange cubics whose stencils never
//! straddle a multiple of `τ`, where the solution loses smoothness; backward
//! traces are split at those points for the same reason.

use std::collections::VecDeque;

use serde::Serialize;

use crate::bessel::{besseli, SeriesConfig};
use crate::error::{Error, Result};
use crate::grid::RadialGridFunction;
use crate::quadrature::cumulative;
use crate::stationary::{solve_pressure_at_radius, solve_r0, FixedPointConfig, InitialPressure, ModelParams};

/// Right side used for the radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Exact delay with characteristic tracking.
    FullDelay,
    /// Characteristics replaced by their `τ = 0` limit:
    /// `R' = (μ/R)[R(t-τ)I₁(R(t-τ))/I₀(R(t-τ)) - σ̃R²/2]`.
    DroppedOtau,
}

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Requested step; with a delay it is reduced so that `τ/dt` is an integer.
    pub dt: f64,
    pub t_end: f64,
    pub variant: Variant,
    /// Fixed RK4 substeps per backward trace over one delay window; at least 8.
    pub characteristic_substeps: usize,
    /// Radial grid intervals of each stored profile.
    pub grid_intervals: usize,
    /// `run_to_steady` stops once `|R'|` falls below this.
    pub steady_tol: f64,
    /// Rebuilds of each new profile once it can be interpolated rather than
    /// extrapolated in time.
    pub corrector_passes: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.005,
            t_end: 200.0,
            variant: Variant::FullDelay,
            characteristic_substeps: 8,
            grid_intervals: 64,
            steady_tol: 1e-8,
            corrector_passes: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, tau: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Domain(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.variant == Variant::FullDelay && tau > 0.0 && self.dt > 0.25 * tau * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("dt = {} exceeds tau/4 = {}", self.dt, 0.25 * tau)));
        }
        if self.characteristic_substeps < 8 {
            return Err(Error::Domain(format!(
                "characteristic_substeps must be at least 8, got {}",
                self.characteristic_substeps
            )));
        }
        if self.grid_intervals < 64 || !self.grid_intervals.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "grid_intervals must be even and at least 64, got {}",
                self.grid_intervals
            )));
        }
        if !(self.steady_tol > 0.0) {
            return Err(Error::Domain("steady_tol must be positive".into()));
        }
        Ok(())
    }

    /// Step actually used: `τ/⌈τ/dt⌉` with a delay, `dt` otherwise.
    pub fn effective_dt(&self, tau: f64) -> f64 {
        if tau > 0.0 {
            tau / (tau / self.dt - 1e-9).ceil()
        } else {
            self.dt
        }
    }
}

/// Where a time lies relative to the stored data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    /// Prescribed data on `[-τ, 0)`.
    History,
    /// `[kτ, (k+1)τ]`.
    Block(usize),
}

/// Interpolation weights over at most four stored step indices.
#[derive(Debug, Clone, Copy)]
enum Stencil {
    History,
    Nodes { first: usize, len: usize, weights: [f64; 4] },
}

/// Result of rebuilding one pressure-gradient profile.
struct Built {
    profile: RadialGridFunction,
    endpoint_error: f64,
    jacobian_log: f64,
}

/// Radius history with the stored profiles over the last delay window.
#[derive(Debug, Clone, Serialize)]
pub struct DelayTrajectory {
    pub params: ModelParams,
    pub config: SimConfig,
    /// Step actually used.
    pub dt: f64,
    pub r_init: f64,
    pub times: Vec<f64>,
    pub r_values: Vec<f64>,
    pub r_prime: Vec<f64>,
    /// `|ξ(t-τ; R(t), t) - R(t-τ)|` for each stored profile (zero without delay).
    pub endpoint_errors: Vec<f64>,
    /// Largest `|ln ∂ξ/∂r|` of the backward map over all stored profiles.
    pub max_jacobian_log: f64,
    /// Delay-free radius, used for the blow-up guard.
    pub r_reference: f64,
    #[serde(skip)]
    history: Option<RadialGridFunction>,
    #[serde(skip)]
    profiles: VecDeque<RadialGridFunction>,
    #[serde(skip)]
    first_profile: usize,
    #[serde(skip)]
    bessel: SeriesConfig,
}

impl DelayTrajectory {
    /// Starts from the constant-in-time state `R ≡ r_init` on `[-τ, 0]`.
    ///
    /// The prescribed pressure on `[-τ, 0]` is the steady one of the disk of
    /// radius `r_init`, with the proliferation threshold shifted so that the
    /// boundary does not move, as constant data require.
    pub fn new(r_init: f64, params: &ModelParams, config: &SimConfig) -> Result<Self> {
        params.validate()?;
        config.validate(params.tau)?;
        if !(r_init > 0.0 && r_init.is_finite()) {
            return Err(Error::Domain(format!("initial radius must be positive, got {r_init}")));
        }
        let dt = config.effective_dt(params.tau);
        let mut traj = Self {
            params: *params,
            config: *config,
            dt,
            r_init,
            times: vec![0.0],
            r_values: vec![r_init],
            r_prime: vec![0.0],
            endpoint_errors: vec![0.0],
            max_jacobian_log: 0.0,
            r_reference: solve_r0(params.sigma_tilde, 1e-13)?,
            history: None,
            profiles: VecDeque::new(),
            first_profile: 0,
            bessel: SeriesConfig::default(),
        };
        if traj.tracks_characteristics() {
            traj.history = Some(history_profile(r_init, params, config.grid_intervals)?);
            let built = traj.build_profile(0.0, r_init, 0)?;
            traj.r_prime[0] = -built.profile.values()[config.grid_intervals];
            traj.endpoint_errors[0] = built.endpoint_error;
            traj.max_jacobian_log = built.jacobian_log;
            traj.profiles.push_back(built.profile);
        } else {
            traj.r_prime[0] = traj.reduced_rhs(0.0, r_init, 0)?;
        }
        Ok(traj)
    }

    fn tracks_characteristics(&self) -> bool {
        self.config.variant == Variant::FullDelay && self.params.tau > 0.0
    }

    pub fn t(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn radius(&self) -> f64 {
        *self.r_values.last().unwrap_or(&self.r_init)
    }

    pub fn radius_prime(&self) -> f64 {
        *self.r_prime.last().unwrap_or(&0.0)
    }

    pub fn steps(&self) -> usize {
        self.r_values.len() - 1
    }

    /// Largest endpoint discrepancy so far.
    pub fn max_endpoint_error(&self) -> f64 {
        self.endpoint_errors.iter().fold(0.0, |a, b| a.max(*b))
    }

    /// Steady-state flux balance `(1/μ)∫₀ᴿ[σ(ξ(t-τ)) - σ̃] r dr = R R'/μ` at the last sample.
    pub fn mass_balance_residual(&self) -> f64 {
        if self.params.mu == 0.0 {
            return 0.0;
        }
        self.radius() * self.radius_prime() / self.params.mu
    }

    /// Steps per delay window.
    fn block(&self) -> usize {
        (self.params.tau / self.dt).round() as usize
    }

    fn segment_of(&self, s: f64) -> Segment {
        if s < 0.0 {
            Segment::History
        } else {
            Segment::Block((s / self.params.tau + 1e-9).floor() as usize)
        }
    }

    /// Lagrange stencil for time `s` within `segment`, using stored indices `≤ last`.
    fn stencil(&self, s: f64, segment: Segment, last: usize) -> Result<Stencil> {
        let Segment::Block(k) = segment else {
            return Ok(Stencil::History);
        };
        let x = s / self.dt;
        let last_time = last as f64;
        let (lo, hi) = if x > last_time + 1e-9 {
            (last.saturating_sub(3), last)
        } else {
            let lo_seg = k * self.block();
            let hi_seg = ((k + 1) * self.block()).min(last);
            let lo_seg = lo_seg.min(hi_seg);
            let centre = x.floor().max(0.0) as usize;
            let lo = centre.saturating_sub(1).clamp(lo_seg, hi_seg.saturating_sub(3).max(lo_seg));
            (lo, (lo + 3).min(hi_seg))
        };
        if lo < self.first_profile && self.tracks_characteristics() {
            return Err(Error::BufferUnderrun { requested: s, oldest: self.first_profile as f64 * self.dt });
        }
        let len = hi - lo + 1;
        let mut weights = [0.0; 4];
        for (a, w) in weights.iter_mut().enumerate().take(len) {
            *w = (0..len).filter(|&b| b != a).fold(1.0, |w, b| w * (x - (lo + b) as f64) / (a as f64 - b as f64));
        }
        Ok(Stencil::Nodes { first: lo, len, weights })
    }

    /// `R(s)` interpolated from the stored radii, `r_init` before 0.
    fn radius_at(&self, s: f64, last: usize) -> Result<f64> {
        match self.stencil(s, self.segment_of(s), last)? {
            Stencil::History => Ok(self.r_init),
            Stencil::Nodes { first, len, weights } => Ok((0..len).map(|a| weights[a] * self.r_values[first + a]).sum()),
        }
    }

    fn profile(&self, index: usize) -> &RadialGridFunction {
        &self.profiles[index - self.first_profile]
    }

    /// `∂p/∂r` at `x` from a stencil; odd in `x`.
    fn gradient(&self, x: f64, stencil: &Stencil) -> f64 {
        let (sign, x) = if x < 0.0 { (-1.0, -x) } else { (1.0, x) };
        let v = match stencil {
            Stencil::History => self.history.as_ref().map_or(0.0, |h| h.eval(x)),
            Stencil::Nodes { first, len, weights } => {
                (0..*len).map(|a| weights[a] * self.profile(first + a).eval(x)).sum()
            }
        };
        sign * v
    }

    /// Traces all characteristics ending at `nodes` at time `t_stage` back
    /// one delay, using stored data up to index `last`.
    fn trace(&self, t_stage: f64, nodes: &[f64], last: usize) -> Result<Vec<f64>> {
        let tau = self.params.tau;
        let bottom = t_stage - tau;
        let substeps = self.config.characteristic_substeps;
        // Split the window at the multiple of τ it contains.
        let brk = (t_stage / tau - 1e-9).floor() * tau;
        let pieces: Vec<(f64, f64, usize)> = if brk > bottom + 1e-12 * tau && brk < t_stage - 1e-12 * tau {
            let upper = ((t_stage - brk) / tau * substeps as f64).round().max(1.0) as usize;
            let lower = substeps.saturating_sub(upper).max(1);
            vec![(t_stage, brk, upper), (brk, bottom, lower)]
        } else {
            vec![(t_stage, bottom, substeps)]
        };
        let r_bound = (0..=last)
            .rev()
            .take(self.block() + 2)
            .map(|i| self.r_values[i])
            .fold(nodes.last().copied().unwrap_or(0.0).max(self.r_init), f64::max);

        let mut xi = nodes.to_vec();
        for (top, low, count) in pieces {
            let segment = self.segment_of(0.5 * (top + low));
            let h = (top - low) / count as f64;
            for j in 0..count {
                let s = top - j as f64 * h;
                let st0 = self.stencil(s, segment, last)?;
                let st1 = self.stencil(s - 0.5 * h, segment, last)?;
                let st2 = self.stencil(s - h, segment, last)?;
                for x in xi.iter_mut().skip(1) {
                    let v = |y: f64, st: &Stencil| -self.gradient(y, st);
                    let k1 = v(*x, &st0);
                    let k2 = v(*x - 0.5 * h * k1, &st1);
                    let k3 = v(*x - 0.5 * h * k2, &st1);
                    let k4 = v(*x - h * k3, &st2);
                    *x -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                    if !(*x > -1e-9 && *x <= r_bound * (1.0 + 1e-3)) {
                        return Err(Error::Consistency(format!(
                            "characteristic left the tumor at s = {:.6}: position {x}",
                            s - h
                        )));
                    }
                }
            }
        }
        Ok(xi)
    }

    /// Rebuilds `∂p/∂r` on `[0, r_stage]` at time `t_stage`.
    fn build_profile(&self, t_stage: f64, r_stage: f64, last: usize) -> Result<Built> {
        let n = self.config.grid_intervals;
        let h = r_stage / n as f64;
        let mu = self.params.mu;
        let st = self.params.sigma_tilde;
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let xi = self.trace(t_stage, &nodes, last)?;
        let r_past = self.radius_at(t_stage - self.params.tau, last)?;
        let i0_past = besseli(0, r_past, &self.bessel)?;

        let mut shift = vec![0.0; n + 1];
        let mut weighted = vec![0.0; n + 1];
        let mut sigma_xi = vec![0.0; n + 1];
        for i in 0..=n {
            let s_xi = besseli(0, xi[i].abs(), &self.bessel)? / i0_past;
            let s_y = besseli(0, nodes[i], &self.bessel)? / i0_past;
            sigma_xi[i] = s_xi;
            shift[i] = s_xi - s_y;
            weighted[i] = shift[i] * nodes[i];
        }
        let running = cumulative(&weighted, h)?;
        let mut values = vec![0.0; n + 1];
        let mut slopes = vec![0.0; n + 1];
        slopes[0] = -0.5 * mu * (sigma_xi[0] - st);
        for i in 1..=n {
            let y = nodes[i];
            let exact = -mu * (besseli(1, y, &self.bessel)? / i0_past - 0.5 * st * y);
            values[i] = exact - mu * running[i] / y;
            slopes[i] = -mu * (sigma_xi[i] - st) - values[i] / y;
        }
        let jacobian_log = (1..n).map(|i| ((xi[i + 1] - xi[i - 1]) / (2.0 * h)).abs().ln().abs()).fold(0.0, f64::max);
        Ok(Built {
            profile: RadialGridFunction::new(r_stage, values, slopes)?,
            endpoint_error: (xi[n] - r_past).abs(),
            jacobian_log,
        })
    }

    /// Radius right side without characteristics (`τ = 0` or the reduced variant).
    fn reduced_rhs(&self, t_stage: f64, r_stage: f64, last: usize) -> Result<f64> {
        let rp = if self.params.tau > 0.0 { self.radius_at(t_stage - self.params.tau, last)? } else { r_stage };
        let ratio = besseli(1, rp, &self.bessel)? / besseli(0, rp, &self.bessel)?;
        Ok(self.params.mu / r_stage * (rp * ratio - 0.5 * self.params.sigma_tilde * r_stage * r_stage))
    }

    fn rhs(&self, t_stage: f64, r_stage: f64, last: usize) -> Result<f64> {
        if !(r_stage > 0.0) {
            return Err(Error::Divergence { t: t_stage, radius: r_stage });
        }
        if self.tracks_characteristics() {
            let built = self.build_profile(t_stage, r_stage, last)?;
            Ok(-built.profile.values()[self.config.grid_intervals])
        } else {
            self.reduced_rhs(t_stage, r_stage, last)
        }
    }

    /// Advances by one step of classical RK4.
    pub fn advance(&mut self) -> Result<()> {
        let last = self.steps();
        let t = self.t();
        let dt = self.dt;
        let r = self.radius();
        let k1 = self.radius_prime();
        let k2 = self.rhs(t + 0.5 * dt, r + 0.5 * dt * k1, last)?;
        let k3 = self.rhs(t + 0.5 * dt, r + 0.5 * dt * k2, last)?;
        let k4 = self.rhs(t + dt, r + dt * k3, last)?;
        let r_next = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t_next = (last + 1) as f64 * dt;
        if !(r_next > 0.0 && r_next < 10.0 * self.r_reference) {
            return Err(Error::Divergence { t: t_next, radius: r_next });
        }
        self.times.push(t_next);
        self.r_values.push(r_next);

        if self.tracks_characteristics() {
            // Predict with extrapolated data, then optionally rebuild with the
            // predicted profile stored so the last step is interpolated.
            let mut built = self.build_profile(t_next, r_next, last)?;
            for pass in 0..self.config.corrector_passes {
                if pass == 0 {
                    self.profiles.push_back(built.profile.clone());
                } else if let Some(back) = self.profiles.back_mut() {
                    *back = built.profile.clone();
                }
                built = self.build_profile(t_next, r_next, last + 1)?;
            }
            self.r_prime.push(-built.profile.values()[self.config.grid_intervals]);
            self.endpoint_errors.push(built.endpoint_error);
            self.max_jacobian_log = self.max_jacobian_log.max(built.jacobian_log);
            if self.config.corrector_passes == 0 {
                self.profiles.push_back(built.profile);
            } else if let Some(back) = self.profiles.back_mut() {
                *back = built.profile;
            }
            let keep_from = (last + 1).saturating_sub(self.block() + 4);
            while self.first_profile < keep_from {
                self.profiles.pop_front();
                self.first_profile += 1;
            }
        } else {
            let rp = self.reduced_rhs(t_next, r_next, last + 1)?;
            self.r_prime.push(rp);
            self.endpoint_errors.push(0.0);
        }
        Ok(())
    }
}

/// Pressure gradient of the disk of radius `r_init` held at rest: the steady
/// delayed profile with the threshold shifted until the boundary flux vanishes.
fn history_profile(r_init: f64, params: &ModelParams, intervals: usize) -> Result<RadialGridFunction> {
    let fp = FixedPointConfig { grid_size: 2 * intervals.max(64), ..FixedPointConfig::default() };
    let mut shifted = *params;
    for _ in 0..100 {
        let sol = solve_pressure_at_radius(&shifted, r_init, &fp, InitialPressure::One)?;
        if sol.flux_residual.abs() < 1e-14 {
            let m = fp.grid_size / 2;
            let stride = m / intervals;
            let r2 = r_init * r_init;
            let values = (0..=intervals).map(|i| sol.slope_nodes()[i * stride] / r2).collect();
            let slopes = (0..=intervals).map(|i| sol.curvature_nodes()[i * stride] / (r2 * r_init)).collect();
            return RadialGridFunction::new(r_init, values, slopes);
        }
        shifted.sigma_tilde += 2.0 * sol.flux_residual;
        shifted.validate()?;
    }
    Err(Error::Convergence { what: "initial history balance", limit: 100 })
}

/// Integrates from `r_init` until `|R'| < steady_tol` or `t_end`.
pub fn run_to_steady(r_init: f64, params: &ModelParams, cfg: &SimConfig) -> Result<DelayTrajectory> {
    let mut traj = DelayTrajectory::new(r_init, params, cfg)?;
    run_until(&mut traj, true)?;
    Ok(traj)
}

/// Integrates over the whole horizon without the steady-state stop.
pub fn run_horizon(r_init: f64, params: &ModelParams, cfg: &SimConfig) -> Result<DelayTrajectory> {
    let mut traj = DelayTrajectory::new(r_init, params, cfg)?;
    run_until(&mut traj, false)?;
    Ok(traj)
}

fn run_until(traj: &mut DelayTrajectory, stop_at_rest: bool) -> Result<()> {
    let steps = (traj.config.t_end / traj.dt - 1e-9).ceil() as usize;
    while traj.steps() < steps {
        if stop_at_rest && traj.steps() > 0 && traj.radius_prime().abs() < traj.config.steady_tol {
            break;
        }
        traj.advance()?;
    }
    Ok(())
}

/// Both variants from the same start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantComparison {
    pub tau: f64,
    /// `sup_t |R_full(t) - R_dropped(t)|` over the common horizon.
    pub sup_distance: f64,
    pub terminal_full: f64,
    pub terminal_dropped: f64,
}

pub fn compare_variants(r_init: f64, params: &ModelParams, cfg: &SimConfig) -> Result<VariantComparison> {
    if params.tau == 0.0 {
        return Err(Error::Domain("variant comparison needs a positive delay".into()));
    }
    let full = run_horizon(r_init, params, &SimConfig { variant: Variant::FullDelay, ..*cfg })?;
    let dropped = run_horizon(r_init, params, &SimConfig { variant: Variant::DroppedOtau, ..*cfg })?;
    let sup_distance = full.r_values.iter().zip(&dropped.r_values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(VariantComparison {
        tau: params.tau,
        sup_distance,
        terminal_full: full.radius(),
        terminal_dropped: dropped.radius(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: f64, tau: f64) -> ModelParams {
        ModelParams::new(mu, 0.5, tau).unwrap()
    }

    #[test]
    fn config_validation() {
        let c = SimConfig { dt: 0.01, ..Default::default() };
        assert!(c.validate(0.02).is_err());
        assert!(c.validate(0.0).is_ok());
        let c = SimConfig { characteristic_substeps: 4, ..Default::default() };
        assert!(c.validate(0.02).is_err());
        assert!((SimConfig { dt: 0.003, ..Default::default() }.effective_dt(0.02) - 0.02 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn zero_delay_matches_direct_integration() {
        let p = params(1.0, 0.0);
        let cfg = SimConfig { dt: 0.01, t_end: 5.0, ..Default::default() };
        let traj = run_horizon(2.0, &p, &cfg).unwrap();
        // Reference: same right side with a step ten times smaller.
        let cfg_fine = SimConfig { dt: 0.001, variant: Variant::DroppedOtau, ..cfg };
        let fine = run_horizon(2.0, &p, &cfg_fine).unwrap();
        assert!((traj.radius() - fine.radius()).abs() < 1e-8);
    }

    #[test]
    fn delay_run_keeps_endpoint_identity() {
        let p = params(1.0, 0.02);
        let cfg = SimConfig { t_end: 0.3, ..Default::default() };
        let traj = run_horizon(2.5, &p, &cfg).unwrap();
        assert!(traj.max_endpoint_error() < 1e-6, "{}", traj.max_endpoint_error());
        assert!(traj.radius() > 2.5);
        assert!(traj.profiles.len() <= traj.block() + 5);
    }
}
