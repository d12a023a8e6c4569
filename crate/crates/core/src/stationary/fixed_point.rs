//! Steady state with the delay kept exactly.
//!
//! Works in coordinates rescaled by the unknown radius `R`, so the tumor is
//! the unit disk. For a trial pressure `p` on `[0, 2]` the map `𝓛` traces
//! each node back along `dξ/ds = -p'(ξ)/R³` over `[-τ, 0]`, evaluates the
//! proliferation `μR³[σ(ξ(-τ)) - σ̃]` with `σ(x; R) = I₀(Rx)/I₀(R)`,
//! recovers `p̄` on `[0, 1]` from
//! `p̄'(r) = -(1/r) ∫₀ʳ source(y) y dy`, `p̄(1) = 1`, and continues it
//! linearly to `[0, 2]`. The fixed point of `𝓛` is found by plain iteration
//! for each `R`; the radius is then fixed by bisection on the flux balance
//!
//! `F(R, τ) = ∫₀¹ [σ(ξ(-τ; r); R) - σ̃] r dr`.
//!
//! `F` is split as `P₀(R) - σ̃/2 + ∫₀¹ [σ(ξ(-τ)) - σ(r)] r dr`. The first
//! part is exact, and the quadrature only sees the `O(τ)` remainder.

use serde::Serialize;

use crate::bessel::{besseli, SeriesConfig};
use crate::error::{Error, Result};
use crate::grid::RadialGridFunction;
use crate::quadrature::{cumulative, cumulative_hermite};

use super::{p0_function, solve_r0, ModelParams};

/// Discretisation and stopping settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointConfig {
    /// Number of grid intervals on `[0, 2]`; even, so that `r = 1` is a node.
    pub grid_size: usize,
    /// Iteration cap of the pressure fixed point at each trial radius.
    pub max_iter: usize,
    /// Stopping tolerance on the `W^{2,∞}` distance of successive iterates,
    /// relative to `max(1, ‖p‖)`.
    pub tol: f64,
    /// Fixed RK4 steps across one delay window.
    pub characteristic_steps: usize,
    /// Stopping tolerance of the radius bisection on `|F|`.
    pub root_tol: f64,
    pub max_bisections: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            grid_size: 256,
            max_iter: 200,
            tol: 1e-12,
            characteristic_steps: 16,
            root_tol: 1e-13,
            max_bisections: 200,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 128 || !self.grid_size.is_multiple_of(2) {
            return Err(Error::Domain(format!("grid_size must be even and at least 128, got {}", self.grid_size)));
        }
        if self.max_iter == 0 || self.max_bisections == 0 || self.characteristic_steps == 0 {
            return Err(Error::Domain("iteration counts must be positive".into()));
        }
        if !(self.tol > 0.0 && self.root_tol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Starting pressure of the iteration.
///
/// The map only reads `p'`, so the two constant starts produce identical
/// iterates; `Quadratic(a)`, i.e. `1 + a(r² - 1)`, starts from a non-zero
/// velocity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPressure {
    One,
    Zero,
    Quadratic(f64),
}

/// Pressure samples on the nodes of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
struct Pressure {
    p: Vec<f64>,
    dp: Vec<f64>,
    d2p: Vec<f64>,
}

impl Pressure {
    fn constant(m: usize, value: f64) -> Self {
        Self { p: vec![value; m + 1], dp: vec![0.0; m + 1], d2p: vec![0.0; m + 1] }
    }

    fn quadratic(m: usize, a: f64) -> Self {
        let h = 1.0 / m as f64;
        let nodes = (0..=m).map(|i| i as f64 * h);
        Self {
            p: nodes.clone().map(|y| 1.0 + a * (y * y - 1.0)).collect(),
            dp: nodes.map(|y| 2.0 * a * y).collect(),
            d2p: vec![2.0 * a; m + 1],
        }
    }

    /// `p'` at `x`: Hermite cubic on `[0, 1]`, constant `p̄'(1)` beyond, odd
    /// reflection below 0.
    fn slope_at(&self, x: f64, h: f64) -> f64 {
        let m = self.dp.len() - 1;
        if x < 0.0 {
            return -self.slope_at(-x, h);
        }
        if x >= 1.0 {
            return self.dp[m];
        }
        let i = ((x / h) as usize).min(m - 1);
        let t = x / h - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.dp[i]
            + (t3 - 2.0 * t2 + t) * h * self.d2p[i]
            + (-2.0 * t3 + 3.0 * t2) * self.dp[i + 1]
            + (t3 - t2) * h * self.d2p[i + 1]
    }

    /// Discrete `W^{2,∞}[0, 2]` norm of the extended function.
    fn norm(&self) -> f64 {
        let m = self.p.len() - 1;
        let inner = (0..=m).map(|i| self.p[i].abs().max(self.dp[i].abs()).max(self.d2p[i].abs())).fold(0.0, f64::max);
        inner.max((self.p[m] + self.dp[m]).abs())
    }

    fn distance(&self, other: &Self) -> f64 {
        let m = self.p.len() - 1;
        let inner = (0..=m)
            .map(|i| {
                (self.p[i] - other.p[i])
                    .abs()
                    .max((self.dp[i] - other.dp[i]).abs())
                    .max((self.d2p[i] - other.d2p[i]).abs())
            })
            .fold(0.0, f64::max);
        let far = (self.p[m] + self.dp[m] - other.p[m] - other.dp[m]).abs();
        inner.max(far)
    }
}

/// Radius-dependent quantities shared by all iterations at one radius.
struct Frame {
    radius: f64,
    scale: f64,
    h: f64,
    i0_radius: f64,
    nodes: Vec<f64>,
    sigma_nodes: Vec<f64>,
    /// Exact part `-μR³[I₁(Rr)/(R I₀(R)) - σ̃r/2]` of `p̄'`.
    base_slope: Vec<f64>,
    /// `P₀(R) - σ̃/2`.
    base_flux: f64,
}

impl Frame {
    fn new(params: &ModelParams, radius: f64, m: usize, cfg: &SeriesConfig) -> Result<Self> {
        let h = 1.0 / m as f64;
        let i0_radius = besseli(0, radius, cfg)?;
        let scale = params.mu * radius.powi(3);
        let nodes: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
        let mut sigma_nodes = Vec::with_capacity(m + 1);
        let mut base_slope = Vec::with_capacity(m + 1);
        for &y in &nodes {
            sigma_nodes.push(besseli(0, radius * y, cfg)? / i0_radius);
            let i1 = besseli(1, radius * y, cfg)?;
            base_slope.push(-scale * (i1 / (radius * i0_radius) - 0.5 * params.sigma_tilde * y));
        }
        let base_flux = p0_function(radius, cfg)? - 0.5 * params.sigma_tilde;
        Ok(Self { radius, scale, h, i0_radius, nodes, sigma_nodes, base_slope, base_flux })
    }

    fn sigma(&self, x: f64, cfg: &SeriesConfig) -> Result<f64> {
        Ok(besseli(0, self.radius * x.abs(), cfg)? / self.i0_radius)
    }
}

/// One application of the map; returns the new pressure and `F(R, τ)`.
fn apply_map(
    params: &ModelParams,
    frame: &Frame,
    current: &Pressure,
    steps: usize,
    cfg: &SeriesConfig,
) -> Result<(Pressure, f64)> {
    let m = frame.nodes.len() - 1;
    let h = frame.h;
    let r3 = frame.radius.powi(3);
    let ds = -params.tau / steps as f64;
    let velocity = |x: f64| -current.slope_at(x, h) / r3;

    let mut correction = vec![0.0; m + 1];
    let mut weighted = vec![0.0; m + 1];
    if params.tau > 0.0 {
        for i in 1..=m {
            let mut x = frame.nodes[i];
            for _ in 0..steps {
                let k1 = velocity(x);
                let k2 = velocity(x + 0.5 * ds * k1);
                let k3 = velocity(x + 0.5 * ds * k2);
                let k4 = velocity(x + ds * k3);
                x += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if !(x > -1e-12 && x <= 2.0) {
                    return Err(Error::CharacteristicExit { position: x });
                }
            }
            correction[i] = frame.sigma(x, cfg)? - frame.sigma_nodes[i];
            weighted[i] = correction[i] * frame.nodes[i];
        }
    }
    let running = cumulative(&weighted, h)?;

    let mut next = Pressure::constant(m, 0.0);
    for i in 0..=m {
        let y = frame.nodes[i];
        let source = frame.scale * (frame.sigma_nodes[i] - params.sigma_tilde + correction[i]);
        if i == 0 {
            next.dp[0] = 0.0;
            next.d2p[0] = -0.5 * source;
        } else {
            next.dp[i] = frame.base_slope[i] - frame.scale * running[i] / y;
            next.d2p[i] = -source - next.dp[i] / y;
        }
    }
    let integral = cumulative_hermite(&next.dp, &next.d2p, h);
    for i in 0..=m {
        next.p[i] = 1.0 - (integral[m] - integral[i]);
    }
    Ok((next, frame.base_flux + running[m]))
}

/// Converged pressure at a fixed radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureSolution {
    pub radius: f64,
    /// `F(R, τ)` evaluated with the converged pressure.
    pub flux_residual: f64,
    pub iterations: usize,
    /// `W^{2,∞}` distances of successive iterates.
    pub distances: Vec<f64>,
    /// Largest ratio of successive distances above the roundoff floor.
    pub contraction_estimate: f64,
    /// Discrete `W^{2,∞}[0, 2]` norm of the converged pressure.
    pub norm: f64,
    #[serde(skip)]
    state: Pressure,
}

impl PressureSolution {
    /// Pressure on `[0, 2]` including the linear continuation.
    pub fn p_grid(&self, grid_size: usize) -> Result<RadialGridFunction> {
        let s = &self.state;
        let m = s.p.len() - 1;
        let h = 1.0 / m as f64;
        let (p1, dp1) = (s.p[m], s.dp[m]);
        let mut values = s.p.clone();
        let mut slopes = s.dp.clone();
        for i in m + 1..=grid_size {
            values.push(p1 + dp1 * (i as f64 * h - 1.0));
            slopes.push(dp1);
        }
        RadialGridFunction::new(2.0, values, slopes)
    }

    /// `p'` at the nodes of `[0, 1]`.
    pub fn slope_nodes(&self) -> &[f64] {
        &self.state.dp
    }

    /// `p''` at the nodes of `[0, 1]`.
    pub fn curvature_nodes(&self) -> &[f64] {
        &self.state.d2p
    }
}

fn iterate(
    params: &ModelParams,
    frame: &Frame,
    mut current: Pressure,
    fp: &FixedPointConfig,
    cfg: &SeriesConfig,
) -> Result<PressureSolution> {
    let mut distances = Vec::new();
    let mut ratio: f64 = 0.0;
    for k in 0..fp.max_iter {
        let (next, flux) = apply_map(params, frame, &current, fp.characteristic_steps, cfg)?;
        let d = next.distance(&current);
        let scale = next.norm().max(1.0);
        if k >= 1 {
            let prev = distances[k - 1];
            if prev > 1e-9 * scale {
                ratio = ratio.max(d / prev);
                if ratio >= 1.0 {
                    return Err(Error::DelayTooLarge { ratio });
                }
            }
        }
        distances.push(d);
        current = next;
        if d <= fp.tol * scale {
            return Ok(PressureSolution {
                radius: frame.radius,
                flux_residual: flux,
                iterations: k + 1,
                distances,
                contraction_estimate: ratio,
                norm: current.norm(),
                state: current,
            });
        }
    }
    Err(Error::Convergence { what: "pressure fixed point", limit: fp.max_iter })
}

/// Fixed point of `𝓛` at a given radius.
pub fn solve_pressure_at_radius(
    params: &ModelParams,
    radius: f64,
    fp: &FixedPointConfig,
    initial: InitialPressure,
) -> Result<PressureSolution> {
    params.validate()?;
    fp.validate()?;
    let cfg = SeriesConfig::default();
    let m = fp.grid_size / 2;
    let frame = Frame::new(params, radius, m, &cfg)?;
    let start = match initial {
        InitialPressure::One => Pressure::constant(m, 1.0),
        InitialPressure::Zero => Pressure::constant(m, 0.0),
        InitialPressure::Quadratic(a) => Pressure::quadratic(m, a),
    };
    iterate(params, &frame, start, fp, &cfg)
}

/// Steady state with exact delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSolution {
    pub r_star: f64,
    /// Rescaled pressure on `[0, 2]`.
    pub p_grid: RadialGridFunction,
    pub iterations: usize,
    pub contraction_estimate: f64,
    /// `F(R*, τ)`.
    pub residual: f64,
    /// `W^{2,∞}` norm of the pressure.
    pub pressure_norm: f64,
    /// Delay-free radius that anchors the bracket `[R_S/2, 3R_S/2]`.
    pub r_delay_free: f64,
    pub bisections: usize,
}

/// Solves with default settings apart from the grid and inner loop.
pub fn fixed_point_solve(
    params: &ModelParams,
    grid_size: usize,
    max_iter: usize,
    tol: f64,
) -> Result<FixedPointSolution> {
    let fp = FixedPointConfig { grid_size, max_iter, tol, ..FixedPointConfig::default() };
    fixed_point_solve_with(params, &fp)
}

pub fn fixed_point_solve_with(params: &ModelParams, fp: &FixedPointConfig) -> Result<FixedPointSolution> {
    params.validate()?;
    fp.validate()?;
    let cfg = SeriesConfig::default();
    let m = fp.grid_size / 2;
    let r_s = solve_r0(params.sigma_tilde, 1e-13)?;

    let mut warm = Pressure::constant(m, 1.0);
    let flux_at = |radius: f64, warm: &mut Pressure| -> Result<f64> {
        let frame = Frame::new(params, radius, m, &cfg)?;
        let sol = iterate(params, &frame, warm.clone(), fp, &cfg)?;
        *warm = sol.state;
        Ok(sol.flux_residual)
    };

    let (mut lo, mut hi) = (0.5 * r_s, 1.5 * r_s);
    let f_lo = flux_at(lo, &mut warm)?;
    let f_hi = flux_at(hi, &mut warm)?;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Range(format!("F does not change sign on [{lo:.6}, {hi:.6}]: F = {f_lo:.3e}, {f_hi:.3e}")));
    }
    let mut root = 0.5 * (lo + hi);
    let mut bisections = 0;
    for _ in 0..fp.max_bisections {
        bisections += 1;
        root = 0.5 * (lo + hi);
        let f = flux_at(root, &mut warm)?;
        if f.abs() < fp.root_tol || hi - lo < 4.0 * f64::EPSILON * hi {
            break;
        }
        if f > 0.0 {
            lo = root;
        } else {
            hi = root;
        }
    }

    let sol = solve_pressure_at_radius(params, root, fp, InitialPressure::One)?;
    Ok(FixedPointSolution {
        r_star: root,
        p_grid: sol.p_grid(fp.grid_size)?,
        iterations: sol.iterations,
        contraction_estimate: sol.contraction_estimate,
        residual: sol.flux_residual,
        pressure_norm: sol.norm,
        r_delay_free: r_s,
        bisections,
    })
}

/// A priori pressure bound
/// `M₁ = 2 max{(3μ/2) R_max³ (σ_max + σ̃), 1 + (μ/4) R_max³ (σ_max + σ̃)}`
/// with `R_max = 3R_S/2` and `σ_max = I₀(2R)/I₀(R)`.
pub fn pressure_bound(params: &ModelParams, r_delay_free: f64, radius: f64) -> Result<f64> {
    let cfg = SeriesConfig::default();
    let r_max = 1.5 * r_delay_free;
    let sigma_max = besseli(0, 2.0 * radius, &cfg)? / besseli(0, radius, &cfg)?;
    let c = r_max.powi(3) * (sigma_max + params.sigma_tilde);
    Ok(2.0 * (1.5 * params.mu * c).max(1.0 + 0.25 * params.mu * c))
}

/// Contraction factor `2M₄τ` with
/// `M₄ = (3μ/2) ‖∂σ/∂r‖_{L∞[0,2]} (1 + Mτ/(R_min³ - Mτ))`, `R_min = R_S/2`.
///
/// Returns infinity when `R_min³ ≤ Mτ`.
pub fn contraction_bound(params: &ModelParams, r_delay_free: f64, radius: f64, norm: f64) -> Result<f64> {
    let cfg = SeriesConfig::default();
    let slope_max = radius * besseli(1, 2.0 * radius, &cfg)? / besseli(0, radius, &cfg)?;
    let r_min3 = (0.5 * r_delay_free).powi(3);
    let mt = norm * params.tau;
    if r_min3 <= mt {
        return Ok(f64::INFINITY);
    }
    let m4 = 1.5 * params.mu * slope_max * (1.0 + mt / (r_min3 - mt));
    Ok(2.0 * m4 * params.tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(tau: f64) -> ModelParams {
        ModelParams::new(1.0, 0.5, tau).unwrap()
    }

    #[test]
    fn config_validation() {
        let bad = FixedPointConfig { grid_size: 129, ..Default::default() };
        assert!(bad.validate().is_err());
        let small = FixedPointConfig { grid_size: 64, ..Default::default() };
        assert!(small.validate().is_err());
    }

    #[test]
    fn zero_delay_reduces_to_delay_free_radius() {
        let sol = fixed_point_solve(&params(0.0), 128, 50, 1e-12).unwrap();
        let r0 = solve_r0(0.5, 1e-13).unwrap();
        assert!((sol.r_star - r0).abs() < 1e-10);
        assert_eq!(sol.contraction_estimate, 0.0);
    }

    #[test]
    fn boundary_value_and_origin_regularity() {
        let sol = fixed_point_solve(&params(0.01), 128, 100, 1e-12).unwrap();
        let m = 64;
        assert_eq!(sol.p_grid.values()[m], 1.0);
        assert_eq!(sol.p_grid.slopes()[0], 0.0);
        assert!(sol.residual.abs() < 1e-10);
        assert!(sol.contraction_estimate < 1.0);
    }

    #[test]
    fn large_delay_is_reported() {
        let p = ModelParams::new(30.0, 0.5, 0.5).unwrap();
        let err = solve_pressure_at_radius(&p, 3.3, &FixedPointConfig::default(), InitialPressure::One).unwrap_err();
        assert!(matches!(err, Error::DelayTooLarge { .. } | Error::CharacteristicExit { .. }), "{err}");
    }
}
