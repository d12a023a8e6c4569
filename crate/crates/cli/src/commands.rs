//! Subcommand implementations. Each returns the tables to be written.
//!
//! Sweep points are solved in parallel; `par_iter().collect()` keeps the
//! input order, so output rows never depend on scheduling.

use fbtumor_core::perturbation::{
    growth_rate, mode_threshold, mu_star, rho1_trajectory, tail_fit_rate, Classification, ModeState, TrajectoryOptions,
};
use fbtumor_core::radial_sim::{compare_variants, run_horizon, run_to_steady};
use fbtumor_core::stationary::{
    build_zeroth, compute_tau_expansion, fixed_point_solve_with, solve_r0, FixedPointSolution, ModelParams,
    TauExpansion,
};
use log::info;
use rayon::prelude::*;

use crate::config::{EvolveRun, RunConfig};
use crate::error::Result;
use crate::output::{Cell, Table};

const POINT_COLUMNS: [&str; 3] = ["mu", "sigma_tilde", "tau"];

fn point_cells(p: &ModelParams) -> Vec<Cell> {
    vec![p.mu.into(), p.sigma_tilde.into(), p.tau.into()]
}

fn columns(extra: &[&'static str]) -> Vec<&'static str> {
    POINT_COLUMNS.iter().chain(extra).copied().collect()
}

struct StationaryPoint {
    params: ModelParams,
    expansion: TauExpansion,
    fixed: FixedPointSolution,
}

impl StationaryPoint {
    fn remainder(&self) -> f64 {
        (self.fixed.r_star - self.expansion.radius(self.params.tau)).abs()
    }
}

/// `R⁰`, `R¹`, `R*(τ)`, profiles and the `O(τ²)` remainder table.
pub fn stationary(cfg: &RunConfig) -> Result<Vec<Table>> {
    let fp = cfg.stationary.fixed_point();
    let solved = cfg
        .points()
        .par_iter()
        .map(|p| -> Result<StationaryPoint> {
            let zeroth = build_zeroth(p)?;
            let expansion = compute_tau_expansion(p, &zeroth)?;
            let fixed = fixed_point_solve_with(p, &fp)?;
            info!("mu = {}, sigma_tilde = {}, tau = {}: R* = {}", p.mu, p.sigma_tilde, p.tau, fixed.r_star);
            Ok(StationaryPoint { params: *p, expansion, fixed })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Table::new(
        "stationary",
        &columns(&[
            "r0",
            "r1",
            "r_first_order",
            "r_star",
            "remainder",
            "flux_residual",
            "iterations",
            "contraction_estimate",
            "bisections",
        ]),
    );
    let mut profiles = Table::new("profiles", &columns(&["x", "sigma0", "p0", "sigma1", "p1_prime", "p_star"]));
    let mut richardson = Table::new("richardson", &columns(&["remainder", "remainder_over_tau2", "halving_ratio"]));
    let m = cfg.stationary.profile_points - 1;
    for s in &solved {
        let (p, e, f) = (&s.params, &s.expansion, &s.fixed);
        let mut row = point_cells(p);
        row.extend([
            e.zeroth.r0.into(),
            e.r1.into(),
            e.radius(p.tau).into(),
            f.r_star.into(),
            s.remainder().into(),
            f.residual.into(),
            f.iterations.into(),
            f.contraction_estimate.into(),
            f.bisections.into(),
        ]);
        summary.push(row);

        let z = &e.zeroth;
        for i in 0..=m {
            let x = i as f64 / m as f64;
            let r = x * z.r0;
            let mut row = point_cells(p);
            row.extend([
                x.into(),
                z.sigma0(r)?.into(),
                z.p0(r)?.into(),
                e.sigma1(r)?.into(),
                e.p1_prime(r)?.into(),
                f.p_grid.eval(x).into(),
            ]);
            profiles.push(row);
        }

        if p.tau > 0.0 {
            let doubled = solved.iter().find(|o| {
                o.params.mu == p.mu
                    && o.params.sigma_tilde == p.sigma_tilde
                    && (o.params.tau - 2.0 * p.tau).abs() <= 1e-12 * p.tau
            });
            let mut row = point_cells(p);
            row.extend([
                s.remainder().into(),
                (s.remainder() / (p.tau * p.tau)).into(),
                doubled.map(|d| d.remainder() / s.remainder()).into(),
            ]);
            richardson.push(row);
        }
    }
    Ok(vec![summary, profiles, richardson])
}

/// `(σ̃, R⁰, μ*, [(n, μₙ⁰)])` for one value of `σ̃`.
type ThresholdSet = (f64, f64, f64, Vec<(u32, f64)>);

/// Thresholds `μₙ⁰`, `μ*` and the per-`(n, μ)` classification grid.
pub fn stability(cfg: &RunConfig) -> Result<Vec<Table>> {
    let st = &cfg.stability;
    let modes: Vec<u32> = cfg.sweep.n.clone().unwrap_or_else(|| (0..=st.n_max).collect());
    let sigmas = cfg.sigma_values();
    let per_sigma = sigmas
        .par_iter()
        .map(|&sigma| -> Result<ThresholdSet> {
            let r0 = solve_r0(sigma, 1e-13)?;
            let star = mu_star(r0)?;
            let thresholds = (0..=st.n_max).map(|n| Ok((n, mode_threshold(n, r0)?))).collect::<Result<Vec<_>>>()?;
            Ok((sigma, r0, star, thresholds))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut star_table = Table::new("mu_star", &["sigma_tilde", "r0", "mu_star"]);
    let mut threshold_table = Table::new("thresholds", &["sigma_tilde", "n", "threshold"]);
    let mut classes =
        Table::new("classification", &["sigma_tilde", "mu", "mu_over_mu_star", "n", "growth_rate", "class"]);
    for (sigma, r0, star, thresholds) in &per_sigma {
        info!("sigma_tilde = {sigma}: mu* = {star}");
        star_table.push(vec![(*sigma).into(), (*r0).into(), (*star).into()]);
        for &(n, t) in thresholds {
            threshold_table.push(vec![(*sigma).into(), n.into(), Cell::Extended(t)]);
        }
        for &mu in &cfg.mu_values() {
            let p = ModelParams { mu, sigma_tilde: *sigma, tau: 0.0, lambda: 0.0 };
            for &n in &modes {
                let g = growth_rate(n, &p, *r0)?;
                let class = Classification::from_rate(g, st.neutral_tol);
                classes.push(vec![
                    (*sigma).into(),
                    mu.into(),
                    (mu / star).into(),
                    n.into(),
                    g.into(),
                    class.as_str().into(),
                ]);
            }
        }
    }
    Ok(vec![star_table, threshold_table, classes])
}

/// `(t, ρₙ⁰, ρₙ¹, ρₙ⁰ + τρₙ¹)` for each requested mode.
pub fn modes(cfg: &RunConfig) -> Result<Vec<Table>> {
    let mc = &cfg.modes;
    let modes: Vec<u32> = cfg.sweep.n.clone().unwrap_or_else(|| vec![0, 1, 2]);
    let opts = TrajectoryOptions {
        t_end: mc.t_end,
        dt: mc.dt,
        forcing: mc.forcing,
        step_tol: mc.step_tol,
        max_samples: mc.max_samples,
    };
    let jobs: Vec<(u32, ModelParams)> =
        modes.iter().flat_map(|&n| cfg.points().into_iter().map(move |p| (n, p))).collect();
    let runs = jobs
        .par_iter()
        .map(|(n, p)| {
            let mode = ModeState::new(*n, p, mc.rho0_init, mc.rho1_init)?;
            let tr = rho1_trajectory(&mode, p, &opts)?;
            Ok((*p, mode, tr))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Table::new(
        "modes_summary",
        &columns(&["n", "growth_rate", "forcing_coeff", "c1", "c3", "threshold", "rho1_tail_rate"]),
    );
    let mut tables: Vec<Table> = Vec::new();
    for (p, mode, tr) in &runs {
        let name = format!("mode_{}", mode.n);
        if !tables.iter().any(|t| t.name == name) {
            tables.push(Table::new(name.clone(), &columns(&["t", "rho0", "rho1", "combined"])));
        }
        let table = tables.iter_mut().find(|t| t.name == name).expect("table was just inserted");
        for i in 0..tr.times.len() {
            let mut row = point_cells(p);
            row.extend([tr.times[i].into(), tr.rho0[i].into(), tr.rho1[i].into(), tr.combined[i].into()]);
            table.push(row);
        }
        let tail = tail_fit_rate(&tr.times, &tr.rho1, mc.tail_fraction).ok();
        let mut row = point_cells(p);
        row.extend([
            mode.n.into(),
            mode.growth_rate.into(),
            tr.coefficients.forcing_coeff.into(),
            mode.c1.into(),
            mode.c3.into(),
            Cell::Extended(mode.threshold),
            tail.into(),
        ]);
        summary.push(row);
    }
    tables.push(summary);
    Ok(tables)
}

/// Radius trajectories with the full delay.
pub fn evolve(cfg: &RunConfig) -> Result<Vec<Table>> {
    let ev = &cfg.evolve;
    let fp = cfg.stationary.fixed_point();
    let runs = cfg
        .points()
        .par_iter()
        .map(|p| {
            let sim = ev.sim(p.tau);
            let r_star = fixed_point_solve_with(p, &fp)?.r_star;
            let r_init = ev.r_init.unwrap_or(ev.r_init_factor * r_star);
            let tr = match ev.run {
                EvolveRun::Steady => run_to_steady(r_init, p, &sim)?,
                EvolveRun::Horizon => run_horizon(r_init, p, &sim)?,
            };
            let comparison =
                if ev.compare_variants && p.tau > 0.0 { Some(compare_variants(r_init, p, &sim)?) } else { None };
            info!("mu = {}, tau = {}: R({}) = {}", p.mu, p.tau, tr.t(), tr.radius());
            Ok((*p, r_star, tr, comparison))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut trajectory = Table::new("evolve", &columns(&["t", "radius", "radius_prime"]));
    let mut summary = Table::new(
        "evolve_summary",
        &columns(&[
            "r_init",
            "r_star",
            "dt",
            "steps",
            "t_final",
            "radius_final",
            "radius_prime_final",
            "distance_to_r_star",
            "max_endpoint_error",
            "max_jacobian_log",
        ]),
    );
    let mut variants = Table::new("variants", &columns(&["sup_distance", "terminal_full", "terminal_dropped"]));
    for (p, r_star, tr, comparison) in &runs {
        let last = tr.times.len() - 1;
        for i in (0..=last).filter(|i| i % ev.sample_every == 0 || *i == last) {
            let mut row = point_cells(p);
            row.extend([tr.times[i].into(), tr.r_values[i].into(), tr.r_prime[i].into()]);
            trajectory.push(row);
        }
        let mut row = point_cells(p);
        row.extend([
            tr.r_init.into(),
            (*r_star).into(),
            tr.dt.into(),
            tr.steps().into(),
            tr.t().into(),
            tr.radius().into(),
            tr.radius_prime().into(),
            (tr.radius() - r_star).abs().into(),
            tr.max_endpoint_error().into(),
            tr.max_jacobian_log.into(),
        ]);
        summary.push(row);
        if let Some(c) = comparison {
            let mut row = point_cells(p);
            row.extend([c.sup_distance.into(), c.terminal_full.into(), c.terminal_dropped.into()]);
            variants.push(row);
        }
    }
    let mut out = vec![trajectory, summary];
    if ev.compare_variants {
        out.push(variants);
    }
    Ok(out)
}
