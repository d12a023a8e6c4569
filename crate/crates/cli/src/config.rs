//! Run configuration read from TOML with dotted section keys.
//!
//! Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use fbtumor_core::radial_sim::{SimConfig, Variant};
use fbtumor_core::stationary::{FixedPointConfig, ModelParams};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::output::Format;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub stationary: StationarySection,
    pub stability: StabilitySection,
    pub modes: ModesSection,
    pub evolve: EvolveSection,
    pub verify: VerifySection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsSection {
    pub mu: f64,
    pub sigma_tilde: f64,
    pub tau: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { mu: 1.0, sigma_tilde: 0.5, tau: 0.01 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationarySection {
    pub grid_size: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub characteristic_steps: usize,
    pub root_tol: f64,
    pub max_bisections: usize,
    /// Samples of each profile on the rescaled interval `[0, 1]`.
    pub profile_points: usize,
}

impl Default for StationarySection {
    fn default() -> Self {
        let fp = FixedPointConfig::default();
        Self {
            grid_size: fp.grid_size,
            max_iter: fp.max_iter,
            tol: fp.tol,
            characteristic_steps: fp.characteristic_steps,
            root_tol: fp.root_tol,
            max_bisections: fp.max_bisections,
            profile_points: 65,
        }
    }
}

impl StationarySection {
    pub fn fixed_point(&self) -> FixedPointConfig {
        FixedPointConfig {
            grid_size: self.grid_size,
            max_iter: self.max_iter,
            tol: self.tol,
            characteristic_steps: self.characteristic_steps,
            root_tol: self.root_tol,
            max_bisections: self.max_bisections,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySection {
    /// Highest mode of the threshold table.
    pub n_max: u32,
    /// `|gₙ|` at or below this counts as neutral.
    pub neutral_tol: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self { n_max: 16, neutral_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    pub rho0_init: f64,
    pub rho1_init: f64,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub forcing: bool,
    pub step_tol: f64,
    pub max_samples: usize,
    /// Trailing fraction of the series used for the decay-rate fit.
    pub tail_fraction: f64,
}

impl Default for ModesSection {
    fn default() -> Self {
        Self {
            rho0_init: 1.0,
            rho1_init: 0.0,
            t_end: 50.0,
            dt: None,
            forcing: true,
            step_tol: 1e-9,
            max_samples: 2000,
            tail_fraction: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveRun {
    /// Stop once `|R'|` falls below `steady_tol`.
    Steady,
    /// Integrate to `t_end`.
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Full,
    Dropped,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    /// Absolute initial radius; overrides `r_init_factor`.
    pub r_init: Option<f64>,
    /// Initial radius relative to the steady radius with delay.
    pub r_init_factor: f64,
    pub run: EvolveRun,
    pub variant: VariantName,
    /// Step; absent selects `min(0.005, τ/4)`.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub characteristic_substeps: usize,
    pub grid_intervals: usize,
    pub steady_tol: f64,
    pub corrector_passes: usize,
    /// Keep every `sample_every`-th step in the trajectory table.
    pub sample_every: usize,
    /// Also run both variants to `t_end` and report their distance.
    pub compare_variants: bool,
}

impl Default for EvolveSection {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            r_init: None,
            r_init_factor: 1.5,
            run: EvolveRun::Steady,
            variant: VariantName::Full,
            dt: None,
            t_end: sim.t_end,
            characteristic_substeps: sim.characteristic_substeps,
            grid_intervals: sim.grid_intervals,
            steady_tol: sim.steady_tol,
            corrector_passes: sim.corrector_passes,
            sample_every: 10,
            compare_variants: false,
        }
    }
}

impl EvolveSection {
    pub fn sim(&self, tau: f64) -> SimConfig {
        let default_dt = SimConfig::default().dt;
        SimConfig {
            dt: self.dt.unwrap_or(if tau > 0.0 { default_dt.min(0.25 * tau) } else { default_dt }),
            t_end: self.t_end,
            variant: match self.variant {
                VariantName::Full => Variant::FullDelay,
                VariantName::Dropped => Variant::DroppedOtau,
            },
            characteristic_substeps: self.characteristic_substeps,
            grid_intervals: self.grid_intervals,
            steady_tol: self.steady_tol,
            corrector_passes: self.corrector_passes,
        }
    }
}

/// Deliberate defects for exercising the verification report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Negates the coefficient `A` before its sign check.
    FlipASign,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Sample points `x_max·i/grid_points`, `i = 1..=grid_points`.
    pub grid_points: usize,
    pub x_max: f64,
    pub n_max: u32,
    /// Limit on the Bessel recurrence residuals.
    pub tol: f64,
    pub fault: Option<Fault>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { grid_points: 200, x_max: 10.0, n_max: 8, tol: 1e-12, fault: None }
    }
}

impl VerifySection {
    pub fn grid(&self) -> Vec<f64> {
        (1..=self.grid_points).map(|i| self.x_max * i as f64 / self.grid_points as f64).collect()
    }
}

/// Optional value lists; an absent list falls back to the single value in
/// `params` (or to the command's default modes for `n`).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub mu: Option<Vec<f64>>,
    pub sigma_tilde: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
    pub n: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

fn config_error(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_error(key, format!("must be positive and finite, got {v}")))
    }
}

fn at_least(key: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(config_error(key, format!("must be at least {min}, got {v}")))
    }
}

fn increasing<T: PartialOrd + std::fmt::Debug>(key: &str, values: &Option<Vec<T>>) -> Result<()> {
    match values {
        Some(v) if v.is_empty() => Err(config_error(key, "range is empty")),
        Some(v) if !v.windows(2).all(|w| w[0] < w[1]) => {
            Err(config_error(key, format!("values must be strictly increasing, got {v:?}")))
        }
        _ => Ok(()),
    }
}

impl RunConfig {
    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => {
                let cfg = Self::default();
                cfg.validate()?;
                Ok(cfg)
            }
            Some(p) => {
                let text =
                    std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
                Self::from_toml(&text)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.points() {
            p.validate().map_err(|e| config_error("params", e))?;
        }
        increasing("sweep.mu", &self.sweep.mu)?;
        increasing("sweep.sigma_tilde", &self.sweep.sigma_tilde)?;
        increasing("sweep.tau", &self.sweep.tau)?;
        increasing("sweep.n", &self.sweep.n)?;

        let st = &self.stationary;
        self.stationary.fixed_point().validate().map_err(|e| config_error("stationary", e))?;
        at_least("stationary.profile_points", st.profile_points, 2)?;

        positive("stability.neutral_tol", self.stability.neutral_tol)?;
        at_least("stability.n_max", self.stability.n_max as usize, 2)?;

        let m = &self.modes;
        positive("modes.t_end", m.t_end)?;
        positive("modes.step_tol", m.step_tol)?;
        if let Some(dt) = m.dt {
            positive("modes.dt", dt)?;
        }
        at_least("modes.max_samples", m.max_samples, 2)?;
        if !(m.tail_fraction > 0.0 && m.tail_fraction <= 1.0) {
            return Err(config_error("modes.tail_fraction", format!("must lie in (0, 1], got {}", m.tail_fraction)));
        }

        let ev = &self.evolve;
        positive("evolve.r_init_factor", ev.r_init_factor)?;
        if let Some(r) = ev.r_init {
            positive("evolve.r_init", r)?;
        }
        if let Some(dt) = ev.dt {
            positive("evolve.dt", dt)?;
        }
        positive("evolve.t_end", ev.t_end)?;
        positive("evolve.steady_tol", ev.steady_tol)?;
        at_least("evolve.sample_every", ev.sample_every, 1)?;
        for p in self.points() {
            ev.sim(p.tau).validate(p.tau).map_err(|e| config_error("evolve", e))?;
        }

        let v = &self.verify;
        at_least("verify.grid_points", v.grid_points, 1)?;
        positive("verify.x_max", v.x_max)?;
        positive("verify.tol", v.tol)?;
        at_least("verify.n_max", v.n_max as usize, 2)?;
        Ok(())
    }

    pub fn mu_values(&self) -> Vec<f64> {
        self.sweep.mu.clone().unwrap_or_else(|| vec![self.params.mu])
    }

    pub fn sigma_values(&self) -> Vec<f64> {
        self.sweep.sigma_tilde.clone().unwrap_or_else(|| vec![self.params.sigma_tilde])
    }

    pub fn tau_values(&self) -> Vec<f64> {
        self.sweep.tau.clone().unwrap_or_else(|| vec![self.params.tau])
    }

    /// Cartesian product of the sweep lists, ordered by `μ`, then `σ̃`, then `τ`.
    pub fn points(&self) -> Vec<ModelParams> {
        let mut out = Vec::new();
        for &mu in &self.mu_values() {
            for &sigma_tilde in &self.sigma_values() {
                for &tau in &self.tau_values() {
                    out.push(ModelParams { mu, sigma_tilde, tau, lambda: 0.0 });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn dotted_keys_parse() {
        let cfg =
            RunConfig::from_toml("params.mu = 2.5\nsweep.tau = [0.0, 0.01]\nverify.fault = \"flip_a_sign\"\n").unwrap();
        assert_eq!(cfg.params.mu, 2.5);
        assert_eq!(cfg.points().len(), 2);
        assert_eq!(cfg.verify.fault, Some(Fault::FlipASign));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_toml("params.muu = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("muu"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unordered_sweep_is_rejected() {
        let err = RunConfig::from_toml("sweep.mu = [2.0, 1.0]\n").unwrap_err();
        assert!(err.to_string().contains("sweep.mu"));
        assert!(RunConfig::from_toml("sweep.tau = []\n").is_err());
    }

    #[test]
    fn empty_verify_grid_is_rejected() {
        let err = RunConfig::from_toml("verify.grid_points = 0\n").unwrap_err();
        assert!(err.to_string().contains("verify.grid_points"));
    }
}
