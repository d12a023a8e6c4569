//! Identity and invariant suite behind the `verify` subcommand.

use fbtumor_core::bessel::{verify_identities, SeriesConfig};
use fbtumor_core::perturbation::{growth_bracket, growth_rate, mode_threshold, rho1_rhs};
use fbtumor_core::stationary::{a_coefficient, b_coefficient, build_zeroth, compute_tau_expansion, ModelParams};

use crate::config::{Fault, RunConfig};
use crate::error::Result;
use crate::output::{Cell, Table};

/// One row of the report: `value` must satisfy the stated relation to `limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub relation: &'static str,
    pub limit: f64,
}

impl Check {
    fn below(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, relation: "<", limit }
    }

    fn above(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, relation: ">", limit }
    }

    fn holds(name: &'static str, ok: bool) -> Self {
        Self { name, value: if ok { 1.0 } else { 0.0 }, relation: "=", limit: 1.0 }
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            "<" => self.value < self.limit,
            ">" => self.value > self.limit,
            _ => self.value == self.limit,
        }
    }
}

fn max_over(xs: &[f64], f: impl Fn(f64) -> fbtumor_core::Result<f64>) -> Result<f64> {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        m = m.max(f(x)?);
    }
    Ok(m)
}

fn min_over(xs: &[f64], f: impl Fn(f64) -> fbtumor_core::Result<f64>) -> Result<f64> {
    Ok(-max_over(xs, |x| Ok(-f(x)?))?)
}

/// Runs every check; the caller decides what a failing row means.
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let v = &cfg.verify;
    let bessel = SeriesConfig::default();
    let grid = v.grid();
    let mut checks = Vec::new();

    let rep = verify_identities(&grid, v.n_max, &bessel)?;
    checks.push(Check::below("bessel_lowering_recurrence", rep.lowering_residual, v.tol));
    checks.push(Check::below("bessel_raising_recurrence", rep.raising_residual, v.tol));
    checks.push(Check::below("bessel_power_derivative", rep.power_derivative_residual, v.tol));
    checks.push(Check::below("bessel_three_term", rep.three_term_residual, v.tol));
    checks.push(Check::holds("bessel_turan_upper", rep.turan_upper_holds));
    checks.push(Check::holds("bessel_turan_lower", rep.turan_lower_holds));
    checks.push(Check::below("bessel_product_series", rep.product_residual, 1e-12));

    let mut bracket_min = f64::INFINITY;
    for n in 2..=v.n_max {
        bracket_min = bracket_min.min(min_over(&grid, |x| growth_bracket(n, x, &bessel))?);
    }
    checks.push(Check::above("growth_bracket_positive_n_ge_2", bracket_min, 0.0));
    checks.push(Check::below("growth_bracket_negative_n_0", max_over(&grid, |x| growth_bracket(0, x, &bessel))?, 0.0));

    let flip = if v.fault == Some(Fault::FlipASign) { -1.0 } else { 1.0 };
    checks.push(Check::below("a_negative", max_over(&grid, |x| Ok(flip * a_coefficient(x, &bessel)?))?, 0.0));
    checks.push(Check::below("b_negative", max_over(&grid, |x| b_coefficient(x, &bessel))?, 0.0));

    let base = cfg.params.clone();
    let zeroth = build_zeroth(&ModelParams::new(base.mu, base.sigma_tilde, 0.0)?)?;
    let r0 = zeroth.r0;
    let mut g1 = 0.0f64;
    let mut g0 = f64::NEG_INFINITY;
    let mut drift = 0.0f64;
    let mut r1_min = f64::INFINITY;
    for k in 1..=10 {
        let p = ModelParams::new(0.5 * k as f64, base.sigma_tilde, base.tau)?;
        g1 = g1.max(growth_rate(1, &p, r0)?.abs());
        g0 = g0.max(growth_rate(0, &p, r0)?);
        let e = compute_tau_expansion(&p, &build_zeroth(&p)?)?;
        r1_min = r1_min.min(e.r1);
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (-0.7, 2.3)] {
            drift = drift.max(rho1_rhs(1, a, b, &p, &e)?.abs());
        }
    }
    checks.push(Check::below("mode_1_growth_rate_zero", g1, 1e-13));
    checks.push(Check::below("mode_0_growth_rate_negative", g0, 0.0));
    checks.push(Check::below("mode_1_first_order_drift", drift, 1e-9));
    checks.push(Check::above("first_order_radius_positive", r1_min, 0.0));

    let thresholds = (2..=16).map(|n| mode_threshold(n, r0)).collect::<fbtumor_core::Result<Vec<_>>>()?;
    checks.push(Check::holds("thresholds_increasing", thresholds.windows(2).all(|w| w[0] < w[1])));
    Ok(checks)
}

pub fn report(checks: &[Check]) -> Table {
    let mut t = Table::new("verify", &["check", "value", "relation", "limit", "status"]);
    for c in checks {
        t.push(vec![
            c.name.into(),
            c.value.into(),
            c.relation.into(),
            c.limit.into(),
            Cell::from(if c.passed() { "pass" } else { "fail" }),
        ]);
    }
    t
}

/// Fixed-width text rendering for the terminal.
pub fn render(checks: &[Check]) -> String {
    let mut out = format!("{:<34} {:>12} {:>3} {:>10}  status\n", "check", "value", "", "limit");
    for c in checks {
        out.push_str(&format!(
            "{:<34} {:>12.3e} {:>3} {:>10.1e}  {}\n",
            c.name,
            c.value,
            c.relation,
            c.limit,
            if c.passed() { "PASS" } else { "FAIL" }
        ));
    }
    out
}
