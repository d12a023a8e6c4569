//! Randomised checks of identities and invariants.

use fbtumor_core::bessel::{besseli, SeriesConfig};
use fbtumor_core::perturbation::{growth_bracket, growth_rate, mode_threshold, solve_ln_bvp_fn};
use fbtumor_core::stationary::{
    a_coefficient, b_coefficient, build_zeroth, compute_tau_expansion, solve_r0, ModelParams,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn three_term_recurrence(n in 1u32..8, x in 0.01f64..10.0) {
        let cfg = SeriesConfig::default();
        let (a, b, c) = (besseli(n - 1, x, &cfg).unwrap(), besseli(n, x, &cfg).unwrap(), besseli(n + 1, x, &cfg).unwrap());
        prop_assert!((a - c - 2.0 * n as f64 / x * b).abs() <= 1e-13 * a.max(1.0));
    }

    #[test]
    fn stationary_coefficients_are_negative(x in 0.01f64..10.0) {
        let cfg = SeriesConfig::default();
        prop_assert!(a_coefficient(x, &cfg).unwrap() < 0.0);
        prop_assert!(b_coefficient(x, &cfg).unwrap() < 0.0);
    }

    #[test]
    fn bracket_signs(n in 2u32..16, x in 0.05f64..10.0) {
        let cfg = SeriesConfig::default();
        prop_assert!(growth_bracket(n, x, &cfg).unwrap() > 0.0);
        prop_assert!(growth_bracket(0, x, &cfg).unwrap() < 0.0);
    }

    #[test]
    fn mode_one_never_grows(mu in 0.0f64..20.0, sigma in 0.1f64..0.95) {
        let r0 = solve_r0(sigma, 1e-13).unwrap();
        let p = ModelParams::new(mu, sigma, 0.0).unwrap();
        prop_assert!(growth_rate(1, &p, r0).unwrap().abs() < 1e-13 * mu.max(1.0));
        prop_assert!(growth_rate(0, &p, r0).unwrap() <= 0.0);
    }

    #[test]
    fn thresholds_increase(sigma in 0.1f64..0.95) {
        let r0 = solve_r0(sigma, 1e-13).unwrap();
        let t: Vec<f64> = (2..=12).map(|n| mode_threshold(n, r0).unwrap()).collect();
        prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn first_order_radius_is_positive_and_linear(mu in 0.01f64..20.0, sigma in 0.1f64..0.95) {
        let r1 = |mu: f64| {
            let p = ModelParams::new(mu, sigma, 0.0).unwrap();
            compute_tau_expansion(&p, &build_zeroth(&p).unwrap()).unwrap().r1
        };
        let (a, b) = (r1(mu), r1(1.0));
        prop_assert!(a > 0.0);
        prop_assert!((a - mu * b).abs() <= 1e-13 * a);
    }

    #[test]
    fn bvp_is_linear(n in 0u32..6, alpha in -3.0f64..3.0, bv in -2.0f64..2.0) {
        let solve = |s: f64, v: f64| solve_ln_bvp_fn(n, |r| Ok(s * (1.0 + r * r)), v, 2.5, 128).unwrap().solution;
        let combined = solve(alpha, bv);
        let (u, w) = (solve(1.0, 0.0), solve(0.0, 1.0));
        for i in 0..combined.n_points() {
            let expect = alpha * u.values()[i] + bv * w.values()[i];
            prop_assert!((combined.values()[i] - expect).abs() < 1e-11);
        }
    }
}
