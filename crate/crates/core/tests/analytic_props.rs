use launchsde::analytic::{
    self, apply_objective_bias, apply_update_bias, expected_metric_at, improvement_condition,
    ou_from_system, solution_at, stationary_gap, stationary_true_gap, ObjectiveBias, OuParams,
    UpdateBias,
};
use launchsde::model::{DecisionRule, SystemParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = (SystemParams, DecisionRule)> {
    (0.01f64..10.0, 0.1f64..1000.0, 0.001f64..=0.5).prop_map(|(r, sigma, alpha)| {
        (
            SystemParams::new(r, sigma, 0.0).unwrap(),
            DecisionRule::from_alpha(alpha).unwrap(),
        )
    })
}

fn sys100() -> SystemParams {
    SystemParams::new(1.0, 100.0, 0.0).unwrap()
}

fn rule(alpha: f64) -> DecisionRule {
    DecisionRule::from_alpha(alpha).unwrap()
}

#[test]
fn mills_form_of_gap_matches_drift_form() {
    for r in [0.01, 0.1, 1.0, 10.0, 100.0] {
        for sigma in [0.5, 1.0, 10.0, 100.0, 1000.0] {
            for alpha in [0.01, 0.05, 0.1, 0.25, 0.5] {
                let sys = SystemParams::new(r, sigma, 0.0).unwrap();
                let rule = rule(alpha);
                let ou = ou_from_system(&sys, &rule);
                let drift_form = 0.25 * r * alpha / ou.theta();
                let mills_form = stationary_gap(&sys, &rule);
                assert!(
                    ((mills_form - drift_form) / drift_form).abs() <= 1e-12,
                    "r={r} sigma={sigma} alpha={alpha}"
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn variance_grows_to_stationary((sys, rule) in params(), k in 0.0f64..20.0, dk in 0.0f64..5.0) {
        let ou = ou_from_system(&sys, &rule);
        let t = k / ou.theta();
        let a = solution_at(t, 0.0, &ou).unwrap().var;
        let b = solution_at(t + dk / ou.theta(), 0.0, &ou).unwrap().var;
        prop_assert!(a <= b);
        prop_assert!(b <= ou.stationary_variance());
    }

    #[test]
    fn expected_metric_moves_toward_stationary(
        (sys, rule) in params(),
        spread in prop_oneof![0.01f64..0.9, 1.1f64..100.0],
        k in 0.01f64..5.0,
    ) {
        let ou = ou_from_system(&sys, &rule);
        let x0 = (spread * ou.stationary_variance()).sqrt();
        let t1 = k / ou.theta();
        let t2 = 1.5 * t1;
        let m1 = expected_metric_at(t1, x0, &sys, &ou).unwrap();
        let m2 = expected_metric_at(t2, x0, &sys, &ou).unwrap();
        if spread > 1.0 {
            prop_assert!(m2 > m1);
        } else {
            prop_assert!(m2 < m1);
        }
    }

    #[test]
    fn optimum_shifts_metric((sys, rule) in params(), opt in -1e3f64..1e3, t in 0.0f64..1e5, x0 in -50.0f64..50.0) {
        let shifted = SystemParams::new(sys.r(), sys.sigma(), opt).unwrap();
        let ou = ou_from_system(&sys, &rule);
        let a = expected_metric_at(t, x0, &sys, &ou).unwrap();
        let b = expected_metric_at(t, x0, &shifted, &ou).unwrap();
        prop_assert!((b - a - opt).abs() <= 1e-9 * (1.0 + a.abs() + opt.abs()));
    }

    #[test]
    fn equal_factors_are_neutral((sys, rule) in params(), g in 0.01f64..100.0) {
        let (measured, ou) = apply_update_bias(&sys, &rule, &UpdateBias::new(g, g).unwrap()).unwrap();
        let base = ou_from_system(&sys, &rule);
        prop_assert_eq!(ou.theta(), base.theta());
        prop_assert_eq!(ou.diffusion(), base.diffusion());
        prop_assert!((measured.snr() / sys.snr() - 1.0).abs() <= 1e-14);
        prop_assert_eq!(stationary_true_gap(&sys, &ou), stationary_true_gap(&sys, &base));
    }

    #[test]
    fn stationary_gap_decreases_with_threshold(a in 0.001f64..0.5, b in 0.001f64..0.5) {
        prop_assume!(a != b);
        let (strict, lax) = (a.min(b), a.max(b));
        prop_assert!(stationary_gap(&sys100(), &rule(strict)) < stationary_gap(&sys100(), &rule(lax)));
        let ts = ou_from_system(&sys100(), &rule(strict)).theta();
        let tl = ou_from_system(&sys100(), &rule(lax)).theta();
        prop_assert!(ts < tl);
    }
}

#[test]
fn update_bias_law() {
    let sys = sys100();
    let rule = rule(0.05);
    let base = ou_from_system(&sys, &rule);
    let base_gap = stationary_gap(&sys, &rule);
    let (_, better) = apply_update_bias(&sys, &rule, &UpdateBias::new(2.0, 4.0).unwrap()).unwrap();
    assert!((better.theta() / base.theta() - 2.0).abs() <= 1e-12);
    assert!((stationary_true_gap(&sys, &better) / base_gap - 0.5).abs() <= 1e-12);
    let (_, worse) = apply_update_bias(&sys, &rule, &UpdateBias::new(4.0, 2.0).unwrap()).unwrap();
    assert!((stationary_true_gap(&sys, &worse) / base_gap - 2.0).abs() <= 1e-12);
}

/// The improvement flag against the sign of the gap difference, with the
/// biased gap evaluated independently as the `t → ∞` expected metric.
#[test]
fn improvement_condition_matches_gap_sign_on_grid() {
    let sys = sys100();
    let rule = rule(0.05);
    let base = ou_from_system(&sys, &rule);
    let base_gap = -expected_metric_at(f64::INFINITY, 0.0, &sys, &base).unwrap();
    let mut improving = 0;
    for i in 0..20 {
        let mu = -8.0 + 16.0 * i as f64 / 19.0;
        for j in 0..20 {
            let gamma = 0.25 * 1.25f64.powi(j);
            let ou = apply_objective_bias(
                &sys,
                &rule,
                &ObjectiveBias::with_gamma(&sys, gamma, mu).unwrap(),
            );
            let gap = -expected_metric_at(f64::INFINITY, 0.0, &sys, &ou).unwrap();
            let diff = base_gap - gap;
            if diff.abs() < 1e-9 * base_gap {
                continue;
            }
            let predicted = improvement_condition(mu, &base, gamma);
            assert_eq!(predicted, diff > 0.0, "mu={mu} gamma={gamma}");
            improving += predicted as usize;
        }
    }
    assert!(improving > 20, "grid should straddle the frontier");
}

fn biased_gap(sys: &SystemParams, rule: &DecisionRule, mu: f64, gamma: f64) -> f64 {
    let ou = apply_objective_bias(
        sys,
        rule,
        &ObjectiveBias::with_gamma(sys, gamma, mu).unwrap(),
    );
    stationary_true_gap(sys, &ou)
}

#[test]
fn gap_is_quadratic_in_mu_and_affine_in_inverse_gamma() {
    for r in [0.5, 1.0, 3.0] {
        let sys = SystemParams::new(r, 100.0, 0.0).unwrap();
        let rule = rule(0.05);
        let h = 1e-2;
        for mu in [-3.0, 0.0, 2.0, 7.0] {
            let g = |m| biased_gap(&sys, &rule, m, 2.0);
            let curvature = (g(mu + h) - 2.0 * g(mu) + g(mu - h)) / (h * h);
            assert!((curvature - r).abs() <= 1e-6, "r={r} mu={mu}: {curvature}");
        }
        // Affine in s = 1/γ: equal steps in s give equal steps in the gap.
        let gs: Vec<f64> = (1..=6)
            .map(|k| biased_gap(&sys, &rule, 1.5, 1.0 / (0.25 * k as f64)))
            .collect();
        let step = gs[1] - gs[0];
        for w in gs.windows(2) {
            assert!(((w[1] - w[0]) - step).abs() <= 1e-12 * gs[0].abs().max(1.0));
        }
    }
}

#[test]
fn frontier_at_gamma_two() {
    let base = OuParams::new(0.0010311, 0.05, 0.0).unwrap();
    let mu_star = analytic::frontier_mu(&base, 2.0).unwrap();
    assert!((mu_star - 3.482).abs() <= 1e-3);
    assert!(improvement_condition(3.0, &base, 2.0));
    assert!(!improvement_condition(4.0, &base, 2.0));
}
