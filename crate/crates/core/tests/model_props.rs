use launchsde::model::{
    self, exact_drift, exact_step_variance, linearized_theta, step_distribution, true_effect,
    DecisionRule, Direction, EffectMode, SystemParams,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = (SystemParams, DecisionRule)> {
    (0.01f64..10.0, 0.1f64..1000.0, 0.001f64..=0.5).prop_map(|(r, sigma, alpha)| {
        (
            SystemParams::new(r, sigma, 0.0).unwrap(),
            DecisionRule::from_alpha(alpha).unwrap(),
        )
    })
}

fn mode() -> impl Strategy<Value = EffectMode> {
    prop_oneof![Just(EffectMode::Gradient), Just(EffectMode::Exact)]
}

proptest! {
    #[test]
    fn step_distribution_is_a_distribution((sys, rule) in params(), u in -50.0f64..50.0, m in mode()) {
        let x = u * sys.sigma() / sys.r();
        let d = step_distribution(x, m, &sys, &rule).unwrap();
        prop_assert!((d.p_down + d.p_up + d.p_stay - 1.0).abs() <= 1e-15);
        prop_assert!((0.0..=0.5).contains(&d.p_down));
        prop_assert!((0.0..=0.5).contains(&d.p_up));
        prop_assert!((0.0..=1.0).contains(&d.p_stay));
    }

    #[test]
    fn drift_is_odd_and_saturates((sys, rule) in params(), u in -50.0f64..50.0) {
        let x = u * sys.sigma() / sys.r();
        let d = exact_drift(x, &sys, &rule).unwrap();
        prop_assert_eq!(exact_drift(-x, &sys, &rule).unwrap(), -d);
        prop_assert!(d.abs() <= 0.5);
        if x > 0.0 {
            prop_assert!(d <= 0.0);
        }
    }

    #[test]
    fn exact_effect_trails_gradient_by_half_r(
        (sys, _rule) in params(),
        x in -1e4f64..1e4,
        up in any::<bool>(),
    ) {
        let dir = if up { Direction::Up } else { Direction::Down };
        let g = true_effect(x, dir, EffectMode::Gradient, &sys).unwrap();
        let e = true_effect(x, dir, EffectMode::Exact, &sys).unwrap();
        let tol = 1e-12 * (g.abs() + sys.r());
        prop_assert!((g - e - 0.5 * sys.r()).abs() <= tol, "{g} {e}");
    }

    #[test]
    fn exact_effect_is_a_metric_difference((sys, _rule) in params(), x in -100.0f64..100.0, up in any::<bool>()) {
        let dir = if up { Direction::Up } else { Direction::Down };
        let e = true_effect(x, dir, EffectMode::Exact, &sys).unwrap();
        let direct = sys.expected_metric(x + dir.sign()) - sys.expected_metric(x);
        prop_assert!((e - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn linearization_near_optimum(
        (sys, rule) in params(),
        u in -0.01f64..=0.01,
    ) {
        let x = u * sys.sigma() / sys.r();
        let theta = linearized_theta(&sys, &rule);
        let drift = exact_drift(x, &sys, &rule).unwrap();
        prop_assert!((drift + theta * x).abs() <= 0.01 * theta * x.abs() + 1e-300);
        let var = exact_step_variance(x, &sys, &rule).unwrap();
        prop_assert!((var - rule.alpha()).abs() <= 0.02 * rule.alpha());
    }

    #[test]
    fn theta_scales_inversely_with_sigma((sys, rule) in params()) {
        let doubled = SystemParams::new(sys.r(), 2.0 * sys.sigma(), 0.0).unwrap();
        let ratio = linearized_theta(&sys, &rule) / linearized_theta(&doubled, &rule);
        prop_assert!((ratio - 2.0).abs() <= 1e-14);
    }
}

/// Brute-force sweep backing the linearization tolerances: the worst
/// relative drift error for `|u| ≤ 0.01` stays well inside 1 %, and inside
/// `2|u|` out to `|u| = 0.1`.
#[test]
fn linearization_tolerances_hold_on_dense_sweep() {
    let sys = SystemParams::new(1.0, 100.0, 0.0).unwrap();
    for alpha in [0.01, 0.05, 0.1, 0.2, 0.4, 0.5] {
        let rule = DecisionRule::from_alpha(alpha).unwrap();
        let theta = linearized_theta(&sys, &rule);
        for i in 1..=1000 {
            let u = 0.1 * i as f64 / 1000.0;
            let x = u * sys.sigma() / sys.r();
            let rel = (model::exact_drift(x, &sys, &rule).unwrap() + theta * x).abs() / (theta * x);
            assert!(rel <= 2.0 * u, "alpha={alpha} u={u} rel={rel}");
            if u <= 0.01 {
                assert!(rel <= 0.01, "alpha={alpha} u={u} rel={rel}");
            }
        }
    }
}
