//! The discrete launch chain.
//!
//! Each period proposes a unit move of the parameter, down or up with
//! probability ½ each. The move is measured by an experiment with standard
//! error σ and ships only when its z-score clears the one-sided threshold
//! `c`. The true objective is `optimum − ½·r·x²`.

use crate::gaussian::{self, GaussianError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("curvature r must be positive and finite, got {0}")]
    Curvature(f64),
    #[error("standard error sigma must be positive and finite, got {0}")]
    StandardError(f64),
    #[error("optimum must be finite, got {0}")]
    Optimum(f64),
    #[error("test level alpha must lie in (0, 0.5], got {0}")]
    Level(f64),
    #[error("parameter value must be finite, got {0}")]
    State(f64),
    #[error("attractor must be finite, got {0}")]
    Center(f64),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

/// The true system: objective curvature, experiment noise and the value of
/// the objective at its optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    r: f64,
    sigma: f64,
    optimum: f64,
}

impl SystemParams {
    pub fn new(r: f64, sigma: f64, optimum: f64) -> Result<Self, ModelError> {
        if !(r.is_finite() && r > 0.0) {
            return Err(ModelError::Curvature(r));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(ModelError::StandardError(sigma));
        }
        if !optimum.is_finite() {
            return Err(ModelError::Optimum(optimum));
        }
        Ok(Self { r, sigma, optimum })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn optimum(&self) -> f64 {
        self.optimum
    }

    /// Expected metric at parameter value `x`.
    pub fn expected_metric(&self, x: f64) -> f64 {
        self.optimum - 0.5 * self.r * x * x
    }

    /// Signal-to-noise ratio r/σ.
    pub fn snr(&self) -> f64 {
        self.r / self.sigma
    }
}

/// One-sided launch rule at level `alpha` with z-threshold `c = Φ̄⁻¹(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    alpha: f64,
    c: f64,
}

impl DecisionRule {
    pub fn from_alpha(alpha: f64) -> Result<Self, ModelError> {
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(ModelError::Level(alpha));
        }
        let c = gaussian::inv_survival(alpha)?.value();
        Ok(Self {
            alpha,
            c: c.max(0.0),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectMode {
    /// First-order effect of a unit move, `−d·r·x`.
    #[default]
    Gradient,
    /// Exact finite difference of the quadratic objective, `−d·r·x − r/2`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Down,
    Up,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Down => -1.0,
            Direction::Up => 1.0,
        }
    }
}

/// Law of a single step `X_{t+1} − x_t ∈ {−1, +1, 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    pub p_down: f64,
    pub p_up: f64,
    pub p_stay: f64,
}

impl StepDistribution {
    pub fn mean(&self) -> f64 {
        self.p_up - self.p_down
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.p_down + self.p_up - m * m
    }
}

/// Launch dynamics of a chain whose measured objective is
/// `−½·r·(x − center)²`, observed with standard error `sigma`.
///
/// The baseline chain measures the true objective (center 0). The biased
/// scenarios swap in attenuated or surrogate measurements while the true
/// objective used for scoring stays in [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainDynamics {
    r: f64,
    sigma: f64,
    center: f64,
    mode: EffectMode,
    rule: DecisionRule,
}

impl ChainDynamics {
    pub fn new(
        r: f64,
        sigma: f64,
        center: f64,
        mode: EffectMode,
        rule: DecisionRule,
    ) -> Result<Self, ModelError> {
        if !(r.is_finite() && r > 0.0) {
            return Err(ModelError::Curvature(r));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(ModelError::StandardError(sigma));
        }
        if !center.is_finite() {
            return Err(ModelError::Center(center));
        }
        Ok(Self {
            r,
            sigma,
            center,
            mode,
            rule,
        })
    }

    pub fn baseline(sys: &SystemParams, rule: DecisionRule, mode: EffectMode) -> Self {
        Self {
            r: sys.r,
            sigma: sys.sigma,
            center: 0.0,
            mode,
            rule,
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn mode(&self) -> EffectMode {
        self.mode
    }

    pub fn rule(&self) -> DecisionRule {
        self.rule
    }

    /// Linearized drift rate `r·φ(c)/σ` of these dynamics.
    pub fn theta(&self) -> f64 {
        self.r * gaussian::pdf_raw(self.rule.c) / self.sigma
    }

    pub fn true_effect(&self, x: f64, direction: Direction) -> Result<f64, ModelError> {
        check_state(x)?;
        Ok(self.effect_raw(x, direction))
    }

    pub fn launch_probability(&self, x: f64, direction: Direction) -> Result<f64, ModelError> {
        check_state(x)?;
        Ok(self.launch_raw(x, direction))
    }

    pub fn step_distribution(&self, x: f64) -> Result<StepDistribution, ModelError> {
        check_state(x)?;
        Ok(self.step_raw(x))
    }

    fn effect_raw(&self, x: f64, direction: Direction) -> f64 {
        quadratic_effect(self.r, x - self.center, direction, self.mode)
    }

    fn launch_raw(&self, x: f64, direction: Direction) -> f64 {
        gaussian::survival_raw(self.rule.c - self.effect_raw(x, direction) / self.sigma)
    }

    pub(crate) fn step_raw(&self, x: f64) -> StepDistribution {
        let p_down = 0.5 * self.launch_raw(x, Direction::Down);
        let p_up = 0.5 * self.launch_raw(x, Direction::Up);
        StepDistribution {
            p_down,
            p_up,
            p_stay: 1.0 - p_down - p_up,
        }
    }
}

fn quadratic_effect(r: f64, offset: f64, direction: Direction, mode: EffectMode) -> f64 {
    let linear = -direction.sign() * r * offset;
    match mode {
        EffectMode::Gradient => linear,
        EffectMode::Exact => linear - 0.5 * r,
    }
}

fn check_state(x: f64) -> Result<(), ModelError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ModelError::State(x))
    }
}

/// Change in the expected metric from moving `x` one unit in `direction`.
pub fn true_effect(
    x: f64,
    direction: Direction,
    mode: EffectMode,
    sys: &SystemParams,
) -> Result<f64, ModelError> {
    check_state(x)?;
    Ok(quadratic_effect(sys.r, x, direction, mode))
}

/// Probability that a proposed move in `direction` launches.
pub fn launch_probability(
    x: f64,
    direction: Direction,
    mode: EffectMode,
    sys: &SystemParams,
    rule: &DecisionRule,
) -> Result<f64, ModelError> {
    ChainDynamics::baseline(sys, *rule, mode).launch_probability(x, direction)
}

pub fn step_distribution(
    x: f64,
    mode: EffectMode,
    sys: &SystemParams,
    rule: &DecisionRule,
) -> Result<StepDistribution, ModelError> {
    ChainDynamics::baseline(sys, *rule, mode).step_distribution(x)
}

/// Exact one-step mean displacement under gradient-mode effects,
/// `½Φ̄(c + rx/σ) − ½Φ̄(c − rx/σ)`.
pub fn exact_drift(x: f64, sys: &SystemParams, rule: &DecisionRule) -> Result<f64, ModelError> {
    Ok(step_distribution(x, EffectMode::Gradient, sys, rule)?.mean())
}

/// Exact one-step variance under gradient-mode effects.
pub fn exact_step_variance(
    x: f64,
    sys: &SystemParams,
    rule: &DecisionRule,
) -> Result<f64, ModelError> {
    Ok(step_distribution(x, EffectMode::Gradient, sys, rule)?.variance())
}

/// Drift rate of the continuous limit, `θ = r·φ(c)/σ`.
pub fn linearized_theta(sys: &SystemParams, rule: &DecisionRule) -> f64 {
    ChainDynamics::baseline(sys, *rule, EffectMode::Gradient).theta()
}

#[cfg(test)]
mod tests {
    use super::*;

    // scipy.stats.norm oracle values
    const C_05: f64 = 1.644_853_626_951_472_9;
    const C_40: f64 = 0.253_347_103_135_799_7;
    const SF_C05_MINUS_1: f64 = 0.259_511_022_841_444;
    const SF_C05_PLUS_1: f64 = 0.004_086_313_060_033_236_5;
    const THETA_05: f64 = 0.001_031_356_403_753_712_7;
    const THETA_40: f64 = 0.003_863_425_334_968_605_6;

    fn sys(r: f64, sigma: f64) -> SystemParams {
        SystemParams::new(r, sigma, 0.0).unwrap()
    }

    fn rule(alpha: f64) -> DecisionRule {
        DecisionRule::from_alpha(alpha).unwrap()
    }

    #[test]
    fn rule_threshold() {
        assert!((rule(0.05).c() - C_05).abs() < 1e-12);
        assert!((rule(0.40).c() - C_40).abs() < 1e-12);
        assert_eq!(rule(0.5).c(), 0.0);
        assert!((gaussian::survival_raw(rule(0.05).c()) - 0.05).abs() < 1e-10);
    }

    #[test]
    fn invalid_params_rejected() {
        assert_eq!(
            SystemParams::new(0.0, 1.0, 0.0),
            Err(ModelError::Curvature(0.0))
        );
        assert_eq!(
            SystemParams::new(1.0, -1.0, 0.0),
            Err(ModelError::StandardError(-1.0))
        );
        assert!(SystemParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(DecisionRule::from_alpha(0.6).is_err());
        assert!(DecisionRule::from_alpha(0.0).is_err());
        let s = sys(1.0, 1.0);
        assert!(exact_drift(f64::INFINITY, &s, &rule(0.05)).is_err());
    }

    #[test]
    fn true_effect_examples() {
        let s = sys(1.0, 100.0);
        let g = EffectMode::Gradient;
        assert_eq!(true_effect(5.0, Direction::Down, g, &s).unwrap(), 5.0);
        let s3 = sys(3.7, 1.0);
        assert_eq!(true_effect(0.0, Direction::Up, g, &s3).unwrap(), 0.0);
        let exact = true_effect(5.0, Direction::Down, EffectMode::Exact, &s).unwrap();
        let brute = s.expected_metric(4.0) - s.expected_metric(5.0);
        assert_eq!(exact, 4.5);
        assert_eq!(exact, brute);
    }

    #[test]
    fn exact_effect_is_the_finite_difference() {
        let s = sys(0.7, 3.0);
        for i in -20..=20 {
            let x = 0.37 * i as f64;
            for d in [Direction::Down, Direction::Up] {
                let fd = s.expected_metric(x + d.sign()) - s.expected_metric(x);
                let e = true_effect(x, d, EffectMode::Exact, &s).unwrap();
                assert!((e - fd).abs() < 1e-12);
                let g = true_effect(x, d, EffectMode::Gradient, &s).unwrap();
                assert!((g - e - 0.35).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn launch_probability_examples() {
        let s = sys(1.0, 100.0);
        let g = EffectMode::Gradient;
        for d in [Direction::Down, Direction::Up] {
            let p = launch_probability(0.0, d, g, &s, &rule(0.05)).unwrap();
            assert!((p - 0.05).abs() < 1e-12);
        }
        // rx/σ = 1
        let down = launch_probability(100.0, Direction::Down, g, &s, &rule(0.05)).unwrap();
        let up = launch_probability(100.0, Direction::Up, g, &s, &rule(0.05)).unwrap();
        assert!((down - SF_C05_MINUS_1).abs() < 1e-12);
        assert!((up - SF_C05_PLUS_1).abs() < 1e-12);
    }

    #[test]
    fn step_distribution_examples() {
        let s = sys(1.0, 100.0);
        let g = EffectMode::Gradient;
        let at0 = step_distribution(0.0, g, &s, &rule(0.05)).unwrap();
        assert!((at0.p_down - 0.025).abs() < 1e-12);
        assert!((at0.p_up - 0.025).abs() < 1e-12);
        assert!((at0.p_stay - 0.95).abs() < 1e-12);

        let at1 = step_distribution(100.0, g, &s, &rule(0.05)).unwrap();
        assert!((at1.p_down - 0.1298).abs() < 1e-4);
        assert!((at1.p_up - 0.0021).abs() < 1e-4);

        let far = step_distribution(1e6, g, &s, &rule(0.05)).unwrap();
        assert_eq!(far.p_down, 0.5);
        assert_eq!(far.p_up, 0.0);
    }

    #[test]
    fn drift_examples() {
        let s = sys(1.0, 100.0);
        let r05 = rule(0.05);
        assert_eq!(exact_drift(0.0, &s, &r05).unwrap(), 0.0);
        let d = exact_drift(1.0, &s, &r05).unwrap();
        assert!(((d + THETA_05) / THETA_05).abs() < 1e-4);
        let sat = exact_drift(100.0, &s, &r05).unwrap();
        let expected = 0.5 * SF_C05_PLUS_1 - 0.5 * SF_C05_MINUS_1;
        assert!((sat - expected).abs() < 1e-12);
        assert!((sat + 0.1277).abs() < 1e-4);
    }

    #[test]
    fn variance_examples() {
        let s = sys(1.0, 100.0);
        assert!((exact_step_variance(0.0, &s, &rule(0.05)).unwrap() - 0.05).abs() < 1e-12);
        assert!((exact_step_variance(0.0, &s, &rule(0.40)).unwrap() - 0.40).abs() < 1e-12);
        let v = exact_step_variance(100.0, &s, &rule(0.05)).unwrap();
        let pd = 0.5 * SF_C05_MINUS_1;
        let pu = 0.5 * SF_C05_PLUS_1;
        assert!((v - (pd + pu - (pu - pd).powi(2))).abs() < 1e-12);
        assert!((v - 0.1156).abs() < 2e-4);
    }

    #[test]
    fn theta_examples() {
        assert!((linearized_theta(&sys(1.0, 100.0), &rule(0.05)) - THETA_05).abs() < 1e-15);
        assert!((linearized_theta(&sys(1.0, 100.0), &rule(0.40)) - THETA_40).abs() < 1e-15);
        let t1 = linearized_theta(&sys(1.0, 100.0), &rule(0.05));
        let t2 = linearized_theta(&sys(1.0, 200.0), &rule(0.05));
        assert!((t1 / t2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn centered_dynamics_shift_the_state() {
        let r = rule(0.1);
        let shifted = ChainDynamics::new(2.0, 5.0, 3.0, EffectMode::Gradient, r).unwrap();
        let base = ChainDynamics::new(2.0, 5.0, 0.0, EffectMode::Gradient, r).unwrap();
        for x in [-4.0, 0.0, 2.5, 9.0] {
            assert_eq!(
                shifted.step_distribution(x + 3.0).unwrap(),
                base.step_distribution(x).unwrap()
            );
        }
    }
}
