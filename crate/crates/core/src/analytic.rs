//! Closed-form Ornstein–Uhlenbeck laws of the launch chain's continuous
//! limit, the objective values they imply, and the two bias transforms.
//!
//! Every scenario, biased or not, is expressed as one [`OuParams`]:
//! `dX = −θ(X − μ)dt + √α dW`. Objective values are always scored against
//! the true [`SystemParams`], even when the dynamics are driven by an
//! attenuated or surrogate measurement.

use crate::gaussian;
use crate::model::{self, DecisionRule, ModelError, SystemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error("drift rate theta must be positive and finite, got {0}")]
    Theta(f64),
    #[error("diffusion must lie in (0, 1], got {0}")]
    Diffusion(f64),
    #[error("attractor mu must be finite, got {0}")]
    Mu(f64),
    #[error("time must be non-negative and not NaN, got {0}")]
    Time(f64),
    #[error("initial state must be finite, got {0}")]
    InitialState(f64),
    #[error("{name} must be positive and finite, got {value}")]
    Factor { name: &'static str, value: f64 },
    #[error("fraction must lie strictly inside (0, 1), got {0}")]
    Fraction(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    theta: f64,
    diffusion: f64,
    mu: f64,
}

impl OuParams {
    pub fn new(theta: f64, diffusion: f64, mu: f64) -> Result<Self, AnalyticError> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(AnalyticError::Theta(theta));
        }
        if !(diffusion > 0.0 && diffusion <= 1.0) {
            return Err(AnalyticError::Diffusion(diffusion));
        }
        if !mu.is_finite() {
            return Err(AnalyticError::Mu(mu));
        }
        Ok(Self {
            theta,
            diffusion,
            mu,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Stationary variance `α/(2θ)`.
    pub fn stationary_variance(&self) -> f64 {
        self.diffusion / (2.0 * self.theta)
    }

    pub fn time_constant(&self) -> f64 {
        1.0 / self.theta
    }

    pub(crate) fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianDist {
    pub mean: f64,
    pub var: f64,
}

impl GaussianDist {
    /// E[X²]
    pub fn second_moment(&self) -> f64 {
        self.mean * self.mean + self.var
    }
}

/// Measurement bias that shrinks effects by `gamma_r` and standard errors by
/// `gamma_sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateBias {
    gamma_r: f64,
    gamma_sigma: f64,
}

impl UpdateBias {
    pub fn new(gamma_r: f64, gamma_sigma: f64) -> Result<Self, AnalyticError> {
        positive("gamma_r", gamma_r)?;
        positive("gamma_sigma", gamma_sigma)?;
        Ok(Self {
            gamma_r,
            gamma_sigma,
        })
    }

    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }

    pub fn gamma_sigma(&self) -> f64 {
        self.gamma_sigma
    }

    /// Signal-to-noise improvement `γ = γ_σ/γ_r`.
    pub fn gamma(&self) -> f64 {
        self.gamma_sigma / self.gamma_r
    }
}

/// A surrogate objective `optimum − ½·r′·(x − μ)²` measured with standard
/// error `σ′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBias {
    r_prime: f64,
    sigma_prime: f64,
    mu: f64,
}

impl ObjectiveBias {
    pub fn new(r_prime: f64, sigma_prime: f64, mu: f64) -> Result<Self, AnalyticError> {
        positive("r_prime", r_prime)?;
        positive("sigma_prime", sigma_prime)?;
        if !mu.is_finite() {
            return Err(AnalyticError::Mu(mu));
        }
        Ok(Self {
            r_prime,
            sigma_prime,
            mu,
        })
    }

    /// The surrogate with the same curvature as `sys`, a noise level giving
    /// signal-to-noise improvement `gamma`, and optimizer offset `mu`.
    pub fn with_gamma(sys: &SystemParams, gamma: f64, mu: f64) -> Result<Self, AnalyticError> {
        positive("gamma", gamma)?;
        Self::new(sys.r(), sys.sigma() / gamma, mu)
    }

    pub fn r_prime(&self) -> f64 {
        self.r_prime
    }

    pub fn sigma_prime(&self) -> f64 {
        self.sigma_prime
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `γ = (r′/σ′)/(r/σ)`
    pub fn gamma(&self, sys: &SystemParams) -> f64 {
        (self.r_prime / self.sigma_prime) / sys.snr()
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), AnalyticError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(AnalyticError::Factor { name, value })
    }
}

fn check_time(t: f64) -> Result<(), AnalyticError> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(AnalyticError::Time(t))
    }
}

/// OU limit of the unbiased chain: `θ = r·φ(c)/σ`, diffusion `α`, `μ = 0`.
pub fn ou_from_system(sys: &SystemParams, rule: &DecisionRule) -> OuParams {
    OuParams {
        theta: model::linearized_theta(sys, rule),
        diffusion: rule.alpha(),
        mu: 0.0,
    }
}

/// Law of `X_t` started from `x0`.
///
/// Mean `x0·e^{−θt} + μ·(1 − e^{−θt})`, variance `(α/2θ)·(1 − e^{−2θt})`.
/// `t = ∞` gives the stationary law.
pub fn solution_at(t: f64, x0: f64, ou: &OuParams) -> Result<GaussianDist, AnalyticError> {
    check_time(t)?;
    if !x0.is_finite() {
        return Err(AnalyticError::InitialState(x0));
    }
    if t == f64::INFINITY {
        return Ok(stationary(ou));
    }
    let decay = (-ou.theta * t).exp();
    let mean = x0 * decay + ou.mu * -(-ou.theta * t).exp_m1();
    let var = ou.stationary_variance() * -(-2.0 * ou.theta * t).exp_m1();
    Ok(GaussianDist { mean, var })
}

/// `N(μ, α/2θ)`
pub fn stationary(ou: &OuParams) -> GaussianDist {
    GaussianDist {
        mean: ou.mu,
        var: ou.stationary_variance(),
    }
}

/// True expected metric `optimum − ½·r·E[X_t²]` under the dynamics `ou`.
pub fn expected_metric_at(
    t: f64,
    x0: f64,
    sys: &SystemParams,
    ou: &OuParams,
) -> Result<f64, AnalyticError> {
    let law = solution_at(t, x0, ou)?;
    Ok(sys.optimum() - 0.5 * sys.r() * law.second_moment())
}

/// Long-run optimality gap `½·r·(μ² + α/2θ)` of the true objective under
/// the dynamics `ou`.
pub fn stationary_true_gap(sys: &SystemParams, ou: &OuParams) -> f64 {
    0.5 * sys.r() * stationary(ou).second_moment()
}

/// Long-run optimality gap of the unbiased chain, `(σ/4)·Φ̄(c)/φ(c)`.
pub fn stationary_gap(sys: &SystemParams, rule: &DecisionRule) -> f64 {
    0.25 * sys.sigma() * gaussian::mills_ratio_raw(rule.c())
}

/// Dynamics under update bias: the measured system becomes
/// `(r/γ_r, σ/γ_σ)` and the drift rate becomes `γ·θ`. The diffusion stays `α`.
pub fn apply_update_bias(
    sys: &SystemParams,
    rule: &DecisionRule,
    bias: &UpdateBias,
) -> Result<(SystemParams, OuParams), AnalyticError> {
    let measured = SystemParams::new(
        sys.r() / bias.gamma_r,
        sys.sigma() / bias.gamma_sigma,
        sys.optimum(),
    )?;
    let base = ou_from_system(sys, rule);
    Ok((measured, base.with_theta(bias.gamma() * base.theta)))
}

/// Dynamics when launches are decided on a surrogate objective: drift rate
/// `γ·θ` and attractor `μ`.
pub fn apply_objective_bias(
    sys: &SystemParams,
    rule: &DecisionRule,
    bias: &ObjectiveBias,
) -> OuParams {
    let base = ou_from_system(sys, rule);
    OuParams {
        theta: bias.gamma(sys) * base.theta,
        diffusion: base.diffusion,
        mu: bias.mu,
    }
}

/// Whether a surrogate with offset `mu` and signal-to-noise improvement
/// `gamma` ends closer to the optimum than the unbiased baseline:
/// `μ² < (α/2θ)·(1 − 1/γ)`. Ties are not improvements.
pub fn improvement_condition(mu: f64, ou_base: &OuParams, gamma: f64) -> bool {
    mu * mu < ou_base.stationary_variance() * (1.0 - 1.0 / gamma)
}

/// Largest offset `μ*(γ) = √((α/2θ)(1 − 1/γ))` a surrogate may carry and
/// still improve on the baseline. `None` when `γ ≤ 1`.
pub fn frontier_mu(ou_base: &OuParams, gamma: f64) -> Option<f64> {
    (gamma > 1.0).then(|| (ou_base.stationary_variance() * (1.0 - 1.0 / gamma)).sqrt())
}

/// Time for the mean displacement `x0 − μ` to decay to `fraction` of its
/// initial value, `−ln(fraction)/θ`.
pub fn time_to_fraction(ou: &OuParams, fraction: f64) -> Result<f64, AnalyticError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(AnalyticError::Fraction(fraction));
    }
    Ok(-fraction.ln() / ou.theta)
}
