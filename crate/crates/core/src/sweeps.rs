//! Parameter sweeps over launch thresholds and the two bias scenarios.
//!
//! Cells are stored row-major over the axes (the last axis varies fastest)
//! and every cell is a direct evaluation of the `analytic` functions, so any
//! single cell can be reproduced by calling them with the cell coordinates.

use crate::analytic::{self, AnalyticError, ObjectiveBias, UpdateBias};
use crate::model::{DecisionRule, EffectMode, ModelError, SystemParams};
use crate::montecarlo::{self, SimError, SimSpec};
use serde::{Deserialize, Serialize};

/// Default test levels, from lax to strict.
pub const DEFAULT_ALPHAS: [f64; 5] = [0.40, 0.20, 0.10, 0.05, 0.01];

/// Samples used to locate a sign change before bisection.
const CROSSOVER_SCAN_POINTS: usize = 256;
const BISECTION_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("grid `{0}` is empty")]
    EmptyGrid(&'static str),
    #[error("horizons must be non-negative and finite, got {0}")]
    Horizon(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Threshold,
    UpdateBias,
    ObjectiveFrontier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Simulated,
}

/// Effect of a bias on the long-run true gap relative to the unbiased chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annotation {
    Improve,
    Neutral,
    Worsen,
}

impl Annotation {
    pub fn name(self) -> &'static str {
        match self {
            Annotation::Improve => "improve",
            Annotation::Neutral => "neutral",
            Annotation::Worsen => "worsen",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    /// One coordinate per axis.
    pub coords: Vec<f64>,
    /// Drift rate of the dynamics in this cell.
    pub theta: f64,
    pub time_constant: f64,
    /// Long-run gap of the true objective.
    pub stationary_gap: f64,
    /// Expected true metric at each horizon of the sweep.
    pub e_metric: Vec<f64>,
    pub gamma: Option<f64>,
    pub improves: Option<bool>,
    pub annotation: Option<Annotation>,
    /// Frontier offset `μ*(γ)` for the cell's γ, when `γ > 1`.
    pub frontier_mu: Option<f64>,
}

/// Where the stricter of two rules overtakes the laxer one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Crossover {
    At { t: f64 },
    NoneInRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub strict_alpha: f64,
    pub lax_alpha: f64,
    pub crossover: Crossover,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub provenance: Provenance,
    pub axes: Vec<SweepAxis>,
    pub horizons: Vec<f64>,
    pub cells: Vec<SweepCell>,
    pub crossovers: Vec<CrossoverRow>,
}

impl SweepResult {
    /// Number of cells implied by the axes.
    pub fn grid_len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Cell at the given per-axis indices.
    pub fn cell(&self, index: &[usize]) -> Option<&SweepCell> {
        if index.len() != self.axes.len() {
            return None;
        }
        let mut flat = 0;
        for (axis, &i) in self.axes.iter().zip(index) {
            if i >= axis.values.len() {
                return None;
            }
            flat = flat * axis.values.len() + i;
        }
        self.cells.get(flat)
    }
}

fn non_empty(name: &'static str, grid: &[f64]) -> Result<(), SweepError> {
    if grid.is_empty() {
        Err(SweepError::EmptyGrid(name))
    } else {
        Ok(())
    }
}

fn check_horizons(horizons: &[f64]) -> Result<(), SweepError> {
    match horizons.iter().find(|h| !(h.is_finite() && **h >= 0.0)) {
        Some(&h) => Err(SweepError::Horizon(h)),
        None => Ok(()),
    }
}

/// `points` log-spaced horizons from 0.1 to 100 time constants of the
/// fastest rule in `alphas`.
pub fn default_horizons(
    sys: &SystemParams,
    alphas: &[f64],
    points: usize,
) -> Result<Vec<f64>, SweepError> {
    non_empty("alpha", alphas)?;
    let mut theta_max = 0.0_f64;
    for &a in alphas {
        let rule = DecisionRule::from_alpha(a)?;
        theta_max = theta_max.max(analytic::ou_from_system(sys, &rule).theta());
    }
    let (lo, hi) = ((0.1 / theta_max).ln(), (100.0 / theta_max).ln());
    let n = points.max(2);
    Ok((0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

/// Speed against final state across test levels.
///
/// Each cell holds `θ`, `1/θ`, the expected metric at every horizon and the
/// stationary gap. Every pair of levels gets a crossover row: the time at
/// which the stricter rule's expected metric rises above the laxer one's
/// within the horizon range, or [`Crossover::NoneInRange`].
pub fn threshold_sweep(
    alphas: &[f64],
    horizons: &[f64],
    sys: &SystemParams,
    x0: f64,
) -> Result<SweepResult, SweepError> {
    non_empty("alpha", alphas)?;
    non_empty("horizon", horizons)?;
    check_horizons(horizons)?;
    let mut cells = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let rule = DecisionRule::from_alpha(alpha)?;
        let ou = analytic::ou_from_system(sys, &rule);
        let e_metric = horizons
            .iter()
            .map(|&t| analytic::expected_metric_at(t, x0, sys, &ou))
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(SweepCell {
            coords: vec![alpha],
            theta: ou.theta(),
            time_constant: ou.time_constant(),
            stationary_gap: analytic::stationary_gap(sys, &rule),
            e_metric,
            gamma: None,
            improves: None,
            annotation: None,
            frontier_mu: None,
        });
    }

    let (t_lo, t_hi) = horizon_range(horizons);
    let mut crossovers = Vec::new();
    for_each_pair(alphas, |strict, lax| {
        let s = analytic::ou_from_system(sys, &DecisionRule::from_alpha(strict)?);
        let l = analytic::ou_from_system(sys, &DecisionRule::from_alpha(lax)?);
        let diff = |t: f64| -> Result<f64, SweepError> {
            Ok(analytic::expected_metric_at(t, x0, sys, &s)?
                - analytic::expected_metric_at(t, x0, sys, &l)?)
        };
        crossovers.push(CrossoverRow {
            strict_alpha: strict,
            lax_alpha: lax,
            crossover: find_crossover(diff, t_lo, t_hi)?,
        });
        Ok(())
    })?;

    Ok(SweepResult {
        kind: SweepKind::Threshold,
        provenance: Provenance::Analytic,
        axes: vec![SweepAxis {
            name: "alpha".into(),
            values: alphas.to_vec(),
        }],
        horizons: horizons.to_vec(),
        cells,
        crossovers,
    })
}

/// Simulation settings for [`threshold_sweep_simulated`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedSweep {
    pub replicas: usize,
    pub seed: u64,
    pub effect_mode: EffectMode,
}

/// [`threshold_sweep`] with the expected metric measured on simulated
/// ensembles. Horizons are rounded to whole steps and deduplicated; `θ`,
/// `1/θ` and the stationary gap stay analytic. Crossovers are located by
/// linear interpolation between sampled horizons.
pub fn threshold_sweep_simulated(
    alphas: &[f64],
    horizons: &[f64],
    sys: &SystemParams,
    x0: f64,
    sim: &SimulatedSweep,
) -> Result<SweepResult, SweepError> {
    non_empty("alpha", alphas)?;
    non_empty("horizon", horizons)?;
    check_horizons(horizons)?;
    let mut steps: Vec<u64> = horizons.iter().map(|h| h.round() as u64).collect();
    steps.sort_unstable();
    steps.dedup();
    let spec = SimSpec {
        steps: *steps.last().unwrap_or(&0),
        replicas: sim.replicas,
        seed: sim.seed,
        record_at: steps.clone(),
        effect_mode: sim.effect_mode,
        x0,
    };
    let mut cells = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let rule = DecisionRule::from_alpha(alpha)?;
        let ou = analytic::ou_from_system(sys, &rule);
        let stats = montecarlo::simulate(&spec, sys, &rule)?;
        cells.push(SweepCell {
            coords: vec![alpha],
            theta: ou.theta(),
            time_constant: ou.time_constant(),
            stationary_gap: analytic::stationary_gap(sys, &rule),
            e_metric: stats.rows.iter().map(|row| row.e_metric).collect(),
            gamma: None,
            improves: None,
            annotation: None,
            frontier_mu: None,
        });
    }
    let horizons: Vec<f64> = steps.iter().map(|&s| s as f64).collect();

    let mut crossovers = Vec::new();
    let index = |a: f64| alphas.iter().position(|&b| b == a).unwrap_or(0);
    for_each_pair(alphas, |strict, lax| {
        let (s, l) = (&cells[index(strict)], &cells[index(lax)]);
        let diff: Vec<f64> = s
            .e_metric
            .iter()
            .zip(&l.e_metric)
            .map(|(a, b)| a - b)
            .collect();
        crossovers.push(CrossoverRow {
            strict_alpha: strict,
            lax_alpha: lax,
            crossover: sampled_crossover(&horizons, &diff),
        });
        Ok(())
    })?;

    Ok(SweepResult {
        kind: SweepKind::Threshold,
        provenance: Provenance::Simulated,
        axes: vec![SweepAxis {
            name: "alpha".into(),
            values: alphas.to_vec(),
        }],
        horizons,
        cells,
        crossovers,
    })
}

/// Calls `f(strict, lax)` for every pair of distinct levels, in grid order.
fn for_each_pair(
    alphas: &[f64],
    mut f: impl FnMut(f64, f64) -> Result<(), SweepError>,
) -> Result<(), SweepError> {
    for (i, &a) in alphas.iter().enumerate() {
        for &b in &alphas[i + 1..] {
            if a != b {
                f(a.min(b), a.max(b))?;
            }
        }
    }
    Ok(())
}

fn horizon_range(horizons: &[f64]) -> (f64, f64) {
    let lo = horizons.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = horizons.iter().copied().fold(0.0, f64::max);
    (lo, hi)
}

/// First time in `[t_lo, t_hi]` at which `diff` turns from negative to
/// positive, located on a geometric scan and refined by bisection.
fn find_crossover(
    diff: impl Fn(f64) -> Result<f64, SweepError>,
    t_lo: f64,
    t_hi: f64,
) -> Result<Crossover, SweepError> {
    if !(t_hi > t_lo) {
        return Ok(Crossover::NoneInRange);
    }
    // Geometric spacing needs a positive start; t = 0 is a tie by definition.
    let start = if t_lo > 0.0 { t_lo } else { t_hi * 1e-6 };
    let ratio = (t_hi / start).powf(1.0 / (CROSSOVER_SCAN_POINTS - 1) as f64);
    let mut prev_t = start;
    let mut prev = diff(prev_t)?;
    for i in 1..CROSSOVER_SCAN_POINTS {
        let t = if i == CROSSOVER_SCAN_POINTS - 1 {
            t_hi
        } else {
            start * ratio.powi(i as i32)
        };
        let d = diff(t)?;
        if prev < 0.0 && d >= 0.0 {
            let (mut a, mut b) = (prev_t, t);
            for _ in 0..BISECTION_ITERATIONS {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if diff(m)? < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(Crossover::At { t: b });
        }
        prev_t = t;
        prev = d;
    }
    Ok(Crossover::NoneInRange)
}

fn sampled_crossover(times: &[f64], diff: &[f64]) -> Crossover {
    for i in 1..diff.len() {
        let (a, b) = (diff[i - 1], diff[i]);
        if a < 0.0 && b >= 0.0 {
            let w = a / (a - b);
            return Crossover::At {
                t: times[i - 1] + w * (times[i] - times[i - 1]),
            };
        }
    }
    Crossover::NoneInRange
}

fn annotate(gamma: f64) -> Annotation {
    if gamma > 1.0 {
        Annotation::Improve
    } else if gamma < 1.0 {
        Annotation::Worsen
    } else {
        Annotation::Neutral
    }
}

/// Stationary true gap over a `(γ_r, γ_σ)` grid. Cells are annotated by the
/// signal-to-noise improvement `γ = γ_σ/γ_r` against 1.
pub fn update_bias_sweep(
    gamma_r: &[f64],
    gamma_sigma: &[f64],
    sys: &SystemParams,
    rule: &DecisionRule,
) -> Result<SweepResult, SweepError> {
    non_empty("gamma_r", gamma_r)?;
    non_empty("gamma_sigma", gamma_sigma)?;
    let mut cells = Vec::with_capacity(gamma_r.len() * gamma_sigma.len());
    for &gr in gamma_r {
        for &gs in gamma_sigma {
            let bias = UpdateBias::new(gr, gs)?;
            let (_, ou) = analytic::apply_update_bias(sys, rule, &bias)?;
            let gamma = bias.gamma();
            cells.push(SweepCell {
                coords: vec![gr, gs],
                theta: ou.theta(),
                time_constant: ou.time_constant(),
                stationary_gap: analytic::stationary_true_gap(sys, &ou),
                e_metric: Vec::new(),
                gamma: Some(gamma),
                improves: Some(gamma > 1.0),
                annotation: Some(annotate(gamma)),
                frontier_mu: None,
            });
        }
    }
    Ok(SweepResult {
        kind: SweepKind::UpdateBias,
        provenance: Provenance::Analytic,
        axes: vec![
            SweepAxis {
                name: "gamma_r".into(),
                values: gamma_r.to_vec(),
            },
            SweepAxis {
                name: "gamma_sigma".into(),
                values: gamma_sigma.to_vec(),
            },
        ],
        horizons: Vec::new(),
        cells,
        crossovers: Vec::new(),
    })
}

/// Stationary true gap of surrogate-driven dynamics over a `(γ, μ)` grid,
/// the improvement flag and the frontier offset `μ*(γ)`.
///
/// Each surrogate keeps the true curvature and has standard error `σ/γ`.
pub fn objective_bias_frontier(
    mu: &[f64],
    gamma: &[f64],
    sys: &SystemParams,
    rule: &DecisionRule,
) -> Result<SweepResult, SweepError> {
    non_empty("mu", mu)?;
    non_empty("gamma", gamma)?;
    let ou_base = analytic::ou_from_system(sys, rule);
    let base_gap = analytic::stationary_true_gap(sys, &ou_base);
    let mut cells = Vec::with_capacity(mu.len() * gamma.len());
    for &g in gamma {
        let frontier = analytic::frontier_mu(&ou_base, g);
        for &m in mu {
            let bias = ObjectiveBias::with_gamma(sys, g, m)?;
            let ou = analytic::apply_objective_bias(sys, rule, &bias);
            let gap = analytic::stationary_true_gap(sys, &ou);
            let improves = analytic::improvement_condition(m, &ou_base, g);
            let annotation = if improves {
                Annotation::Improve
            } else if gap == base_gap {
                Annotation::Neutral
            } else {
                Annotation::Worsen
            };
            cells.push(SweepCell {
                coords: vec![g, m],
                theta: ou.theta(),
                time_constant: ou.time_constant(),
                stationary_gap: gap,
                e_metric: Vec::new(),
                gamma: Some(g),
                improves: Some(improves),
                annotation: Some(annotation),
                frontier_mu: frontier,
            });
        }
    }
    Ok(SweepResult {
        kind: SweepKind::ObjectiveFrontier,
        provenance: Provenance::Analytic,
        axes: vec![
            SweepAxis {
                name: "gamma".into(),
                values: gamma.to_vec(),
            },
            SweepAxis {
                name: "mu".into(),
                values: mu.to_vec(),
            },
        ],
        horizons: Vec::new(),
        cells,
        crossovers: Vec::new(),
    })
}
