//! Exact simulation of the launch chain over many independent replicas.
//!
//! Determinism: replica `k` draws from its own ChaCha8 stream. The key is
//! the master seed expanded to 256 bits with SplitMix64, and the stream id
//! is `k`. A replica's trajectory therefore depends only on
//! `(seed, k)`, and ensembles are reduced in replica order, so the output is
//! bit-identical for any thread count.
//!
//! One uniform draw per step is compared against the cumulative branch
//! probabilities `(p_down, p_down + p_up)`; this is the same law as drawing a
//! proposal direction and a z-score separately.

use crate::analytic::{ObjectiveBias, UpdateBias};
use crate::model::{ChainDynamics, DecisionRule, EffectMode, ModelError, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Upper bound on the number of stored state values (replicas × snapshots,
/// or replicas × steps for trajectory dumps).
pub const MAX_STORED_VALUES: u64 = 50_000_000;

/// Offsets from `x0` whose step probabilities are tabulated up front.
const TABLE_RADIUS_LIMIT: u64 = 1 << 20;

const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.50, 0.75, 0.95];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("replicas must be at least 1")]
    NoReplicas,
    #[error("record_at must be strictly increasing and within [0, {steps}]")]
    RecordSchedule { steps: u64 },
    #[error("record_at must not be empty")]
    NothingRecorded,
    #[error("initial state must be finite, got {0}")]
    InitialState(f64),
    #[error("uniform draw must lie in [0, 1), got {0}")]
    Draw(f64),
    #[error("threshold must be positive, got {0}")]
    Threshold(f64),
    #[error("request needs {requested} stored values, limit is {limit}")]
    ResourceLimit { requested: u64, limit: u64 },
    #[error("horizon exhausted: |mean| never fell to {threshold} by step {last_step}")]
    HorizonExhausted { threshold: f64, last_step: u64 },
    #[error("ensemble statistics are empty")]
    EmptyStats,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Description of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub steps: u64,
    pub replicas: usize,
    pub seed: u64,
    pub record_at: Vec<u64>,
    pub effect_mode: EffectMode,
    pub x0: f64,
}

impl SimSpec {
    /// Snapshot schedule of `points` evenly spaced steps from 0 to `steps`
    /// inclusive (deduplicated when `steps` is small).
    pub fn even_schedule(steps: u64, points: usize) -> Vec<u64> {
        let n = points.max(2) as u64 - 1;
        let mut out: Vec<u64> = (0..=n).map(|i| i * steps / n).collect();
        out.dedup();
        out
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.replicas == 0 {
            return Err(SimError::NoReplicas);
        }
        if !self.x0.is_finite() {
            return Err(SimError::InitialState(self.x0));
        }
        if self.record_at.is_empty() {
            return Err(SimError::NothingRecorded);
        }
        let increasing = self.record_at.windows(2).all(|w| w[0] < w[1]);
        if !increasing || self.record_at.last().is_some_and(|&s| s > self.steps) {
            return Err(SimError::RecordSchedule { steps: self.steps });
        }
        let requested = self.replicas as u64 * self.record_at.len() as u64;
        if requested > MAX_STORED_VALUES {
            return Err(SimError::ResourceLimit {
                requested,
                limit: MAX_STORED_VALUES,
            });
        }
        Ok(())
    }
}

/// Which measurement drives launch decisions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Scenario {
    #[default]
    Baseline,
    UpdateBias(UpdateBias),
    ObjectiveBias(ObjectiveBias),
}

impl Scenario {
    /// Launch dynamics for this scenario: the attenuated system
    /// `(r/γ_r, σ/γ_σ)` for update bias, the surrogate `(r′, σ′, μ)` for
    /// objective bias.
    pub fn dynamics(
        &self,
        sys: &SystemParams,
        rule: DecisionRule,
        mode: EffectMode,
    ) -> Result<ChainDynamics, ModelError> {
        match self {
            Scenario::Baseline => Ok(ChainDynamics::baseline(sys, rule, mode)),
            Scenario::UpdateBias(b) => ChainDynamics::new(
                sys.r() / b.gamma_r(),
                sys.sigma() / b.gamma_sigma(),
                0.0,
                mode,
                rule,
            ),
            Scenario::ObjectiveBias(b) => {
                ChainDynamics::new(b.r_prime(), b.sigma_prime(), b.mu(), mode, rule)
            }
        }
    }
}

/// Raw ensembles at each recorded step, in replica order.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshots {
    pub steps: Vec<u64>,
    pub states: Vec<Vec<f64>>,
    /// Launches summed over replicas up to each recorded step.
    pub launches: Vec<u64>,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotStats {
    pub step: u64,
    pub mean: f64,
    pub var: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    /// Ensemble mean of the true expected metric at the sampled states.
    pub e_metric: f64,
    /// Fraction of proposals launched up to this step.
    pub launch_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub replicas: usize,
    pub rows: Vec<SnapshotStats>,
}

impl EnsembleStats {
    pub fn from_snapshots(snaps: &Snapshots, sys: &SystemParams) -> Self {
        let rows = snaps
            .steps
            .iter()
            .zip(&snaps.states)
            .zip(&snaps.launches)
            .map(|((&step, xs), &launches)| {
                let (mean, var) = mean_var(xs);
                let q = nearest_rank_quantiles(xs);
                let e_metric =
                    xs.iter().map(|&x| sys.expected_metric(x)).sum::<f64>() / xs.len() as f64;
                let proposals = step as f64 * snaps.replicas as f64;
                let launch_rate = if step == 0 {
                    0.0
                } else {
                    launches as f64 / proposals
                };
                SnapshotStats {
                    step,
                    mean,
                    var,
                    q05: q[0],
                    q25: q[1],
                    q50: q[2],
                    q75: q[3],
                    q95: q[4],
                    e_metric,
                    launch_rate,
                }
            })
            .collect();
        Self {
            replicas: snaps.replicas,
            rows,
        }
    }

    /// First recorded step at which `|mean| ≤ threshold`.
    pub fn first_passage(&self, threshold: f64) -> Result<u64, SimError> {
        if !(threshold > 0.0) {
            return Err(SimError::Threshold(threshold));
        }
        self.rows
            .iter()
            .find(|row| row.mean.abs() <= threshold)
            .map(|row| row.step)
            .ok_or(SimError::HorizonExhausted {
                threshold,
                last_step: self.rows.last().map_or(0, |r| r.step),
            })
    }
}

/// Sample mean and unbiased variance (0 for a single value).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

fn nearest_rank_quantiles(xs: &[f64]) -> [f64; 5] {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    QUANTILE_LEVELS.map(|p| {
        let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
        sorted[rank - 1]
    })
}

/// Advances the chain one proposal given a uniform draw in `[0, 1)`.
pub fn step_chain(x: f64, dynamics: &ChainDynamics, draw: f64) -> Result<f64, SimError> {
    if !(0.0..1.0).contains(&draw) {
        return Err(SimError::Draw(draw));
    }
    let dist = dynamics.step_distribution(x)?;
    Ok(match branch(draw, dist.p_down, dist.p_down + dist.p_up) {
        Move::Down => x - 1.0,
        Move::Up => x + 1.0,
        Move::Stay => x,
    })
}

enum Move {
    Down,
    Up,
    Stay,
}

#[inline]
fn branch(draw: f64, down: f64, down_or_up: f64) -> Move {
    if draw < down {
        Move::Down
    } else if draw < down_or_up {
        Move::Up
    } else {
        Move::Stay
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for replica (or path) `index` under `seed`.
pub fn replica_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Cumulative branch thresholds `(p_down, p_down + p_up)` by offset from `x0`.
struct StepTable {
    x0: f64,
    radius: i64,
    thresholds: Vec<(f64, f64)>,
    dynamics: ChainDynamics,
}

impl StepTable {
    fn new(x0: f64, steps: u64, dynamics: ChainDynamics) -> Self {
        let radius = steps.min(TABLE_RADIUS_LIMIT) as i64;
        let thresholds = (-radius..=radius)
            .map(|k| Self::compute(&dynamics, x0 + k as f64))
            .collect();
        Self {
            x0,
            radius,
            thresholds,
            dynamics,
        }
    }

    fn compute(dynamics: &ChainDynamics, x: f64) -> (f64, f64) {
        let d = dynamics.step_raw(x);
        (d.p_down, d.p_down + d.p_up)
    }

    #[inline]
    fn get(&self, offset: i64) -> (f64, f64) {
        if offset.abs() <= self.radius {
            self.thresholds[(offset + self.radius) as usize]
        } else {
            Self::compute(&self.dynamics, self.x0 + offset as f64)
        }
    }
}

struct ReplicaRun {
    states: Vec<f64>,
    launches: Vec<u64>,
}

fn run_replica(
    index: u64,
    spec: &SimSpec,
    table: &StepTable,
    mut path: Option<&mut Vec<f64>>,
) -> ReplicaRun {
    let mut rng = replica_rng(spec.seed, index);
    let mut offset: i64 = 0;
    let mut launches: u64 = 0;
    let mut states = Vec::with_capacity(spec.record_at.len());
    let mut launch_marks = Vec::with_capacity(spec.record_at.len());
    let mut next = spec.record_at.iter().peekable();
    for step in 0..=spec.steps {
        if next.peek().is_some_and(|&&s| s == step) {
            next.next();
            states.push(spec.x0 + offset as f64);
            launch_marks.push(launches);
        }
        // Without a path to fill, nothing after the last snapshot matters.
        if step == spec.steps || (next.peek().is_none() && path.is_none()) {
            break;
        }
        let (down, down_or_up) = table.get(offset);
        match branch(rng.random::<f64>(), down, down_or_up) {
            Move::Down => {
                offset -= 1;
                launches += 1;
            }
            Move::Up => {
                offset += 1;
                launches += 1;
            }
            Move::Stay => {}
        }
        if let Some(p) = path.as_deref_mut() {
            p.push(spec.x0 + offset as f64);
        }
    }
    ReplicaRun {
        states,
        launches: launch_marks,
    }
}

/// Runs `spec.replicas` independent chains under `dynamics` and returns the
/// recorded ensembles.
pub fn run_ensemble(spec: &SimSpec, dynamics: &ChainDynamics) -> Result<Snapshots, SimError> {
    spec.validate()?;
    let table = StepTable::new(spec.x0, spec.steps, *dynamics);
    let runs: Vec<ReplicaRun> = (0..spec.replicas as u64)
        .into_par_iter()
        .map(|k| run_replica(k, spec, &table, None))
        .collect();

    let n_snap = spec.record_at.len();
    let mut states = vec![Vec::with_capacity(spec.replicas); n_snap];
    let mut launches = vec![0u64; n_snap];
    for run in &runs {
        for (j, (&x, &l)) in run.states.iter().zip(&run.launches).enumerate() {
            states[j].push(x);
            launches[j] += l;
        }
    }
    Ok(Snapshots {
        steps: spec.record_at.clone(),
        states,
        launches,
        replicas: spec.replicas,
    })
}

/// Full per-replica paths `x_0, …, x_steps` (opt-in; memory scales with
/// `replicas × steps`).
pub fn run_trajectories(
    spec: &SimSpec,
    dynamics: &ChainDynamics,
) -> Result<Vec<Vec<f64>>, SimError> {
    spec.validate()?;
    let requested = spec.replicas as u64 * (spec.steps + 1);
    if requested > MAX_STORED_VALUES {
        return Err(SimError::ResourceLimit {
            requested,
            limit: MAX_STORED_VALUES,
        });
    }
    let table = StepTable::new(spec.x0, spec.steps, *dynamics);
    Ok((0..spec.replicas as u64)
        .into_par_iter()
        .map(|k| {
            let mut path = Vec::with_capacity(spec.steps as usize + 1);
            path.push(spec.x0);
            run_replica(k, spec, &table, Some(&mut path));
            path
        })
        .collect())
}

/// Simulates the unbiased chain.
pub fn simulate(
    spec: &SimSpec,
    sys: &SystemParams,
    rule: &DecisionRule,
) -> Result<EnsembleStats, SimError> {
    simulate_scenario(spec, sys, rule, &Scenario::Baseline)
}

/// Simulates the chain driven by `scenario`; metrics are scored on `sys`.
pub fn simulate_scenario(
    spec: &SimSpec,
    sys: &SystemParams,
    rule: &DecisionRule,
    scenario: &Scenario,
) -> Result<EnsembleStats, SimError> {
    let dynamics = scenario.dynamics(sys, *rule, spec.effect_mode)?;
    let snaps = run_ensemble(spec, &dynamics)?;
    Ok(EnsembleStats::from_snapshots(&snaps, sys))
}

/// First recorded step at which the ensemble mean is within `threshold` of
/// the optimum.
pub fn first_passage(
    spec: &SimSpec,
    sys: &SystemParams,
    rule: &DecisionRule,
    threshold: f64,
) -> Result<u64, SimError> {
    if !(threshold > 0.0) {
        return Err(SimError::Threshold(threshold));
    }
    simulate(spec, sys, rule)?.first_passage(threshold)
}

/// Realized optimality gap at the last recorded step.
pub fn empirical_metric_gap(stats: &EnsembleStats, sys: &SystemParams) -> Result<f64, SimError> {
    let last = stats.rows.last().ok_or(SimError::EmptyStats)?;
    Ok(sys.optimum() - last.e_metric)
}
