use launchsde::model::{ChainDynamics, DecisionRule, EffectMode, SystemParams};
use launchsde::montecarlo::{
    self, replica_rng, run_ensemble, run_trajectories, step_chain, EnsembleStats, SimSpec,
};
use rand::Rng;

fn sys(sigma: f64) -> SystemParams {
    SystemParams::new(1.0, sigma, 0.0).unwrap()
}

fn rule(alpha: f64) -> DecisionRule {
    DecisionRule::from_alpha(alpha).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn ensembles_identical_across_thread_counts() {
    let spec = SimSpec {
        steps: 3000,
        replicas: 500,
        seed: 17,
        record_at: vec![0, 10, 1000, 3000],
        effect_mode: EffectMode::Exact,
        x0: 40.0,
    };
    let dynamics = ChainDynamics::baseline(&sys(100.0), rule(0.1), EffectMode::Exact);
    let one = in_pool(1, || run_ensemble(&spec, &dynamics).unwrap());
    let eight = in_pool(8, || run_ensemble(&spec, &dynamics).unwrap());
    assert_eq!(one, eight);
    let bits = |s: &EnsembleStats| -> Vec<u64> {
        s.rows
            .iter()
            .flat_map(|r| {
                [
                    r.mean,
                    r.var,
                    r.q05,
                    r.q50,
                    r.q95,
                    r.e_metric,
                    r.launch_rate,
                ]
            })
            .map(f64::to_bits)
            .collect()
    };
    let a = EnsembleStats::from_snapshots(&one, &sys(100.0));
    let b = EnsembleStats::from_snapshots(&eight, &sys(100.0));
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn trajectories_agree_with_snapshots() {
    let spec = SimSpec {
        steps: 200,
        replicas: 50,
        seed: 5,
        record_at: vec![0, 50, 200],
        effect_mode: EffectMode::Gradient,
        x0: 3.0,
    };
    let dynamics = ChainDynamics::baseline(&sys(10.0), rule(0.3), EffectMode::Gradient);
    let snaps = run_ensemble(&spec, &dynamics).unwrap();
    let paths = in_pool(3, || run_trajectories(&spec, &dynamics).unwrap());
    for (j, &step) in spec.record_at.iter().enumerate() {
        for (k, path) in paths.iter().enumerate() {
            assert_eq!(path[step as usize], snaps.states[j][k]);
        }
    }
    for path in &paths {
        for w in path.windows(2) {
            let d = w[1] - w[0];
            assert!(d == -1.0 || d == 0.0 || d == 1.0);
        }
    }
}

#[test]
fn false_launch_rate_equals_level() {
    // σ is large enough that |r·x/σ| stays below 1e−3 over the run, so every
    // launch is effectively a false positive at rate α.
    for alpha in [0.05, 0.40] {
        let spec = SimSpec {
            steps: 2000,
            replicas: 2000,
            seed: 11,
            record_at: vec![2000],
            effect_mode: EffectMode::Gradient,
            x0: 0.0,
        };
        let stats = montecarlo::simulate(&spec, &sys(1e5), &rule(alpha)).unwrap();
        let n = (spec.steps as f64) * spec.replicas as f64;
        let se = (alpha * (1.0 - alpha) / n).sqrt();
        let rate = stats.rows[0].launch_rate;
        assert!(
            (rate - alpha).abs() <= 4.0 * se,
            "alpha={alpha} rate={rate}"
        );
    }
}

#[test]
fn one_step_histogram_matches_step_distribution() {
    let s = sys(100.0);
    for (alpha, x) in [(0.05, 0.0), (0.05, 100.0), (0.4, -37.0)] {
        let dynamics = ChainDynamics::baseline(&s, rule(alpha), EffectMode::Gradient);
        let dist = dynamics.step_distribution(x).unwrap();
        let mut rng = replica_rng(123, 0);
        let n = 1_000_000;
        let mut counts = [0u64; 3];
        for _ in 0..n {
            let next = step_chain(x, &dynamics, rng.random::<f64>()).unwrap();
            counts[(next - x + 1.0) as usize] += 1;
        }
        for (count, p) in counts.iter().zip([dist.p_down, dist.p_stay, dist.p_up]) {
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let freq = *count as f64 / n as f64;
            assert!(
                (freq - p).abs() <= 4.0 * se,
                "x={x} alpha={alpha}: {freq} vs {p}"
            );
        }
    }
}

#[test]
fn degenerate_ensembles() {
    let spec = SimSpec {
        steps: 0,
        replicas: 10,
        seed: 0,
        record_at: vec![0],
        effect_mode: EffectMode::Gradient,
        x0: 0.0,
    };
    let stats = montecarlo::simulate(&spec, &sys(100.0), &rule(0.05)).unwrap();
    let row = &stats.rows[0];
    assert_eq!((row.mean, row.var, row.q05, row.q95), (0.0, 0.0, 0.0, 0.0));
    assert_eq!(
        montecarlo::empirical_metric_gap(&stats, &sys(100.0)).unwrap(),
        0.0
    );
    assert_eq!(stats.first_passage(1.0).unwrap(), 0);
}
