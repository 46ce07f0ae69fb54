use launchsde::analytic::{self, OuParams};
use launchsde::model::DecisionRule;
use launchsde::montecarlo::{self, EnsembleStats, Scenario, SimError};
use launchsde::sweeps::{self, Crossover, SimulatedSweep, SweepResult};
use launchsde::verify::{self, CheckKind, SuiteConfig, Tolerance};
use serde::Serialize;
use std::path::Path;

use crate::config::Resolved;
use crate::error::CliError;
use crate::output::{self, Cell, Output};
use crate::svg::{Band, Heatmap, Marker, Plot, Series, PALETTE};

/// Primary output plus an optional rendered figure.
pub struct Artifact {
    pub output: Output,
    pub svg: Option<String>,
}

fn model_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// OU law that drives the configured scenario.
fn scenario_ou(r: &Resolved) -> Result<OuParams, CliError> {
    Ok(match &r.scenario {
        Scenario::Baseline => analytic::ou_from_system(&r.sys, &r.rule),
        Scenario::UpdateBias(b) => {
            analytic::apply_update_bias(&r.sys, &r.rule, b)
                .map_err(model_err)?
                .1
        }
        Scenario::ObjectiveBias(b) => analytic::apply_objective_bias(&r.sys, &r.rule, b),
    })
}

#[derive(Serialize)]
struct AnalyticRow {
    t: f64,
    mean: f64,
    var: f64,
    e_metric: f64,
    is_stationary: bool,
}

#[derive(Serialize)]
struct AnalyticDoc {
    ou: OuParams,
    stationary_gap: f64,
    time_constant: f64,
    rows: Vec<AnalyticRow>,
}

pub fn analytic(r: &Resolved, horizons: Option<Vec<f64>>) -> Result<Artifact, CliError> {
    let ou = scenario_ou(r)?;
    let x0 = r.spec.x0;
    let horizons = horizons.unwrap_or_else(|| r.spec.record_at.iter().map(|&s| s as f64).collect());
    let mut rows = Vec::with_capacity(horizons.len() + 1);
    for &t in &horizons {
        if !t.is_finite() {
            return Err(CliError::Usage(format!("--horizons: {t} is not finite")));
        }
        let law = analytic::solution_at(t, x0, &ou).map_err(model_err)?;
        rows.push(AnalyticRow {
            t,
            mean: law.mean,
            var: law.var,
            e_metric: analytic::expected_metric_at(t, x0, &r.sys, &ou).map_err(model_err)?,
            is_stationary: false,
        });
    }
    let st = analytic::stationary(&ou);
    rows.push(AnalyticRow {
        t: f64::INFINITY,
        mean: st.mean,
        var: st.var,
        e_metric: r.sys.optimum() - analytic::stationary_true_gap(&r.sys, &ou),
        is_stationary: true,
    });

    let table_rows = rows
        .iter()
        .map(|row| {
            vec![
                row.t.into(),
                row.mean.into(),
                row.var.into(),
                row.e_metric.into(),
                row.is_stationary.into(),
            ]
        })
        .collect();
    let finite: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| !row.is_stationary)
        .map(|row| (row.t, row.e_metric))
        .collect();
    let stationary_metric = rows.last().map_or(f64::NAN, |row| row.e_metric);
    let doc = AnalyticDoc {
        ou,
        stationary_gap: analytic::stationary_true_gap(&r.sys, &ou),
        time_constant: ou.time_constant(),
        rows,
    };
    let mut out = Output::new(
        "analytic",
        vec!["t", "mean", "var", "e_metric", "is_stationary"],
        &doc,
    );
    out.rows = table_rows;

    let t_max = finite.iter().map(|p| p.0).fold(0.0, f64::max);
    let plot = Plot {
        title: format!("Expected metric, alpha = {}", r.rule.alpha()),
        x_label: "t (experiments)".into(),
        y_label: "E Metric(X_t)".into(),
        series: vec![
            Series {
                label: "closed form".into(),
                color: PALETTE[0],
                points: finite,
                dashed: false,
            },
            Series {
                label: "stationary".into(),
                color: PALETTE[1],
                points: vec![(0.0, stationary_metric), (t_max, stationary_metric)],
                dashed: true,
            },
        ],
        ..Plot::default()
    };
    Ok(Artifact {
        output: out,
        svg: Some(plot.render()),
    })
}

const STATS_COLUMNS: [&str; 10] = [
    "step",
    "mean",
    "var",
    "q05",
    "q25",
    "q50",
    "q75",
    "q95",
    "e_metric",
    "launch_rate",
];

fn stats_rows(stats: &EnsembleStats) -> Vec<Vec<Cell>> {
    stats
        .rows
        .iter()
        .map(|s| {
            vec![
                s.step.into(),
                s.mean.into(),
                s.var.into(),
                s.q05.into(),
                s.q25.into(),
                s.q50.into(),
                s.q75.into(),
                s.q95.into(),
                s.e_metric.into(),
                s.launch_rate.into(),
            ]
        })
        .collect()
}

fn fan(stats: &EnsembleStats, color: &'static str, label: String) -> (Vec<Band>, Series) {
    let xs: Vec<f64> = stats.rows.iter().map(|s| s.step as f64).collect();
    let col = |f: fn(&montecarlo::SnapshotStats) -> f64| stats.rows.iter().map(f).collect();
    let bands = vec![
        Band {
            color,
            opacity: 0.15,
            xs: xs.clone(),
            lower: col(|s| s.q05),
            upper: col(|s| s.q95),
        },
        Band {
            color,
            opacity: 0.3,
            xs: xs.clone(),
            lower: col(|s| s.q25),
            upper: col(|s| s.q75),
        },
    ];
    let median = Series {
        label,
        color,
        points: stats.rows.iter().map(|s| (s.step as f64, s.q50)).collect(),
        dashed: false,
    };
    (bands, median)
}

pub fn simulate(r: &Resolved, trajectories: Option<&Path>) -> Result<Artifact, CliError> {
    let stats = montecarlo::simulate_scenario(&r.spec, &r.sys, &r.rule, &r.scenario)
        .map_err(CliError::from_sim)?;
    if let Some(path) = trajectories {
        let dynamics = r
            .scenario
            .dynamics(&r.sys, r.rule, r.spec.effect_mode)
            .map_err(model_err)?;
        let paths = montecarlo::run_trajectories(&r.spec, &dynamics).map_err(CliError::from_sim)?;
        let mut t = Output::new("trajectories", vec!["replica", "step", "x"], ());
        for (k, path) in paths.iter().enumerate() {
            for (step, &x) in path.iter().enumerate() {
                t.rows
                    .push(vec![(k as u64).into(), (step as u64).into(), x.into()]);
            }
        }
        output::write_output(Some(path), &t.to_csv(&r.sha256()))?;
    }
    let mut out = Output::new("simulate", STATS_COLUMNS.to_vec(), &stats);
    out.rows = stats_rows(&stats);
    let (bands, median) = fan(&stats, PALETTE[0], "median (IQR, 5-95%)".into());
    let plot = Plot {
        title: format!("Distribution of X_n, alpha = {}", r.rule.alpha()),
        x_label: "n (experiments)".into(),
        y_label: "X_n".into(),
        bands,
        series: vec![
            median,
            Series {
                label: "mean".into(),
                color: PALETTE[1],
                points: stats.rows.iter().map(|s| (s.step as f64, s.mean)).collect(),
                dashed: true,
            },
        ],
        ..Plot::default()
    };
    Ok(Artifact {
        output: out,
        svg: Some(plot.render()),
    })
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    pass: bool,
    checks: Vec<&'static str>,
    negative_control: bool,
    reports: &'a [verify::CheckReport],
}

fn tolerance_name(t: &Tolerance) -> &'static str {
    match t {
        Tolerance::Absolute { .. } => "absolute",
        Tolerance::Relative { .. } => "relative",
        Tolerance::ZScore { .. } => "z_score",
        Tolerance::SameSign => "same_sign",
        Tolerance::Below => "below",
        Tolerance::Diagnostic => "diagnostic",
    }
}

pub fn parse_checks(text: Option<&str>) -> Result<Vec<CheckKind>, CliError> {
    let Some(text) = text else {
        return Ok(CheckKind::ALL.to_vec());
    };
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            CheckKind::parse(s).ok_or_else(|| {
                let known: Vec<&str> = CheckKind::ALL.iter().map(|k| k.name()).collect();
                CliError::Usage(format!(
                    "--checks: unknown check `{s}` (known: {})",
                    known.join(", ")
                ))
            })
        })
        .collect()
}

/// Runs the suite. The report is returned even when checks fail; the
/// caller turns failures into the exit status after writing it.
pub fn verify(
    r: &Resolved,
    checks: &[CheckKind],
    negative_control: bool,
) -> Result<(Artifact, Vec<verify::CheckReport>), CliError> {
    let mut suite = SuiteConfig::new(r.sys, r.rule, r.spec.seed);
    suite.negative_control = negative_control;
    let reports = verify::run_suite(&suite, checks).map_err(CliError::from_verify)?;
    let failing: Vec<verify::CheckReport> = reports.iter().filter(|c| !c.pass).cloned().collect();
    let mut names: Vec<&'static str> = checks.iter().map(|k| k.name()).collect();
    names.sort_unstable();
    names.dedup();
    let doc = VerifyDoc {
        pass: failing.is_empty(),
        checks: names,
        negative_control,
        reports: &reports,
    };
    let mut out = Output::new(
        "verify",
        vec![
            "check",
            "point",
            "observed",
            "reference",
            "tolerance",
            "z",
            "pass",
            "note",
        ],
        &doc,
    );
    out.meta.push(("pass".into(), doc.pass.to_string()));
    out.rows = reports
        .iter()
        .map(|c| {
            let point: Vec<String> = c
                .point
                .iter()
                .map(|(k, v)| format!("{k}={}", output::sig10(*v)))
                .collect();
            vec![
                Cell::Text(c.check.clone()),
                Cell::Text(point.join(";")),
                c.observed.into(),
                c.reference.into(),
                Cell::Text(tolerance_name(&c.tolerance).into()),
                c.z().into(),
                c.pass.into(),
                Cell::Text(c.note.clone()),
            ]
        })
        .collect();
    Ok((
        Artifact {
            output: out,
            svg: None,
        },
        failing,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepKindArg {
    Threshold,
    UpdateBias,
    ObjectiveFrontier,
}

/// Grids given on the command line; `None` selects the default grid.
#[derive(Debug, Clone, Default)]
pub struct SweepGrids {
    pub alphas: Option<Vec<f64>>,
    pub horizons: Option<Vec<f64>>,
    pub gamma_r: Option<Vec<f64>>,
    pub gamma_sigma: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub simulated: bool,
}

const DEFAULT_HORIZON_POINTS: usize = 13;
const DEFAULT_UPDATE_FACTORS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const DEFAULT_FRONTIER_GAMMAS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 4.0];

fn sweep_err(e: sweeps::SweepError) -> CliError {
    match e {
        sweeps::SweepError::Sim(s) => CliError::from_sim(s),
        other => CliError::Config(other.to_string()),
    }
}

pub fn sweep(r: &Resolved, kind: SweepKindArg, grids: SweepGrids) -> Result<Artifact, CliError> {
    if grids.simulated && kind != SweepKindArg::Threshold {
        return Err(CliError::Usage(
            "--simulated applies to the threshold sweep only".into(),
        ));
    }
    match kind {
        SweepKindArg::Threshold => threshold_sweep(r, grids),
        SweepKindArg::UpdateBias => update_bias_sweep(r, grids),
        SweepKindArg::ObjectiveFrontier => frontier_sweep(r, grids),
    }
}

fn threshold_sweep(r: &Resolved, grids: SweepGrids) -> Result<Artifact, CliError> {
    let alphas = grids
        .alphas
        .unwrap_or_else(|| sweeps::DEFAULT_ALPHAS.to_vec());
    let horizons = match grids.horizons {
        Some(h) => h,
        None => {
            sweeps::default_horizons(&r.sys, &alphas, DEFAULT_HORIZON_POINTS).map_err(sweep_err)?
        }
    };
    let result = if grids.simulated {
        let sim = SimulatedSweep {
            replicas: r.spec.replicas,
            seed: r.spec.seed,
            effect_mode: r.spec.effect_mode,
        };
        sweeps::threshold_sweep_simulated(&alphas, &horizons, &r.sys, r.spec.x0, &sim)
    } else {
        sweeps::threshold_sweep(&alphas, &horizons, &r.sys, r.spec.x0)
    }
    .map_err(sweep_err)?;

    let mut out = Output::new(
        "sweep_threshold",
        vec![
            "alpha",
            "t",
            "theta",
            "time_constant",
            "e_metric",
            "stationary_gap",
        ],
        &result,
    );
    out.meta
        .push(("provenance".into(), provenance(&result).into()));
    for row in &result.crossovers {
        let t = match row.crossover {
            Crossover::At { t } => output::sig10(t),
            Crossover::NoneInRange => "none".into(),
        };
        out.meta.push((
            "crossover".into(),
            format!(
                "{},{},{t}",
                output::sig10(row.strict_alpha),
                output::sig10(row.lax_alpha)
            ),
        ));
    }
    let mut series = Vec::new();
    for (i, cell) in result.cells.iter().enumerate() {
        for (&t, &m) in result.horizons.iter().zip(&cell.e_metric) {
            out.rows.push(vec![
                cell.coords[0].into(),
                t.into(),
                cell.theta.into(),
                cell.time_constant.into(),
                m.into(),
                cell.stationary_gap.into(),
            ]);
        }
        series.push(Series {
            label: format!("alpha = {}", cell.coords[0]),
            color: PALETTE[i % PALETTE.len()],
            points: result
                .horizons
                .iter()
                .copied()
                .zip(cell.e_metric.iter().copied())
                .collect(),
            dashed: false,
        });
    }
    let markers = result
        .crossovers
        .iter()
        .filter_map(|row| match row.crossover {
            Crossover::At { t } => Some(Marker {
                x: t,
                label: format!("{} overtakes {}", row.strict_alpha, row.lax_alpha),
                color: "#555555",
            }),
            Crossover::NoneInRange => None,
        })
        .take(4)
        .collect();
    let plot = Plot {
        title: format!("Expected metric by test level, x0 = {}", r.spec.x0),
        x_label: "t (experiments, log scale)".into(),
        y_label: "E Metric(X_t)".into(),
        log_x: true,
        series,
        markers,
        ..Plot::default()
    };
    Ok(Artifact {
        output: out,
        svg: Some(plot.render()),
    })
}

fn provenance(result: &SweepResult) -> &'static str {
    match result.provenance {
        sweeps::Provenance::Analytic => "analytic",
        sweeps::Provenance::Simulated => "simulated",
    }
}

fn update_bias_sweep(r: &Resolved, grids: SweepGrids) -> Result<Artifact, CliError> {
    let gr = grids
        .gamma_r
        .unwrap_or_else(|| DEFAULT_UPDATE_FACTORS.to_vec());
    let gs = grids
        .gamma_sigma
        .unwrap_or_else(|| DEFAULT_UPDATE_FACTORS.to_vec());
    let result = sweeps::update_bias_sweep(&gr, &gs, &r.sys, &r.rule).map_err(sweep_err)?;
    let mut out = Output::new(
        "sweep_update_bias",
        vec![
            "gamma_r",
            "gamma_sigma",
            "gamma",
            "theta",
            "time_constant",
            "stationary_gap",
            "annotation",
        ],
        &result,
    );
    out.meta
        .push(("provenance".into(), provenance(&result).into()));
    let mut labels = Vec::new();
    for cell in &result.cells {
        let note = cell.annotation.map_or("", |a| a.name());
        out.rows.push(vec![
            cell.coords[0].into(),
            cell.coords[1].into(),
            cell.gamma.into(),
            cell.theta.into(),
            cell.time_constant.into(),
            cell.stationary_gap.into(),
            Cell::Text(note.into()),
        ]);
        labels.push(format!("{:.2} {note}", cell.stationary_gap));
    }
    let map = Heatmap {
        title: format!(
            "Stationary gap under update bias, alpha = {}",
            r.rule.alpha()
        ),
        x_label: "gamma_sigma".into(),
        y_label: "gamma_r".into(),
        x_values: gs,
        y_values: gr,
        values: result.cells.iter().map(|c| c.stationary_gap).collect(),
        labels,
    };
    Ok(Artifact {
        output: out,
        svg: Some(map.render()),
    })
}

fn frontier_sweep(r: &Resolved, grids: SweepGrids) -> Result<Artifact, CliError> {
    let base = analytic::ou_from_system(&r.sys, &r.rule);
    let sd = base.stationary_variance().sqrt();
    let mu = grids
        .mu
        .unwrap_or_else(|| (-6..=6).map(|k| 0.25 * k as f64 * sd).collect());
    let gamma = grids
        .gamma
        .unwrap_or_else(|| DEFAULT_FRONTIER_GAMMAS.to_vec());
    let result =
        sweeps::objective_bias_frontier(&mu, &gamma, &r.sys, &r.rule).map_err(sweep_err)?;
    let mut out = Output::new(
        "sweep_objective_frontier",
        vec![
            "gamma",
            "mu",
            "theta",
            "time_constant",
            "stationary_gap",
            "improves",
            "annotation",
            "frontier_mu",
        ],
        &result,
    );
    out.meta
        .push(("provenance".into(), provenance(&result).into()));
    let base_gap = analytic::stationary_true_gap(&r.sys, &base);
    out.meta
        .push(("baseline_gap".into(), output::sig10(base_gap)));
    for cell in &result.cells {
        out.rows.push(vec![
            cell.coords[0].into(),
            cell.coords[1].into(),
            cell.theta.into(),
            cell.time_constant.into(),
            cell.stationary_gap.into(),
            cell.improves.unwrap_or(false).into(),
            Cell::Text(cell.annotation.map_or("", |a| a.name()).into()),
            cell.frontier_mu.into(),
        ]);
    }
    let mut series: Vec<Series> = gamma
        .iter()
        .enumerate()
        .map(|(i, &g)| Series {
            label: format!("gamma = {g}"),
            color: PALETTE[i % PALETTE.len()],
            points: result.cells[i * mu.len()..(i + 1) * mu.len()]
                .iter()
                .map(|c| (c.coords[1], c.stationary_gap))
                .collect(),
            dashed: false,
        })
        .collect();
    let (lo, hi) = mu
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &m| {
            (a.min(m), b.max(m))
        });
    series.push(Series {
        label: "unbiased".into(),
        color: "#000000",
        points: vec![(lo, base_gap), (hi, base_gap)],
        dashed: true,
    });
    let notes = gamma
        .iter()
        .filter_map(|&g| analytic::frontier_mu(&base, g).map(|m| format!("mu*({g}) = {m:.3}")))
        .collect();
    let plot = Plot {
        title: format!(
            "Stationary true gap under objective bias, alpha = {}",
            r.rule.alpha()
        ),
        x_label: "surrogate offset mu".into(),
        y_label: "stationary gap".into(),
        series,
        notes,
        ..Plot::default()
    };
    Ok(Artifact {
        output: out,
        svg: Some(plot.render()),
    })
}

#[derive(Serialize)]
struct FigureRun {
    alpha: f64,
    first_passage: Option<u64>,
    stats: EnsembleStats,
}

#[derive(Serialize)]
struct FigureDoc {
    threshold: f64,
    /// First-passage step of the first level over that of the second.
    ratio: Option<f64>,
    runs: Vec<FigureRun>,
}

/// Quantile fans of the unbiased chain for two test levels from the same
/// seed, with first-passage steps of the ensemble mean to `threshold`.
pub fn figure1(r: &Resolved, alphas: &[f64], threshold: f64) -> Result<Artifact, CliError> {
    if alphas.len() != 2 {
        return Err(CliError::Usage(format!(
            "--alphas: expected two levels, got {}",
            alphas.len()
        )));
    }
    if r.scenario != Scenario::Baseline {
        return Err(CliError::Config(
            "figure1 simulates the unbiased chain; remove the bias sections".into(),
        ));
    }
    if !(threshold > 0.0) {
        return Err(CliError::Usage(format!(
            "--threshold must be positive, got {threshold}"
        )));
    }
    let mut runs = Vec::new();
    for &alpha in alphas {
        let rule = DecisionRule::from_alpha(alpha).map_err(model_err)?;
        let stats = montecarlo::simulate(&r.spec, &r.sys, &rule).map_err(CliError::from_sim)?;
        let first_passage = match stats.first_passage(threshold) {
            Ok(step) => Some(step),
            Err(SimError::HorizonExhausted { .. }) => None,
            Err(e) => return Err(CliError::from_sim(e)),
        };
        runs.push(FigureRun {
            alpha,
            first_passage,
            stats,
        });
    }
    let ratio = match (runs[0].first_passage, runs[1].first_passage) {
        (Some(a), Some(b)) if b > 0 => Some(a as f64 / b as f64),
        (Some(0), Some(0)) => Some(1.0),
        _ => None,
    };
    let doc = FigureDoc {
        threshold,
        ratio,
        runs,
    };

    let mut out = Output::new(
        "figure1",
        vec![
            "alpha", "step", "mean", "var", "q05", "q25", "q50", "q75", "q95",
        ],
        &doc,
    );
    out.meta
        .push(("threshold".into(), output::sig10(threshold)));
    for run in &doc.runs {
        out.meta.push((
            "first_passage".into(),
            format!(
                "{},{}",
                output::sig10(run.alpha),
                run.first_passage
                    .map_or("not reached".into(), |s| s.to_string())
            ),
        ));
        for s in &run.stats.rows {
            out.rows.push(vec![
                run.alpha.into(),
                s.step.into(),
                s.mean.into(),
                s.var.into(),
                s.q05.into(),
                s.q25.into(),
                s.q50.into(),
                s.q75.into(),
                s.q95.into(),
            ]);
        }
    }
    out.meta.push((
        "ratio".into(),
        doc.ratio.map_or("undefined".into(), output::sig10),
    ));

    let mut plot = Plot {
        title: format!(
            "Distribution of X_n from X_0 = {} (r = {}, sigma = {})",
            r.spec.x0,
            r.sys.r(),
            r.sys.sigma()
        ),
        x_label: "n (experiments)".into(),
        y_label: "X_n".into(),
        ..Plot::default()
    };
    for (i, run) in doc.runs.iter().enumerate() {
        let color = PALETTE[i];
        let (bands, median) = fan(&run.stats, color, format!("alpha = {} median", run.alpha));
        plot.bands.extend(bands);
        plot.series.push(median);
        if let Some(step) = run.first_passage {
            plot.markers.push(Marker {
                x: step as f64,
                label: format!("|mean| <= {threshold} at n = {step}"),
                color,
            });
        }
    }
    plot.notes.push(match doc.ratio {
        Some(q) => format!("first-passage ratio {q:.2}"),
        None => "first-passage ratio undefined".into(),
    });
    plot.notes.push("bands: 25-75% and 5-95%".into());
    Ok(Artifact {
        output: out,
        svg: Some(plot.render()),
    })
}
