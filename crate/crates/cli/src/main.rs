//! `launchsde`: closed-form laws, simulations, verification suites, sweeps
//! and the two-level convergence figure for the experiment-launch chain.

mod commands;
mod config;
mod error;
mod output;
mod svg;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use commands::{Artifact, SweepGrids, SweepKindArg};
use config::{Overrides, ScenarioConfig};
use error::CliError;
use output::{parse_list, write_output, Format};

#[derive(Parser, Debug)]
#[command(name = "launchsde", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario config (JSON); defaults apply to every missing field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; the output does not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Primary output file (standard output when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also render an SVG figure to this path.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Print the fully resolved config and exit.
    #[arg(long, global = true)]
    emit_config: bool,
    /// Test level, overriding the config.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Initial state, overriding the config.
    #[arg(long, global = true, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// Proposals per replica, overriding the config.
    #[arg(long, global = true)]
    steps: Option<u64>,
    /// Ensemble size, overriding the config.
    #[arg(long, global = true)]
    replicas: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form mean, variance and expected metric over time.
    Analytic {
        /// Comma-separated times; defaults to the snapshot schedule.
        #[arg(long)]
        horizons: Option<String>,
    },
    /// Monte Carlo ensemble statistics of the chain.
    Simulate {
        /// Also dump every replica's full path as CSV.
        #[arg(long)]
        trajectories: Option<PathBuf>,
    },
    /// Run the verification suite; exits 2 when a check fails.
    Verify {
        /// Comma-separated subset of drift, mc, gap, sde, frontier.
        #[arg(long)]
        checks: Option<String>,
        /// Corrupt the analytic references so that checks must fail.
        #[arg(long)]
        negative_control: bool,
    },
    /// Parameter sweeps over thresholds or bias factors.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKindArg,
        #[arg(long)]
        alphas: Option<String>,
        #[arg(long)]
        horizons: Option<String>,
        #[arg(long)]
        gamma_r: Option<String>,
        #[arg(long)]
        gamma_sigma: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        /// Measure the expected metric on simulated ensembles.
        #[arg(long)]
        simulated: bool,
    },
    /// Quantile fans for two test levels from a shared seed.
    Figure1 {
        #[arg(long, default_value = "0.05,0.40")]
        alphas: String,
        /// First-passage target for the ensemble mean.
        #[arg(long, default_value_t = 10.0)]
        threshold: f64,
    },
}

fn opt_list(name: &str, text: &Option<String>) -> Result<Option<Vec<f64>>, CliError> {
    text.as_deref().map(|t| parse_list(name, t)).transpose()
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = &cli.common;
    let mut config = ScenarioConfig::load(c.config.as_deref())?;
    config.apply(&Overrides {
        seed: c.seed,
        alpha: c.alpha,
        x0: c.x0,
        steps: c.steps,
        replicas: c.replicas,
    });
    let resolved = config.resolve()?;
    if c.emit_config {
        let mut text = resolved.to_json();
        text.push('\n');
        return write_output(c.out.as_deref(), &text);
    }

    let mut failing = Vec::new();
    let mut total = 0;
    let (artifact, default_format): (Artifact, Format) = match &cli.command {
        Command::Analytic { horizons } => (
            commands::analytic(&resolved, opt_list("horizons", horizons)?)?,
            Format::Csv,
        ),
        Command::Simulate { trajectories } => (
            commands::simulate(&resolved, trajectories.as_deref())?,
            Format::Csv,
        ),
        Command::Verify {
            checks,
            negative_control,
        } => {
            let kinds = commands::parse_checks(checks.as_deref())?;
            let (artifact, failed) = commands::verify(&resolved, &kinds, *negative_control)?;
            total = artifact.output.rows.len();
            failing = failed;
            (artifact, Format::Json)
        }
        Command::Sweep {
            kind,
            alphas,
            horizons,
            gamma_r,
            gamma_sigma,
            mu,
            gamma,
            simulated,
        } => {
            let grids = SweepGrids {
                alphas: opt_list("alphas", alphas)?,
                horizons: opt_list("horizons", horizons)?,
                gamma_r: opt_list("gamma-r", gamma_r)?,
                gamma_sigma: opt_list("gamma-sigma", gamma_sigma)?,
                mu: opt_list("mu", mu)?,
                gamma: opt_list("gamma", gamma)?,
                simulated: *simulated,
            };
            (commands::sweep(&resolved, *kind, grids)?, Format::Csv)
        }
        Command::Figure1 { alphas, threshold } => (
            commands::figure1(&resolved, &parse_list("alphas", alphas)?, *threshold)?,
            Format::Csv,
        ),
    };

    let format = c.format.unwrap_or(default_format);
    write_output(c.out.as_deref(), &artifact.output.render(format, &resolved))?;
    if let (Some(path), Some(svg)) = (&c.svg, &artifact.svg) {
        std::fs::write(path, svg).map_err(|e| CliError::io(path, e))?;
    }
    if !failing.is_empty() {
        return Err(CliError::Verification {
            failed: failing.len(),
            total,
            failing,
        });
    }
    Ok(())
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.render().to_string();
            return fail(&CliError::Usage(msg.trim().to_string()));
        }
    };
    let result = match cli.common.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::Resource(format!("cannot start thread pool: {e}"))),
        },
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
