//! `covplan` binary: argument parsing and exit-code mapping around the
//! library commands. Exit codes: 0 success, 2 when the planning instance
//! is infeasible or a requested cover does not exist, 1 on any other
//! error (bad arguments, missing files, solver limits).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use covplan::commands;
use covplan::support;
use covplan_core::baseline::BaselineError;
use covplan_core::planner::PlannerError;

#[derive(Parser)]
#[command(
    name = "covplan",
    version,
    about = "3D coverage planning: visibility tables, optimizing missions, ablations, baselines"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Learn the cell-to-facet visibility table for a scenario
    Precompute {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory (visibility.tab, table_stats.csv)
        #[arg(long)]
        out: PathBuf,
        /// Camera poses sampled per grid cell
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Override the scenario seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the optimizing planner mission
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        table: PathBuf,
        /// Output directory (mission.csv, summary.json, trajectory.xyz, cover_times.csv)
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the viewpoint-sampling + spline-tracking baseline mission
    Baseline {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Candidate viewpoints sampled around the object
        #[arg(long, default_value_t = 200)]
        viewpoints: usize,
        /// Rolling-horizon length of the tracking controller
        #[arg(long, default_value_t = 5)]
        track_horizon: usize,
    },
    /// Paired with/without-visibility-table ablation across FOV sizes
    Ablate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Paired random starts per FOV scale
        #[arg(long, default_value_t = 5)]
        trials: usize,
        /// Comma-separated FOV scale factors
        #[arg(long, default_value = "0.75,1.0,1.5")]
        fov_scales: String,
        /// Camera poses sampled per grid cell when learning each table
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Override the scenario seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Mean completion steps and solve times across planning horizons
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated horizon lengths
        #[arg(long, default_value = "1,2,3,4")]
        horizons: String,
        /// Random starts per horizon (start k is shared across horizons)
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Override the scenario seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Paired planner-vs-baseline trials on random facet subsets
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Facets per random subset
        #[arg(long, default_value_t = 5)]
        facets: usize,
        /// Candidate viewpoints in the shared baseline pool
        #[arg(long, default_value_t = 300)]
        viewpoints: usize,
        /// Rolling-horizon length of the baseline tracker
        #[arg(long, default_value_t = 5)]
        track_horizon: usize,
        /// Override the scenario seed
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .with_context(|| format!("bad list entry {t:?}"))
        })
        .collect()
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad list entry {t:?}"))
        })
        .collect()
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Precompute {
            scenario,
            out,
            samples,
            seed,
        } => {
            commands::precompute(&scenario, &out, samples, seed)?;
        }
        Cmd::Plan {
            scenario,
            table,
            out,
        } => {
            commands::plan(&scenario, &table, &out)?;
        }
        Cmd::Baseline {
            scenario,
            table,
            out,
            viewpoints,
            track_horizon,
        } => {
            commands::baseline(&scenario, &table, &out, viewpoints, track_horizon)?;
        }
        Cmd::Ablate {
            scenario,
            out,
            trials,
            fov_scales,
            samples,
            seed,
        } => {
            let scales = parse_f64_list(&fov_scales).context("parsing --fov-scales")?;
            commands::ablate(&scenario, &out, trials, &scales, samples, seed)?;
        }
        Cmd::Sweep {
            scenario,
            table,
            out,
            horizons,
            trials,
            seed,
        } => {
            let hs = parse_usize_list(&horizons).context("parsing --horizons")?;
            commands::sweep(&scenario, &table, &out, &hs, trials, seed)?;
        }
        Cmd::Compare {
            scenario,
            table,
            out,
            trials,
            facets,
            viewpoints,
            track_horizon,
            seed,
        } => {
            commands::compare(
                &scenario,
                &table,
                &out,
                trials,
                facets,
                viewpoints,
                track_horizon,
                seed,
            )?;
        }
    }
    Ok(())
}

/// 2 when the failure is an infeasible planning instance, 1 otherwise.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(p) = cause.downcast_ref::<PlannerError>() {
            if matches!(p, PlannerError::Infeasible(_)) {
                return 2;
            }
        }
        if let Some(b) = cause.downcast_ref::<BaselineError>() {
            if matches!(b, BaselineError::Uncoverable(_)) {
                return 2;
            }
        }
    }
    1
}

fn main() -> ExitCode {
    support::init_thread_pool();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are successes; bad usage is a plain error.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}
