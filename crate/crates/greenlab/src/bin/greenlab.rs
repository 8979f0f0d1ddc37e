//! Command-line driver: run one configured experiment and write its outputs.
//!
//! ```text
//! greenlab <experiment> --config <path> [--workers N] [--out DIR]
//! ```
//!
//! The positional experiment name must agree with the `experiment` field of
//! the JSON config; requiring both catches the classic mistake of pointing a
//! batch script at the wrong file.  Setting the `GREENLAB_SEED` environment
//! variable overrides the config's seed (the manifest records which one was
//! used).  Validation and solver failures exit nonzero; numerical
//! degeneracies (clipped potentials, non-escaping orbits, ...) are reported
//! as notes and exit zero.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use greenlab::experiments::{seed_override_from_env, ExperimentConfig, RunOptions};
use greenlab::{Error, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "greenlab",
    version,
    about = "Run a deterministic Green-function / invariant-current experiment",
    after_help = concat!(
        "Experiments:\n  ",
        "green-grid, pullback-converge, lelong, backward-sample,\n  ",
        "invariance-check, contraction-probe, henon-green, henon-pullback\n\n",
        "The config is a JSON object: {\"experiment\": ..., \"map\": ...,\n",
        "\"params\": ..., \"seed\": ..., \"out\": ...}. See the library's\n",
        "`experiments` module documentation for the per-experiment params.",
    )
)]
struct Cli {
    /// Experiment to run; must match the config's `experiment` field.
    experiment: String,

    /// Path to the JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Thread count for the run (default: one per core).
    #[arg(long, value_name = "N")]
    workers: Option<usize>,

    /// Output directory; overrides the config's `out` field (default `.`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn run(cli: &Cli) -> greenlab::Result<()> {
    let kind = ExperimentKind::parse(&cli.experiment).ok_or_else(|| Error::Validation {
        field: "experiment".into(),
        reason: format!(
            "unknown experiment `{}`; expected one of: {}",
            cli.experiment,
            ExperimentKind::ALL
                .iter()
                .map(|k| k.name())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    })?;
    let config = ExperimentConfig::load(&cli.config)?;
    if config.kind != kind {
        return Err(Error::Validation {
            field: "experiment".into(),
            reason: format!(
                "command line asks for `{}` but {} declares `{}`",
                kind.name(),
                cli.config.display(),
                config.kind.name()
            ),
        });
    }

    let options = RunOptions {
        workers: cli.workers,
        seed_override: seed_override_from_env()?,
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    let report = greenlab::run_experiment(&config, &out_dir, &options)?;
    for path in &report.outputs {
        println!("wrote {}", path.display());
    }
    for flag in &report.flags {
        println!("note: {flag}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
