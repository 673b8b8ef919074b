//! `synthkit`: simulator captures in, KITTI datasets, manifests, scenarios and
//! evaluation reports out.
//!
//! Exit status is 0 on success, 1 for unusable input and 2 when a dump breaks
//! an interchange invariant. Set `SYNTHKIT_LOG` (e.g. `info`, `debug`) for logs.

mod annotate;
mod config;
mod curate;
mod eval;
mod io;
mod scenario;
mod synth;
mod validate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use synthkit_core::frame::FrameError;
use synthkit_core::pipeline::PipelineError;

#[derive(Parser)]
#[command(name = "synthkit", version, about = "Build KITTI-format datasets from simulator captures")]
struct Cli {
    /// Print the JSON report on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate KITTI labels and lidar ground truth for every frame of a dump.
    Annotate(annotate::Args),
    /// Difficulty binning and train/validation manifests.
    #[command(subcommand)]
    Curate(curate::Command),
    /// Weather and accident scenario manifests.
    #[command(subcommand)]
    Scenario(scenario::Command),
    /// Detection metrics and staged-output merging.
    #[command(subcommand)]
    Eval(eval::Command),
    /// Check a dump against the interchange format.
    Validate(validate::Args),
    /// Write a synthetic dump of random box scenes.
    Synth(synth::Args),
}

/// Ends the run with a specific status after printing `message`.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        let frame = cause.downcast_ref::<FrameError>().or_else(|| match cause.downcast_ref::<PipelineError>() {
            Some(PipelineError::Frame(e)) => Some(e),
            _ => None,
        });
        if let Some(FrameError::InvariantViolation { .. }) = frame {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SYNTHKIT_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let json = cli.json;
    let result = match cli.command {
        Command::Annotate(a) => annotate::run(a, json),
        Command::Curate(c) => curate::run(c, json),
        Command::Scenario(c) => scenario::run(c, json),
        Command::Eval(c) => eval::run(c, json),
        Command::Validate(a) => validate::run(a, json),
        Command::Synth(a) => synth::run(a, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
