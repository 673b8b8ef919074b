use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Subcommand;
use serde::Serialize;
use synthkit_core::eval::{cascade_merge, check_stage_order, evaluate_tracks, format_track_table, Detection, GtTrack};

use crate::config::RunConfig;
use crate::io::{emit, pretty, read_jsonl, to_jsonl, write};

#[derive(Subcommand)]
pub enum Command {
    /// First-detection frame, coverage and run length per ground-truth track.
    Metrics {
        /// Ground-truth tracks, one JSON object per line.
        #[arg(long)]
        tracks: PathBuf,
        /// Detections, one JSON object per line.
        #[arg(long)]
        detections: PathBuf,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Merge staged detector outputs given easiest stage first.
    Merge {
        #[arg(required = true)]
        stages: Vec<PathBuf>,
        /// Merged detections as JSONL; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    let dets: Vec<Detection> = read_jsonl(path)?;
    for (i, d) in dets.iter().enumerate() {
        d.validate().with_context(|| format!("{}:{}", path.display(), i + 1))?;
    }
    Ok(dets)
}

#[derive(Serialize)]
struct MergeReport {
    stage_counts: Vec<usize>,
    kept: usize,
}

pub fn run(cmd: Command, json: bool) -> Result<()> {
    match cmd {
        Command::Metrics { tracks, detections, out, config } => {
            let cfg = RunConfig::load(config.as_deref())?;
            let gt: Vec<GtTrack> = read_jsonl(&tracks)?;
            for t in &gt {
                t.validate().with_context(|| tracks.display().to_string())?;
            }
            let reports = evaluate_tracks(&gt, &read_detections(&detections)?, &cfg.eval);
            if let Some(path) = &out {
                write(path, &pretty(&reports))?;
            }
            print!("{}", if json { pretty(&reports) } else { format_track_table(&reports) });
        }
        Command::Merge { stages, out, config } => {
            let cfg = RunConfig::load(config.as_deref())?;
            let lists = stages.iter().map(|p| read_detections(p)).collect::<Result<Vec<_>>>()?;
            check_stage_order(&lists)?;
            let merged = cascade_merge(&lists, &cfg.eval);
            let report = MergeReport { stage_counts: lists.iter().map(Vec::len).collect(), kept: merged.len() };
            emit(out.as_deref(), &to_jsonl(&merged))?;
            let text = if json {
                pretty(&report)
            } else {
                format!("stages {:?}: kept {} detections\n", report.stage_counts, report.kept)
            };
            // keep stdout clean for the merged detections when they go there
            if out.is_some() {
                print!("{text}");
            } else {
                eprint!("{text}");
            }
        }
    }
    Ok(())
}
