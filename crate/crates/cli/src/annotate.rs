use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use synthkit_core::curate::SizeMetric;
use synthkit_core::pipeline::{annotate_dump, AnnotationSummary, SUMMARY_FILE};

use crate::config::RunConfig;
use crate::io::pretty;

#[derive(clap::Args)]
pub struct Args {
    /// Dump root (holds rig.json and frames/).
    pub dump_root: PathBuf,
    /// Output directory for labels/, lidar_gt/, samples.jsonl and summary.json.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to the configured value or one per core.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Name recorded in frame references; defaults to the dump directory name.
    #[arg(long)]
    pub dump_id: Option<String>,
    /// Box measurement used for difficulty bins in samples.jsonl.
    #[arg(long, value_enum)]
    pub size_metric: Option<Metric>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum Metric {
    Area,
    Height,
}

impl From<Metric> for SizeMetric {
    fn from(m: Metric) -> Self {
        match m {
            Metric::Area => SizeMetric::Area,
            Metric::Height => SizeMetric::Height,
        }
    }
}

pub fn default_dump_id(root: &Path) -> String {
    root.canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "dump".to_string())
}

pub fn run(args: Args, json: bool) -> Result<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let workers = args.workers.or(cfg.workers).unwrap_or(0);
    let dump_id = args.dump_id.or(cfg.dump_id).unwrap_or_else(|| default_dump_id(&args.dump_root));
    let metric = args.size_metric.map(SizeMetric::from).unwrap_or(cfg.size_metric);
    log::info!("annotating {} as {dump_id:?} with {workers} workers", args.dump_root.display());

    let result = annotate_dump(&args.dump_root, &dump_id, &cfg.annotation, metric, workers)?;
    result.write(&args.out).with_context(|| format!("writing outputs under {}", args.out.display()))?;
    let summary = result.summary();
    if json {
        print!("{}", pretty(&summary));
    } else {
        print!("{}", render(&summary, &args.out.join(SUMMARY_FILE)));
    }
    Ok(())
}

fn render(s: &AnnotationSummary, summary_path: &Path) -> String {
    let mut out = format!("frames: {}\nlabels: {}\n", s.frames, s.labels);
    for (reason, n) in &s.rejects_by_reason {
        out.push_str(&format!("rejected {reason}: {n}\n"));
    }
    for note in &s.soft_errors {
        out.push_str(&format!("frame {}: {}\n", note.frame_id, note.message));
    }
    out.push_str(&format!("summary: {}\n", summary_path.display()));
    out
}
