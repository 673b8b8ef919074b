use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Subcommand;
use serde::Serialize;
use synthkit_core::curate::{build_staged_splits, build_strv_split, summarize, PoolSummary, SampleRecord, SizeMetric, SplitManifest};

use crate::annotate::Metric;
use crate::config::RunConfig;
use crate::io::{emit, pretty, read_jsonl, to_jsonl, write};

#[derive(Subcommand)]
pub enum Command {
    /// Recompute difficulty bins for sample records (samples.jsonl from `annotate`).
    Bin {
        #[arg(required = true)]
        samples: Vec<PathBuf>,
        #[arg(long, value_enum)]
        size_metric: Option<Metric>,
        /// Rebinned records as JSONL; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Simulated frames for training, real frames for validation.
    SplitStrv {
        #[arg(long, required = true, num_args = 1..)]
        sim: Vec<PathBuf>,
        #[arg(long, required = true, num_args = 1..)]
        real: Vec<PathBuf>,
        /// Directory for strv_train.jsonl and strv_validation.jsonl.
        #[arg(long)]
        out: PathBuf,
        /// Keep a seeded uniform fraction of the simulated pool.
        #[arg(long)]
        sim_cap_ratio: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// One manifest per difficulty bin, for easy-to-hard training.
    SplitStaged {
        #[arg(required = true)]
        samples: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn read_pool(paths: &[PathBuf]) -> Result<Vec<SampleRecord>> {
    let mut pool = Vec::new();
    for p in paths {
        pool.extend(read_jsonl::<SampleRecord>(p)?);
    }
    Ok(pool)
}

#[derive(Serialize)]
struct ManifestInfo {
    name: String,
    path: PathBuf,
    entries: usize,
}

#[derive(Serialize)]
struct SplitReport {
    seed: u64,
    manifests: Vec<ManifestInfo>,
}

const SPLIT_REPORT: &str = "split_report.json";

fn write_manifests<'a>(out: &Path, seed: u64, manifests: impl IntoIterator<Item = &'a SplitManifest>, json: bool) -> Result<()> {
    let mut report = SplitReport { seed, manifests: Vec::new() };
    for m in manifests {
        let path = out.join(format!("{}.jsonl", m.name));
        write(&path, &m.to_jsonl())?;
        report.manifests.push(ManifestInfo { name: m.name.clone(), path, entries: m.len() });
    }
    write(&out.join(SPLIT_REPORT), &pretty(&report))?;
    if json {
        print!("{}", pretty(&report));
    } else {
        for m in &report.manifests {
            println!("{}: {} entries -> {}", m.name, m.entries, m.path.display());
        }
    }
    Ok(())
}

fn render_summary(s: &PoolSummary) -> String {
    let mut out = format!("records: {}\n", s.total);
    for (title, map) in [("bin", &s.by_bin), ("source", &s.by_source), ("weather", &s.by_weather)] {
        for (k, v) in map {
            out.push_str(&format!("{title} {k}: {v}\n"));
        }
    }
    out
}

pub fn run(cmd: Command, json: bool) -> Result<()> {
    match cmd {
        Command::Bin { samples, size_metric, out, config } => {
            let cfg = RunConfig::load(config.as_deref())?;
            let metric = size_metric.map(SizeMetric::from).unwrap_or(cfg.size_metric);
            let mut pool = read_pool(&samples)?;
            for r in &mut pool {
                r.rebin(metric);
            }
            let summary = summarize(&pool);
            match out {
                Some(path) => {
                    write(&path, &to_jsonl(&pool))?;
                    print!("{}", if json { pretty(&summary) } else { render_summary(&summary) });
                }
                None => {
                    emit(None, &to_jsonl(&pool))?;
                    eprint!("{}", render_summary(&summary));
                }
            }
        }
        Command::SplitStrv { sim, real, out, sim_cap_ratio, seed, config } => {
            let cfg = RunConfig::load(config.as_deref())?;
            let seed = seed.or(cfg.seed).unwrap_or(0);
            let ratio = sim_cap_ratio.or(cfg.sim_cap_ratio);
            let (train, validation) = build_strv_split(&read_pool(&sim)?, &read_pool(&real)?, ratio, seed)?;
            write_manifests(&out, seed, [&train, &validation], json)?;
        }
        Command::SplitStaged { samples, out, seed, config } => {
            let cfg = RunConfig::load(config.as_deref())?;
            let seed = seed.or(cfg.seed).unwrap_or(0);
            let splits = build_staged_splits(&read_pool(&samples)?, seed)?;
            write_manifests(&out, seed, splits.iter(), json)?;
        }
    }
    Ok(())
}
