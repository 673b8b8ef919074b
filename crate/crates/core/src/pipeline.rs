//! Whole-dump annotation with a bounded worker pool.
//!
//! Frames are annotated independently and collated by frame id, so the
//! output is identical for any worker count.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{annotate_frame_detailed, annotate_lidar, to_kitti_string, AnnotationConfig, ConfigError, RejectReason};
use crate::curate::{SampleRecord, SizeMetric};
use crate::frame::{list_frame_ids, load_frame_with_rig, load_rig, FrameDump, FrameError};

pub const LABELS_DIR: &str = "labels";
pub const LIDAR_GT_DIR: &str = "lidar_gt";
pub const SAMPLES_FILE: &str = "samples.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no frames in {0}")]
    NoFrames(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("worker pool: {0}")]
    WorkerPool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectEntry {
    pub object_id: u64,
    pub reason: RejectReason,
}

/// Everything produced for one frame, already serialized where it goes to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutput {
    pub frame_id: u64,
    pub kitti: String,
    pub lidar_json: String,
    pub sample: SampleRecord,
    pub rejects: Vec<RejectEntry>,
    /// Soft problems that did not stop annotation.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameNote {
    pub frame_id: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSummary {
    pub frames: usize,
    pub labels: usize,
    pub rejects_by_reason: BTreeMap<String, usize>,
    pub soft_errors: Vec<FrameNote>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DumpAnnotation {
    /// Ascending by frame id.
    pub frames: Vec<FrameOutput>,
}

/// Annotates one loaded frame.
pub fn annotate_loaded(dump_id: &str, frame: &FrameDump, cfg: &AnnotationConfig, metric: SizeMetric) -> FrameOutput {
    let ann = annotate_frame_detailed(frame, cfg);
    let kitti = to_kitti_string(&ann.labels());
    let mut lidar_json = serde_json::to_string_pretty(&annotate_lidar(frame, cfg)).expect("lidar records serialize");
    lidar_json.push('\n');
    let mut notes = Vec::new();
    if frame.depth.is_none() {
        notes.push("depth map missing; occlusion level unknown".to_string());
    }
    FrameOutput {
        frame_id: frame.meta.frame_id,
        kitti,
        lidar_json,
        sample: SampleRecord::from_annotation(dump_id, frame, &ann, metric),
        rejects: ann.rejects.into_iter().map(|(object_id, reason)| RejectEntry { object_id, reason }).collect(),
        notes,
    }
}

/// Loads and annotates every frame of a dump on `workers` threads (0 = one
/// per core). The first failing frame in frame-id order is reported.
pub fn annotate_dump(
    root: &Path,
    dump_id: &str,
    cfg: &AnnotationConfig,
    metric: SizeMetric,
    workers: usize,
) -> Result<DumpAnnotation, PipelineError> {
    cfg.validate()?;
    let ids = match list_frame_ids(root) {
        Err(FrameError::MissingFile { .. }) => Vec::new(),
        other => other?,
    };
    if ids.is_empty() {
        return Err(PipelineError::NoFrames(root.display().to_string()));
    }
    let rig = load_rig(root)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::WorkerPool(e.to_string()))?;
    let results: Vec<Result<FrameOutput, FrameError>> = pool.install(|| {
        ids.par_iter()
            .map(|&id| load_frame_with_rig(root, &rig, id).map(|f| annotate_loaded(dump_id, &f, cfg, metric)))
            .collect()
    });
    let frames = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(DumpAnnotation { frames })
}

impl DumpAnnotation {
    pub fn summary(&self) -> AnnotationSummary {
        let mut rejects_by_reason = BTreeMap::new();
        let mut soft_errors = Vec::new();
        let mut labels = 0;
        for f in &self.frames {
            labels += f.sample.object_count;
            for r in &f.rejects {
                *rejects_by_reason.entry(r.reason.as_str().to_string()).or_insert(0) += 1;
            }
            soft_errors.extend(f.notes.iter().map(|m| FrameNote { frame_id: f.frame_id, message: m.clone() }));
        }
        AnnotationSummary { frames: self.frames.len(), labels, rejects_by_reason, soft_errors }
    }

    pub fn samples_jsonl(&self) -> String {
        let mut s = String::new();
        for f in &self.frames {
            s.push_str(&serde_json::to_string(&f.sample).expect("sample records serialize"));
            s.push('\n');
        }
        s
    }

    /// Writes `labels/<id>.txt`, `lidar_gt/<id>.json`, `samples.jsonl` and
    /// `summary.json` under `out`.
    pub fn write(&self, out: &Path) -> io::Result<()> {
        let labels = out.join(LABELS_DIR);
        let lidar = out.join(LIDAR_GT_DIR);
        fs::create_dir_all(&labels)?;
        fs::create_dir_all(&lidar)?;
        for f in &self.frames {
            fs::write(labels.join(format!("{}.txt", f.frame_id)), &f.kitti)?;
            fs::write(lidar.join(format!("{}.json", f.frame_id)), &f.lidar_json)?;
        }
        fs::write(out.join(SAMPLES_FILE), self.samples_jsonl())?;
        let mut summary = serde_json::to_string_pretty(&self.summary()).expect("summary serializes");
        summary.push('\n');
        fs::write(out.join(SUMMARY_FILE), summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::write_synthetic_dump;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn worker_count_does_not_change_output() {
        let dir = tempfile::tempdir().unwrap();
        write_synthetic_dump(dir.path(), &mut ChaCha8Rng::seed_from_u64(3), 6, 12, (160, 120)).unwrap();
        let cfg = AnnotationConfig::default();
        let one = annotate_dump(dir.path(), "d", &cfg, SizeMetric::Area, 1).unwrap();
        let four = annotate_dump(dir.path(), "d", &cfg, SizeMetric::Area, 4).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.frames.iter().map(|f| f.frame_id).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
        let s = one.summary();
        assert_eq!(s.frames, 6);
        assert_eq!(s.rejects_by_reason.values().sum::<usize>() + s.labels, 72);
    }

    #[test]
    fn empty_dump_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = annotate_dump(dir.path(), "d", &AnnotationConfig::default(), SizeMetric::Area, 1).unwrap_err();
        assert!(matches!(err, PipelineError::NoFrames(_)));
    }
}
