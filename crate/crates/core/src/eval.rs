//! Detection evaluation: per-frame matching, per-track accident metrics and
//! merging of staged (easy → hard) detector outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::Category;
use crate::geometry::rect_iou;
use crate::Rect2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Minimum IoU for a detection to match a ground-truth box.
    pub iou_threshold: f64,
    /// Minimum IoU at which a later-stage detection duplicates an earlier one.
    pub merge_iou_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { iou_threshold: 0.5, merge_iou_threshold: 0.5 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{name} = {value} must lie in (0, 1]")]
    Threshold { name: &'static str, value: f64 },
    #[error("invalid detection: {0}")]
    Detection(String),
    #[error("stage list {position} holds a detection marked stage {found}")]
    StageOrder { position: usize, found: u32 },
    #[error("invalid track {track_id}: {reason}")]
    Track { track_id: u64, reason: String },
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        for (name, value) in [("iou_threshold", self.iou_threshold), ("merge_iou_threshold", self.merge_iou_threshold)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(EvalError::Threshold { name, value });
            }
        }
        Ok(())
    }
}

/// One detector output. Serialized flat:
/// `{frame_id, category, left, top, right, bottom, confidence, stage}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame_id: u64,
    pub category: Category,
    #[serde(flatten)]
    pub rect: Rect2,
    pub confidence: f64,
    /// 1 = easiest stage; 0 when the detector is not staged.
    #[serde(default)]
    pub stage: u32,
}

impl Detection {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !self.rect.is_valid() {
            return Err(EvalError::Detection(format!("frame {}: degenerate rect {:?}", self.frame_id, self.rect)));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(EvalError::Detection(format!(
                "frame {}: confidence {} outside [0, 1]",
                self.frame_id, self.confidence
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtBox {
    pub category: Category,
    pub rect: Rect2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackBox {
    pub frame_id: u64,
    #[serde(flatten)]
    pub rect: Rect2,
}

/// A ground-truth object over the frames where it is annotated. Frames not
/// listed are gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtTrack {
    pub track_id: u64,
    pub category: Category,
    pub boxes: Vec<TrackBox>,
}

impl GtTrack {
    pub fn validate(&self) -> Result<(), EvalError> {
        let err = |reason: String| EvalError::Track { track_id: self.track_id, reason };
        if self.boxes.is_empty() {
            return Err(err("no frames".into()));
        }
        for w in self.boxes.windows(2) {
            if w[1].frame_id <= w[0].frame_id {
                return Err(err(format!("frame {} follows {}", w[1].frame_id, w[0].frame_id)));
            }
        }
        if let Some(b) = self.boxes.iter().find(|b| !b.rect.is_valid()) {
            return Err(err(format!("degenerate rect in frame {}", b.frame_id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub detection: usize,
    pub ground_truth: usize,
    pub iou: f64,
}

/// Indices into the inputs of [`match_frame`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatch {
    /// In matching order (descending confidence).
    pub matches: Vec<Match>,
    pub false_positives: Vec<usize>,
    pub misses: Vec<usize>,
}

/// Greedy matching within one frame.
///
/// Detections are visited by descending confidence (ties by input order).
/// Each takes the unmatched same-category ground truth with the highest IoU
/// at or above `iou_threshold`; equal IoUs go to the lower ground-truth index.
pub fn match_frame(gts: &[GtBox], dets: &[Detection], cfg: &EvalConfig) -> FrameMatch {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.total_cmp(&dets[a].confidence));
    let mut taken = vec![false; gts.len()];
    let mut out = FrameMatch::default();
    for di in order {
        let d = &dets[di];
        let mut best: Option<(usize, f64)> = None;
        for (gi, g) in gts.iter().enumerate() {
            if taken[gi] || g.category != d.category {
                continue;
            }
            let iou = rect_iou(&g.rect, &d.rect);
            if iou >= cfg.iou_threshold && best.is_none_or(|(_, b)| iou > b) {
                best = Some((gi, iou));
            }
        }
        match best {
            Some((gi, iou)) => {
                taken[gi] = true;
                out.matches.push(Match { detection: di, ground_truth: gi, iou });
            }
            None => out.false_positives.push(di),
        }
    }
    out.misses = (0..gts.len()).filter(|&gi| !taken[gi]).collect();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccidentMetrics {
    pub first_detection_frame: Option<u64>,
    /// Percentage of the track's frames in which it was detected.
    pub coverage_pct: f64,
    /// Mean length of maximal runs of consecutive detected frames; 0 if never detected.
    pub avg_consecutive_run: f64,
    pub detected_frames: usize,
    pub total_frames: usize,
}

/// Metrics from a per-frame detected/missed trace. `frames` must be strictly
/// increasing; a jump in frame id ends a run.
pub fn trace_metrics(frames: &[u64], detected: &[bool]) -> AccidentMetrics {
    assert_eq!(frames.len(), detected.len(), "one flag per frame");
    let mut runs: Vec<usize> = Vec::new();
    let mut prev: Option<u64> = None;
    for (&f, &hit) in frames.iter().zip(detected) {
        if hit {
            match (prev, runs.last_mut()) {
                (Some(p), Some(len)) if p + 1 == f => *len += 1,
                _ => runs.push(1),
            }
            prev = Some(f);
        } else {
            prev = None;
        }
    }
    let detected_frames: usize = runs.iter().sum();
    let total_frames = frames.len();
    AccidentMetrics {
        first_detection_frame: frames.iter().zip(detected).find(|(_, d)| **d).map(|(f, _)| *f),
        coverage_pct: if total_frames == 0 { 0.0 } else { 100.0 * detected_frames as f64 / total_frames as f64 },
        avg_consecutive_run: if runs.is_empty() { 0.0 } else { detected_frames as f64 / runs.len() as f64 },
        detected_frames,
        total_frames,
    }
}

fn by_frame(dets: &[Detection]) -> BTreeMap<u64, Vec<Detection>> {
    let mut m: BTreeMap<u64, Vec<Detection>> = BTreeMap::new();
    for d in dets {
        m.entry(d.frame_id).or_default().push(d.clone());
    }
    m
}

/// Detection metrics for one ground-truth track. A frame counts as detected
/// when [`match_frame`] pairs the track's box with some detection of that frame.
pub fn accident_metrics(track: &GtTrack, dets: &[Detection], cfg: &EvalConfig) -> AccidentMetrics {
    let frames = by_frame(dets);
    let empty = Vec::new();
    let ids: Vec<u64> = track.boxes.iter().map(|b| b.frame_id).collect();
    let detected: Vec<bool> = track
        .boxes
        .iter()
        .map(|b| {
            let gt = [GtBox { category: track.category, rect: b.rect }];
            let d = frames.get(&b.frame_id).unwrap_or(&empty);
            !match_frame(&gt, d, cfg).matches.is_empty()
        })
        .collect();
    trace_metrics(&ids, &detected)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackReport {
    pub track_id: u64,
    pub category: Category,
    #[serde(flatten)]
    pub metrics: AccidentMetrics,
}

/// Metrics for every track, ordered by track id.
pub fn evaluate_tracks(tracks: &[GtTrack], dets: &[Detection], cfg: &EvalConfig) -> Vec<TrackReport> {
    let mut out: Vec<TrackReport> = tracks
        .iter()
        .map(|t| TrackReport { track_id: t.track_id, category: t.category, metrics: accident_metrics(t, dets, cfg) })
        .collect();
    out.sort_by_key(|r| r.track_id);
    out
}

pub fn format_track_table(reports: &[TrackReport]) -> String {
    let mut s = String::from("track  category    first  coverage%  avg_run  detected/total\n");
    for r in reports {
        let first = r.metrics.first_detection_frame.map_or("-".to_string(), |f| f.to_string());
        let _ = writeln!(
            s,
            "{:<6} {:<11} {:>5}  {:>9.1}  {:>7.2}  {}/{}",
            r.track_id,
            r.category.as_str(),
            first,
            r.metrics.coverage_pct,
            r.metrics.avg_consecutive_run,
            r.metrics.detected_frames,
            r.metrics.total_frames
        );
    }
    s
}

/// Checks that every detection in the `i`-th list is marked stage `i + 1`
/// or left unstaged (0).
pub fn check_stage_order(stages: &[Vec<Detection>]) -> Result<(), EvalError> {
    for (i, stage) in stages.iter().enumerate() {
        if let Some(d) = stage.iter().find(|d| d.stage != 0 && d.stage as usize != i + 1) {
            return Err(EvalError::StageOrder { position: i + 1, found: d.stage });
        }
    }
    Ok(())
}

/// Combines staged detector outputs, earliest stage first.
///
/// Every first-stage detection is kept. A detection from a later stage is
/// dropped when a detection kept from an earlier stage has the same frame and
/// category and an IoU of at least `merge_iou_threshold` with it. Output is
/// ordered by stage, then input order. Any number of stages is accepted.
pub fn cascade_merge(stages: &[Vec<Detection>], cfg: &EvalConfig) -> Vec<Detection> {
    let mut kept: Vec<Detection> = Vec::new();
    for stage in stages {
        let earlier = kept.len();
        for d in stage {
            let duplicate = kept[..earlier].iter().any(|k| {
                k.frame_id == d.frame_id && k.category == d.category && rect_iou(&k.rect, &d.rect) >= cfg.merge_iou_threshold
            });
            if !duplicate {
                kept.push(d.clone());
            }
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(l: f64, t: f64, r: f64, b: f64) -> Rect2 {
        Rect2::new(l, t, r, b).unwrap()
    }

    fn det(frame_id: u64, category: Category, r: Rect2, confidence: f64, stage: u32) -> Detection {
        Detection { frame_id, category, rect: r, confidence, stage }
    }

    #[test]
    fn perfect_match() {
        let r = rect(0.0, 0.0, 10.0, 10.0);
        let m = match_frame(&[GtBox { category: Category::Car, rect: r }], &[det(0, Category::Car, r, 0.9, 0)], &EvalConfig::default());
        assert_eq!(m.matches.len(), 1);
        assert!(m.false_positives.is_empty() && m.misses.is_empty());
    }

    #[test]
    fn below_threshold_is_fp_and_miss() {
        // iou = 40 / 100 = 0.4
        let g = rect(0.0, 0.0, 10.0, 10.0);
        let d = rect(0.0, 0.0, 10.0, 4.0);
        assert!((rect_iou(&g, &d) - 0.4).abs() < 1e-12);
        let m = match_frame(&[GtBox { category: Category::Car, rect: g }], &[det(0, Category::Car, d, 0.9, 0)], &EvalConfig::default());
        assert_eq!((m.matches.len(), m.false_positives, m.misses), (0, vec![0], vec![0]));
    }

    #[test]
    fn never_crosses_categories() {
        let r = rect(0.0, 0.0, 10.0, 10.0);
        let m = match_frame(
            &[GtBox { category: Category::Pedestrian, rect: r }],
            &[det(0, Category::Car, r, 0.9, 0)],
            &EvalConfig::default(),
        );
        assert!(m.matches.is_empty());
    }

    #[test]
    fn higher_confidence_wins_contested_gt() {
        let g = rect(0.0, 0.0, 10.0, 10.0);
        let dets = [det(0, Category::Car, g, 0.3, 0), det(0, Category::Car, rect(0.0, 0.0, 10.0, 9.0), 0.8, 0)];
        let m = match_frame(&[GtBox { category: Category::Car, rect: g }], &dets, &EvalConfig::default());
        assert_eq!(m.matches[0].detection, 1);
        assert_eq!(m.false_positives, vec![0]);
    }

    #[test]
    fn trace_example() {
        let frames: Vec<u64> = (0..10).collect();
        let detected: Vec<bool> = frames.iter().map(|f| [2, 3, 4, 7, 8].contains(f)).collect();
        let m = trace_metrics(&frames, &detected);
        assert_eq!(m.first_detection_frame, Some(2));
        assert_eq!(m.coverage_pct, 50.0);
        assert_eq!(m.avg_consecutive_run, 2.5);
    }

    #[test]
    fn trace_never_and_always() {
        let frames: Vec<u64> = (5..15).collect();
        let m = trace_metrics(&frames, &[false; 10]);
        assert_eq!((m.first_detection_frame, m.coverage_pct, m.avg_consecutive_run), (None, 0.0, 0.0));
        let m = trace_metrics(&frames, &[true; 10]);
        assert_eq!((m.first_detection_frame, m.coverage_pct, m.avg_consecutive_run), (Some(5), 100.0, 10.0));
    }

    #[test]
    fn gap_splits_run() {
        let m = trace_metrics(&[1, 2, 4, 5], &[true; 4]);
        assert_eq!(m.avg_consecutive_run, 2.0);
        assert_eq!(m.coverage_pct, 100.0);
    }

    #[test]
    fn metrics_from_detections() {
        let r = rect(10.0, 10.0, 50.0, 90.0);
        let track = GtTrack {
            track_id: 3,
            category: Category::Pedestrian,
            boxes: (0..10).map(|f| TrackBox { frame_id: f, rect: r }).collect(),
        };
        track.validate().unwrap();
        let dets: Vec<Detection> = [2u64, 3, 4, 7, 8]
            .iter()
            .map(|&f| det(f, Category::Pedestrian, r, 0.7, 0))
            .chain([det(5, Category::Car, r, 0.9, 0), det(6, Category::Pedestrian, rect(200.0, 0.0, 240.0, 80.0), 0.9, 0)])
            .collect();
        let m = accident_metrics(&track, &dets, &EvalConfig::default());
        assert_eq!((m.first_detection_frame, m.coverage_pct, m.avg_consecutive_run), (Some(2), 50.0, 2.5));
        let table = format_track_table(&evaluate_tracks(&[track], &dets, &EvalConfig::default()));
        assert!(table.lines().nth(1).unwrap().starts_with("3 "));
    }

    #[test]
    fn merge_rules() {
        let cfg = EvalConfig::default();
        let a = rect(0.0, 0.0, 10.0, 10.0);
        let easy = vec![det(0, Category::Car, a, 0.9, 1)];
        let medium = vec![
            det(0, Category::Car, rect(0.0, 0.0, 10.0, 9.0), 0.8, 2),
            det(0, Category::Pedestrian, a, 0.8, 2),
            det(1, Category::Car, a, 0.8, 2),
        ];
        let merged = cascade_merge(&[easy.clone(), medium.clone()], &cfg);
        assert_eq!(merged, vec![easy[0].clone(), medium[1].clone(), medium[2].clone()]);
        assert_eq!(cascade_merge(&[vec![], medium.clone()], &cfg), medium);
        assert_eq!(cascade_merge(std::slice::from_ref(&medium), &cfg), medium);
        assert!(cascade_merge(&[], &cfg).is_empty());
        assert!(check_stage_order(&[easy.clone(), medium.clone()]).is_ok());
        assert_eq!(check_stage_order(&[medium, easy]), Err(EvalError::StageOrder { position: 1, found: 2 }));
    }

    #[test]
    fn detection_json_is_flat() {
        let d = det(4, Category::Car, rect(1.0, 2.0, 3.0, 4.0), 0.5, 2);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"frame_id":4,"category":"Car","left":1.0,"top":2.0,"right":3.0,"bottom":4.0,"confidence":0.5,"stage":2}"#);
        assert_eq!(serde_json::from_str::<Detection>(&s).unwrap(), d);
    }

    #[test]
    fn config_and_input_validation() {
        assert!(EvalConfig { iou_threshold: 0.0, ..Default::default() }.validate().is_err());
        assert!(EvalConfig { merge_iou_threshold: 1.0, ..Default::default() }.validate().is_ok());
        assert!(det(0, Category::Car, rect(0.0, 0.0, 1.0, 1.0), 1.5, 0).validate().is_err());
        let t = GtTrack { track_id: 1, category: Category::Car, boxes: vec![] };
        assert!(t.validate().is_err());
    }
}
