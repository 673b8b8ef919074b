//! Difficulty binning and dataset manifests.
//!
//! Bin edges (occlusion fraction, object count, box size in pixels):
//!
//! | bin    | occlusion     | objects | size         |
//! |--------|---------------|---------|--------------|
//! | easy   | < 0.20        | < 3     | > 400        |
//! | medium | [0.20, 0.50]  | 3..=6   | [100, 400]   |
//! | hard   | > 0.50        | > 6     | [25, 100)    |
//!
//! Sizes below 25 leave an object ungraded. An object takes the harder of
//! its occlusion and size bins; a frame takes the hardest of its count bin
//! and its graded objects' bins.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::FrameAnnotation;
use crate::frame::{FrameDump, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifficultyBin {
    Easy,
    Medium,
    Hard,
    Ungraded,
}

impl DifficultyBin {
    pub const GRADED: [DifficultyBin; 3] = [DifficultyBin::Easy, DifficultyBin::Medium, DifficultyBin::Hard];

    pub fn as_str(&self) -> &'static str {
        match self {
            DifficultyBin::Easy => "easy",
            DifficultyBin::Medium => "medium",
            DifficultyBin::Hard => "hard",
            DifficultyBin::Ungraded => "ungraded",
        }
    }

    pub fn is_graded(&self) -> bool {
        *self != DifficultyBin::Ungraded
    }

    /// Harder of two graded bins.
    fn harder(self, other: Self) -> Self {
        debug_assert!(self.is_graded() && other.is_graded());
        self.max(other)
    }
}

impl fmt::Display for DifficultyBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which box measurement the size thresholds apply to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMetric {
    #[default]
    Area,
    Height,
}

pub fn bin_occlusion(fraction: f64) -> DifficultyBin {
    if fraction < 0.20 {
        DifficultyBin::Easy
    } else if fraction <= 0.50 {
        DifficultyBin::Medium
    } else {
        DifficultyBin::Hard
    }
}

pub fn bin_size(size: f64) -> DifficultyBin {
    if size > 400.0 {
        DifficultyBin::Easy
    } else if size >= 100.0 {
        DifficultyBin::Medium
    } else if size >= 25.0 {
        DifficultyBin::Hard
    } else {
        DifficultyBin::Ungraded
    }
}

pub fn bin_count(count: usize) -> DifficultyBin {
    match count {
        0..=2 => DifficultyBin::Easy,
        3..=6 => DifficultyBin::Medium,
        _ => DifficultyBin::Hard,
    }
}

pub fn bin_object(occlusion_fraction: f64, bbox_pixel_size: f64) -> DifficultyBin {
    match bin_size(bbox_pixel_size) {
        DifficultyBin::Ungraded => DifficultyBin::Ungraded,
        size => size.harder(bin_occlusion(occlusion_fraction)),
    }
}

pub fn bin_frame(object_bins: &[DifficultyBin], object_count: usize) -> DifficultyBin {
    object_bins
        .iter()
        .copied()
        .filter(DifficultyBin::is_graded)
        .reduce(DifficultyBin::harder)
        .map_or(DifficultyBin::Ungraded, |worst| worst.harder(bin_count(object_count)))
}

/// Identifies a frame across dumps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameRef {
    pub dump: String,
    pub frame_id: u64,
}

impl fmt::Display for FrameRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.dump, self.frame_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectStats {
    pub occlusion_fraction: f64,
    pub bbox_pixel_area: f64,
    pub bbox_pixel_height: f64,
}

impl ObjectStats {
    pub fn size(&self, metric: SizeMetric) -> f64 {
        match metric {
            SizeMetric::Area => self.bbox_pixel_area,
            SizeMetric::Height => self.bbox_pixel_height,
        }
    }

    pub fn bin(&self, metric: SizeMetric) -> DifficultyBin {
        bin_object(self.occlusion_fraction, self.size(metric))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub frame_ref: FrameRef,
    pub source: Source,
    pub weather_tag: String,
    pub object_count: usize,
    pub objects: Vec<ObjectStats>,
    pub frame_bin: DifficultyBin,
}

impl SampleRecord {
    pub fn new(frame_ref: FrameRef, source: Source, weather_tag: String, objects: Vec<ObjectStats>, metric: SizeMetric) -> Self {
        let mut r = Self { frame_ref, source, weather_tag, object_count: objects.len(), objects, frame_bin: DifficultyBin::Ungraded };
        r.rebin(metric);
        r
    }

    /// Recomputes `object_count` and `frame_bin` from the per-object stats.
    pub fn rebin(&mut self, metric: SizeMetric) {
        self.object_count = self.objects.len();
        let bins: Vec<DifficultyBin> = self.objects.iter().map(|o| o.bin(metric)).collect();
        self.frame_bin = bin_frame(&bins, self.object_count);
    }

    pub fn from_annotation(dump: &str, frame: &FrameDump, ann: &FrameAnnotation, metric: SizeMetric) -> Self {
        let objects = ann
            .objects
            .iter()
            .map(|o| ObjectStats {
                occlusion_fraction: o.report.occlusion_fraction,
                bbox_pixel_area: o.label.bbox.area(),
                bbox_pixel_height: o.label.bbox.height(),
            })
            .collect();
        Self::new(
            FrameRef { dump: dump.to_string(), frame_id: frame.meta.frame_id },
            frame.meta.source,
            frame.meta.weather_tag.clone(),
            objects,
            metric,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestRole {
    Train,
    Validation,
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub frame_ref: FrameRef,
    pub source: Source,
    pub weather_tag: String,
    pub frame_bin: DifficultyBin,
}

impl From<&SampleRecord> for ManifestEntry {
    fn from(r: &SampleRecord) -> Self {
        Self { frame_ref: r.frame_ref.clone(), source: r.source, weather_tag: r.weather_tag.clone(), frame_bin: r.frame_bin }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub name: String,
    pub seed: u64,
    pub role: ManifestRole,
    pub entries: Vec<ManifestEntry>,
}

impl SplitManifest {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("manifest entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CurateError {
    #[error("{0} pool is empty")]
    EmptyPool(&'static str),
    #[error("{frame_ref} has source {found:?}, not allowed in the {pool} pool")]
    SourceMismatch { frame_ref: FrameRef, found: Source, pool: &'static str },
    #[error("{0} appears more than once")]
    DuplicateFrameRef(FrameRef),
    #[error("{0} appears in both pools")]
    OverlappingPools(FrameRef),
    #[error("sim_cap_ratio {0} outside [0, 1]")]
    InvalidRatio(f64),
}

fn check_unique(pool: &[SampleRecord]) -> Result<BTreeSet<&FrameRef>, CurateError> {
    let mut seen = BTreeSet::new();
    for r in pool {
        if !seen.insert(&r.frame_ref) {
            return Err(CurateError::DuplicateFrameRef(r.frame_ref.clone()));
        }
    }
    Ok(seen)
}

/// Simulated-training / real-validation arrangement.
///
/// Train holds the sim and enhanced records (a seeded uniform subsample of
/// `floor(ratio * |sim_pool|)` when `sim_cap_ratio` is set, kept in input
/// order); validation holds every real record.
pub fn build_strv_split(
    sim_pool: &[SampleRecord],
    real_pool: &[SampleRecord],
    sim_cap_ratio: Option<f64>,
    seed: u64,
) -> Result<(SplitManifest, SplitManifest), CurateError> {
    if sim_pool.is_empty() {
        return Err(CurateError::EmptyPool("sim"));
    }
    if real_pool.is_empty() {
        return Err(CurateError::EmptyPool("real"));
    }
    if let Some(r) = sim_pool.iter().find(|r| !r.source.is_synthetic()) {
        return Err(CurateError::SourceMismatch { frame_ref: r.frame_ref.clone(), found: r.source, pool: "sim" });
    }
    if let Some(r) = real_pool.iter().find(|r| r.source != Source::Real) {
        return Err(CurateError::SourceMismatch { frame_ref: r.frame_ref.clone(), found: r.source, pool: "real" });
    }
    let sim_refs = check_unique(sim_pool)?;
    let real_refs = check_unique(real_pool)?;
    if let Some(r) = sim_refs.intersection(&real_refs).next() {
        return Err(CurateError::OverlappingPools((*r).clone()));
    }

    let train_records: Vec<&SampleRecord> = match sim_cap_ratio {
        None => sim_pool.iter().collect(),
        Some(ratio) => {
            if !(0.0..=1.0).contains(&ratio) {
                return Err(CurateError::InvalidRatio(ratio));
            }
            let take = (ratio * sim_pool.len() as f64).floor() as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = rand::seq::index::sample(&mut rng, sim_pool.len(), take).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| &sim_pool[i]).collect()
        }
    };

    let train = SplitManifest {
        name: "strv_train".into(),
        seed,
        role: ManifestRole::Train,
        entries: train_records.into_iter().map(ManifestEntry::from).collect(),
    };
    let validation = SplitManifest {
        name: "strv_validation".into(),
        seed,
        role: ManifestRole::Validation,
        entries: real_pool.iter().map(ManifestEntry::from).collect(),
    };
    Ok((train, validation))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagedSplits {
    pub easy: SplitManifest,
    pub medium: SplitManifest,
    pub hard: SplitManifest,
}

impl StagedSplits {
    pub fn iter(&self) -> impl Iterator<Item = &SplitManifest> {
        [&self.easy, &self.medium, &self.hard].into_iter()
    }
}

/// One training manifest per difficulty stage; ungraded frames are dropped.
/// Each manifest is shuffled with its own seeded stream.
pub fn build_staged_splits(pool: &[SampleRecord], seed: u64) -> Result<StagedSplits, CurateError> {
    check_unique(pool)?;
    let stage = |bin: DifficultyBin, stream: u64| {
        let mut entries: Vec<ManifestEntry> = pool
            .iter()
            .filter(|r| r.frame_bin == bin)
            .map(ManifestEntry::from)
            .collect();
        entries.sort_by(|a, b| a.frame_ref.cmp(&b.frame_ref));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        entries.shuffle(&mut rng);
        SplitManifest { name: format!("stage_{bin}"), seed, role: ManifestRole::Train, entries }
    };
    Ok(StagedSplits {
        easy: stage(DifficultyBin::Easy, 1),
        medium: stage(DifficultyBin::Medium, 2),
        hard: stage(DifficultyBin::Hard, 3),
    })
}

/// Record counts by bin, source and weather.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PoolSummary {
    pub total: usize,
    pub by_bin: BTreeMap<String, usize>,
    pub by_source: BTreeMap<String, usize>,
    pub by_weather: BTreeMap<String, usize>,
}

pub fn summarize(pool: &[SampleRecord]) -> PoolSummary {
    let mut s = PoolSummary { total: pool.len(), ..Default::default() };
    for r in pool {
        *s.by_bin.entry(r.frame_bin.to_string()).or_default() += 1;
        let source = serde_json::to_value(r.source).expect("source serializes");
        *s.by_source.entry(source.as_str().unwrap_or_default().to_string()).or_default() += 1;
        *s.by_weather.entry(r.weather_tag.clone()).or_default() += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use DifficultyBin::*;

    #[test]
    fn object_examples() {
        assert_eq!(bin_object(0.10, 500.0), Easy);
        assert_eq!(bin_object(0.30, 500.0), Medium);
        assert_eq!(bin_object(0.10, 60.0), Hard);
        assert_eq!(bin_object(0.90, 24.9), Ungraded);
    }

    #[test]
    fn edges() {
        assert_eq!(bin_occlusion(0.1999), Easy);
        assert_eq!(bin_occlusion(0.20), Medium);
        assert_eq!(bin_occlusion(0.50), Medium);
        assert_eq!(bin_occlusion(0.5001), Hard);
        assert_eq!(bin_size(401.0), Easy);
        assert_eq!(bin_size(400.0), Medium);
        assert_eq!(bin_size(100.0), Medium);
        assert_eq!(bin_size(99.99), Hard);
        assert_eq!(bin_size(25.0), Hard);
        assert_eq!(bin_size(24.99), Ungraded);
        assert_eq!(bin_count(2), Easy);
        assert_eq!(bin_count(3), Medium);
        assert_eq!(bin_count(6), Medium);
        assert_eq!(bin_count(7), Hard);
    }

    #[test]
    fn frame_examples() {
        assert_eq!(bin_frame(&[Easy, Easy], 2), Easy);
        assert_eq!(bin_frame(&[Easy; 7], 7), Hard);
        assert_eq!(bin_frame(&[Hard, Easy], 2), Hard);
        assert_eq!(bin_frame(&[], 0), Ungraded);
        assert_eq!(bin_frame(&[Ungraded, Ungraded], 2), Ungraded);
        assert_eq!(bin_frame(&[Ungraded, Easy, Ungraded], 3), Medium);
    }

    /// Hardest-wins over every combination of up to three object bins.
    #[test]
    fn frame_bin_exhaustive() {
        let all = [Easy, Medium, Hard, Ungraded];
        let rank = |b: DifficultyBin| match b {
            Easy => 0,
            Medium => 1,
            Hard => 2,
            Ungraded => -1,
        };
        for n in 0..=3usize {
            for combo in 0..4usize.pow(n as u32) {
                let bins: Vec<_> = (0..n).map(|i| all[(combo / 4usize.pow(i as u32)) % 4]).collect();
                for count in [n, n + 3, n + 7] {
                    let worst = bins.iter().map(|b| rank(*b)).max().unwrap_or(-1);
                    let expected = if worst < 0 {
                        Ungraded
                    } else {
                        let c = if count < 3 { 0 } else if count <= 6 { 1 } else { 2 };
                        [Easy, Medium, Hard][worst.max(c) as usize]
                    };
                    assert_eq!(bin_frame(&bins, count), expected, "{bins:?} count {count}");
                    let mut rev = bins.clone();
                    rev.reverse();
                    assert_eq!(bin_frame(&rev, count), expected);
                }
            }
        }
    }

    #[test]
    fn height_metric_switch() {
        let o = ObjectStats { occlusion_fraction: 0.0, bbox_pixel_area: 30.0 * 30.0, bbox_pixel_height: 30.0 };
        assert_eq!(o.bin(SizeMetric::Area), Easy);
        assert_eq!(o.bin(SizeMetric::Height), Hard);
    }

    fn rec(dump: &str, id: u64, source: Source, bin: DifficultyBin) -> SampleRecord {
        SampleRecord {
            frame_ref: FrameRef { dump: dump.into(), frame_id: id },
            source,
            weather_tag: "clear_noon".into(),
            object_count: 0,
            objects: vec![],
            frame_bin: bin,
        }
    }

    #[test]
    fn strv_basic() {
        let sim: Vec<_> = (0..100).map(|i| rec("sim", i, Source::Sim, Easy)).collect();
        let real: Vec<_> = (0..50).map(|i| rec("real", i, Source::Real, Easy)).collect();
        let (train, val) = build_strv_split(&sim, &real, None, 1).unwrap();
        assert_eq!((train.len(), val.len()), (100, 50));
        let (train, _) = build_strv_split(&sim, &real, Some(0.5), 1).unwrap();
        assert_eq!(train.len(), 50);
        let (again, _) = build_strv_split(&sim, &real, Some(0.5), 1).unwrap();
        assert_eq!(train.to_jsonl(), again.to_jsonl());
        let (other, _) = build_strv_split(&sim, &real, Some(0.5), 2).unwrap();
        assert_ne!(train.entries, other.entries);
        let (t, _) = build_strv_split(&sim, &real, Some(0.333), 1).unwrap();
        assert_eq!(t.len(), 33);
    }

    #[test]
    fn strv_errors() {
        let sim = vec![rec("s", 0, Source::Sim, Easy)];
        let real = vec![rec("r", 0, Source::Real, Easy)];
        assert_eq!(build_strv_split(&[], &real, None, 0), Err(CurateError::EmptyPool("sim")));
        assert_eq!(build_strv_split(&sim, &[], None, 0), Err(CurateError::EmptyPool("real")));
        assert!(matches!(build_strv_split(&real, &real, None, 0), Err(CurateError::SourceMismatch { .. })));
        assert!(matches!(build_strv_split(&sim, &sim, None, 0), Err(CurateError::SourceMismatch { .. })));
        assert_eq!(build_strv_split(&sim, &real, Some(1.5), 0), Err(CurateError::InvalidRatio(1.5)));
        let dup = vec![rec("s", 0, Source::Sim, Easy), rec("s", 0, Source::Enhanced, Easy)];
        assert!(matches!(build_strv_split(&dup, &real, None, 0), Err(CurateError::DuplicateFrameRef(_))));
        let enhanced = vec![rec("s", 1, Source::Enhanced, Hard)];
        assert_eq!(build_strv_split(&enhanced, &real, None, 0).unwrap().0.len(), 1);
    }

    #[test]
    fn staged_singletons_and_ungraded() {
        let pool = vec![rec("a", 0, Source::Sim, Easy), rec("a", 1, Source::Sim, Medium), rec("a", 2, Source::Real, Hard)];
        let s = build_staged_splits(&pool, 3).unwrap();
        assert_eq!((s.easy.len(), s.medium.len(), s.hard.len()), (1, 1, 1));
        assert_eq!(s.hard.entries[0].frame_ref.frame_id, 2);
        let none: Vec<_> = (0..5).map(|i| rec("a", i, Source::Sim, Ungraded)).collect();
        let s = build_staged_splits(&none, 3).unwrap();
        assert!(s.iter().all(|m| m.is_empty()));
    }

    #[test]
    fn summary_counts() {
        let pool = vec![rec("a", 0, Source::Sim, Easy), rec("a", 1, Source::Real, Easy)];
        let s = summarize(&pool);
        assert_eq!(s.total, 2);
        assert_eq!(s.by_bin["easy"], 2);
        assert_eq!(s.by_source["sim"], 1);
        assert_eq!(s.by_source["real"], 1);
    }
}
