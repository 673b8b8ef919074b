//! Label generation from a captured frame.
//!
//! For every object near the camera: build its box corners, project them,
//! test each projected corner against the depth map, and emit a KITTI row
//! when enough corners are unoccluded and the visible box is tall enough.

mod kitti;
mod label;
mod lidar;
mod visibility;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kitti::{parse_kitti, to_kitti_string, write_kitti, KittiParseError};
pub use label::{compute_label, occluded_level, Dimensions, KittiLabel, LabelError};
pub use lidar::{annotate_lidar, count_points_in_boxes, LidarObjectRecord};
pub use visibility::{assess_visibility, VisibilityReport};

use crate::frame::{Category, FrameDump, ObjectState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationConfig {
    /// Objects whose box center is farther than this from the camera are skipped.
    pub radius_m: f64,
    pub min_visible_vertices: u32,
    /// Labels need a clipped box strictly taller than this many pixels.
    pub min_pixel_height: f64,
    /// Side length of the square pixel window checked around each projected corner.
    pub vertex_neighborhood: u32,
    pub depth_tolerance_m: f64,
    pub face_samples_per_axis: u32,
    pub categories: BTreeSet<Category>,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        Self {
            radius_m: 120.0,
            min_visible_vertices: 3,
            min_pixel_height: 25.0,
            vertex_neighborhood: 3,
            depth_tolerance_m: 0.15,
            face_samples_per_axis: 5,
            categories: [Category::Car, Category::Pedestrian].into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("invalid annotation config: {0}")]
pub struct ConfigError(pub String);

impl AnnotationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError(format!("{name} must be positive, got {v}")))
            }
        };
        positive("radius_m", self.radius_m)?;
        positive("min_pixel_height", self.min_pixel_height)?;
        positive("depth_tolerance_m", self.depth_tolerance_m)?;
        positive("min_visible_vertices", self.min_visible_vertices as f64)?;
        positive("face_samples_per_axis", self.face_samples_per_axis as f64)?;
        if self.vertex_neighborhood.is_multiple_of(2) {
            return Err(ConfigError(format!(
                "vertex_neighborhood must be odd, got {}",
                self.vertex_neighborhood
            )));
        }
        if self.categories.is_empty() {
            return Err(ConfigError("categories must not be empty".into()));
        }
        Ok(())
    }
}

/// Why an object did not produce a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// The capturing vehicle itself.
    Ego,
    WrongCategory,
    OutOfRadius,
    TooFewVisibleVertices,
    TooShort,
    DegenerateProjection,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::Ego => "ego",
            RejectReason::WrongCategory => "wrong_category",
            RejectReason::OutOfRadius => "out_of_radius",
            RejectReason::TooFewVisibleVertices => "too_few_visible_vertices",
            RejectReason::TooShort => "too_short",
            RejectReason::DegenerateProjection => "degenerate_projection",
        }
    }
}

fn screen_candidate(obj: &ObjectState, frame: &FrameDump, cfg: &AnnotationConfig) -> Result<(), RejectReason> {
    let camera = frame.camera_pose_world().translation;
    if frame.meta.ego_object_id == Some(obj.object_id) || obj.bbox.contains(&camera) {
        return Err(RejectReason::Ego);
    }
    if !cfg.categories.contains(&obj.category) {
        return Err(RejectReason::WrongCategory);
    }
    if (obj.bbox.center - camera).norm() > cfg.radius_m {
        return Err(RejectReason::OutOfRadius);
    }
    Ok(())
}

/// Objects of a configured category whose box center lies within
/// `radius_m` of the camera, excluding the ego vehicle. Input order is kept.
pub fn select_candidates<'a>(frame: &'a FrameDump, cfg: &AnnotationConfig) -> Vec<&'a ObjectState> {
    frame
        .objects
        .iter()
        .filter(|o| screen_candidate(o, frame, cfg).is_ok())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedObject {
    pub object_id: u64,
    pub label: KittiLabel,
    pub report: VisibilityReport,
}

/// Full per-frame outcome, including rejected objects.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameAnnotation {
    /// Ascending by object id.
    pub objects: Vec<AnnotatedObject>,
    pub rejects: Vec<(u64, RejectReason)>,
}

impl FrameAnnotation {
    pub fn labels(&self) -> Vec<KittiLabel> {
        self.objects.iter().map(|o| o.label.clone()).collect()
    }
}

pub fn annotate_frame_detailed(frame: &FrameDump, cfg: &AnnotationConfig) -> FrameAnnotation {
    let mut order: Vec<&ObjectState> = frame.objects.iter().collect();
    order.sort_by_key(|o| o.object_id);

    let mut out = FrameAnnotation::default();
    for obj in order {
        if let Err(reason) = screen_candidate(obj, frame, cfg) {
            out.rejects.push((obj.object_id, reason));
            continue;
        }
        let report = assess_visibility(obj, frame, cfg);
        if report.visible_vertex_count < cfg.min_visible_vertices {
            out.rejects.push((obj.object_id, RejectReason::TooFewVisibleVertices));
            continue;
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(report.pixel_height > cfg.min_pixel_height) {
            out.rejects.push((obj.object_id, RejectReason::TooShort));
            continue;
        }
        match compute_label(obj, &report, frame) {
            Ok(label) => out.objects.push(AnnotatedObject { object_id: obj.object_id, label, report }),
            Err(LabelError::DegenerateProjection) => {
                out.rejects.push((obj.object_id, RejectReason::DegenerateProjection))
            }
        }
    }
    out
}

/// KITTI labels for one frame, ordered by object id.
pub fn annotate_frame(frame: &FrameDump, cfg: &AnnotationConfig) -> Vec<KittiLabel> {
    annotate_frame_detailed(frame, cfg).labels()
}
