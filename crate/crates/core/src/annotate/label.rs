use thiserror::Error;

use super::VisibilityReport;
use crate::frame::{Category, FrameDump, ObjectState};
use crate::geometry::wrap_angle;
use crate::{Rect2, Vec3};

/// Box size in KITTI order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensions {
    pub height: f64,
    pub width: f64,
    pub length: f64,
}

/// One KITTI object label row.
#[derive(Debug, Clone, PartialEq)]
pub struct KittiLabel {
    pub object_type: Category,
    /// 0 = fully inside the image, 1 = entirely outside.
    pub truncated: f64,
    /// 0 fully visible, 1 partly occluded, 2 largely occluded, 3 unknown.
    pub occluded: u8,
    /// Observation angle, `[-pi, pi)`.
    pub alpha: f64,
    pub bbox: Rect2,
    pub dimensions: Dimensions,
    /// Bottom center of the box in camera coordinates.
    pub location: Vec3,
    /// Heading about the camera y axis, `[-pi, pi)`.
    pub rotation_y: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum LabelError {
    #[error("projected box has zero area")]
    DegenerateProjection,
}

/// Maps an occlusion fraction to the KITTI occlusion integer.
pub fn occluded_level(occlusion_fraction: f64, depth_available: bool) -> u8 {
    if !depth_available {
        3
    } else if occlusion_fraction < 0.20 {
        0
    } else if occlusion_fraction <= 0.50 {
        1
    } else {
        2
    }
}

pub fn compute_label(obj: &ObjectState, report: &VisibilityReport, frame: &FrameDump) -> Result<KittiLabel, LabelError> {
    let projected = report.projected_rect.ok_or(LabelError::DegenerateProjection)?;
    let clipped = report.clipped_rect.ok_or(LabelError::DegenerateProjection)?;
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN area counts as degenerate
    if !(projected.area() > 0.0) {
        return Err(LabelError::DegenerateProjection);
    }
    let truncated = if clipped == projected {
        0.0
    } else {
        (1.0 - clipped.area() / projected.area()).clamp(0.0, 1.0)
    };

    let cam = frame.camera_pose_world();
    let b = &obj.bbox;
    let bottom = b.center - Vec3::new(0.0, 0.0, b.extent.z);
    let location = cam.apply_inverse(&bottom);
    let forward = cam.rotation.mul_transpose_vec(&b.length_axis());
    let rotation_y = wrap_angle((-forward.z).atan2(forward.x));
    let alpha = wrap_angle(rotation_y - location.x.atan2(location.z));

    Ok(KittiLabel {
        object_type: obj.category,
        truncated,
        occluded: occluded_level(report.occlusion_fraction, report.depth_available),
        alpha,
        bbox: clipped,
        dimensions: Dimensions {
            height: 2.0 * b.extent.z,
            width: 2.0 * b.extent.y,
            length: 2.0 * b.extent.x,
        },
        location,
        rotation_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occlusion_levels() {
        assert_eq!(occluded_level(0.0, true), 0);
        assert_eq!(occluded_level(0.1999, true), 0);
        assert_eq!(occluded_level(0.20, true), 1);
        assert_eq!(occluded_level(0.50, true), 1);
        assert_eq!(occluded_level(0.5001, true), 2);
        assert_eq!(occluded_level(1.0, true), 2);
        assert_eq!(occluded_level(0.0, false), 3);
    }
}
