use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::compose;
use crate::{CameraIntrinsics, OrientedBox3, Pose};

pub const DEFAULT_POINTS_PER_SCAN: u64 = 100_000;

/// KITTI object type vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Car,
    Van,
    Truck,
    Pedestrian,
    #[serde(rename = "Person_sitting")]
    PersonSitting,
    Cyclist,
    Tram,
    Misc,
    /// Only meaningful in KITTI label files; never a valid object category.
    DontCare,
}

impl Category {
    pub const ALL: [Category; 9] = [
        Category::Car,
        Category::Van,
        Category::Truck,
        Category::Pedestrian,
        Category::PersonSitting,
        Category::Cyclist,
        Category::Tram,
        Category::Misc,
        Category::DontCare,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Car => "Car",
            Category::Van => "Van",
            Category::Truck => "Truck",
            Category::Pedestrian => "Pedestrian",
            Category::PersonSitting => "Person_sitting",
            Category::Cyclist => "Cyclist",
            Category::Tram => "Tram",
            Category::Misc => "Misc",
            Category::DontCare => "DontCare",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown object type {0:?}")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// Provenance of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Sim,
    Real,
    /// Simulated imagery passed through an image-to-image enhancement step.
    Enhanced,
}

impl Source {
    pub fn is_synthetic(&self) -> bool {
        matches!(self, Source::Sim | Source::Enhanced)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSensor {
    pub intrinsics: CameraIntrinsics,
    pub pose_in_ego: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarSensor {
    pub pose_in_ego: Pose,
    #[serde(default = "default_points_hint")]
    pub points_per_scan_hint: u64,
}

fn default_points_hint() -> u64 {
    DEFAULT_POINTS_PER_SCAN
}

/// Sensor placement and calibration, shared by every frame of a dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorRig {
    pub camera: CameraSensor,
    pub lidar: LidarSensor,
    /// Segmentation id → category name.
    pub category_table: BTreeMap<u8, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub frame_id: u64,
    pub timestamp: f64,
    pub ego_pose_world: Pose,
    #[serde(default = "unspecified")]
    pub weather_tag: String,
    pub source: Source,
    /// Object id of the capturing vehicle, if it appears in `objects.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ego_object_id: Option<u64>,
}

fn unspecified() -> String {
    "unspecified".to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("pixel ({u}, {v}) outside {width}x{height} image")]
pub struct OutOfBounds {
    pub u: i64,
    pub v: i64,
    pub width: u32,
    pub height: u32,
}

/// Per-pixel camera-frame depth of the nearest surface, meters, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
}

impl DepthMap {
    pub fn filled(width: u32, height: u32, value: f32) -> Self {
        Self { width, height, data: vec![value; width as usize * height as usize] }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: f32) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = value;
    }

    /// Nearest-neighbour sample; coordinates round half away from zero.
    pub fn depth_at(&self, u: f64, v: f64) -> Result<f64, OutOfBounds> {
        let (ur, vr) = (u.round(), v.round());
        let oob = || OutOfBounds {
            u: ur as i64,
            v: vr as i64,
            width: self.width,
            height: self.height,
        };
        if !(ur >= 0.0 && vr >= 0.0 && ur < self.width as f64 && vr < self.height as f64) {
            return Err(oob());
        }
        Ok(self.get(ur as u32, vr as u32) as f64)
    }
}

/// Per-pixel segmentation category ids, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SegMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
    pub category_table: BTreeMap<u8, String>,
}

impl SegMap {
    /// First id present in the data but missing from the table.
    pub fn first_unknown_id(&self) -> Option<u8> {
        let mut seen = [false; 256];
        for &id in &self.data {
            seen[id as usize] = true;
        }
        (0..=255u8).find(|&id| seen[id as usize] && !self.category_table.contains_key(&id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarPoint {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub intensity: f32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LidarScan {
    pub points: Vec<LidarPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub object_id: u64,
    pub category: Category,
    #[serde(rename = "box")]
    pub bbox: OrientedBox3,
    /// Heading in the world frame, radians.
    pub forward_yaw: f64,
}

/// One fully decoded capture tick.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDump {
    pub meta: FrameMeta,
    pub rig: SensorRig,
    pub rgb_path: PathBuf,
    /// `None` when the capture has no depth image; labels then report occlusion as unknown.
    pub depth: Option<DepthMap>,
    pub seg: SegMap,
    pub lidar: LidarScan,
    pub objects: Vec<ObjectState>,
}

impl FrameDump {
    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.rig.camera.intrinsics
    }

    pub fn camera_pose_world(&self) -> Pose {
        compose(&self.meta.ego_pose_world, &self.rig.camera.pose_in_ego)
    }

    pub fn lidar_pose_world(&self) -> Pose {
        compose(&self.meta.ego_pose_world, &self.rig.lidar.pose_in_ego)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_names_round_trip() {
        for c in Category::ALL {
            assert_eq!(c.as_str().parse::<Category>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.as_str()));
        }
        assert!("TrafficLight".parse::<Category>().is_err());
    }

    #[test]
    fn depth_sampling() {
        let mut d = DepthMap::filled(4, 3, 1.0);
        d.set(2, 1, 7.5);
        assert_eq!(d.depth_at(2.0, 1.0), Ok(7.5));
        assert_eq!(d.depth_at(2.4, 1.0), Ok(7.5));
        assert_eq!(d.depth_at(1.5, 0.5), Ok(7.5));
        assert_eq!(d.depth_at(-0.4, 0.0), Ok(1.0));
        assert!(d.depth_at(4.0, 1.0).is_err());
        assert!(d.depth_at(0.0, 2.5).is_err());
        assert!(d.depth_at(-0.5, 0.0).is_err());
    }

    #[test]
    fn unknown_seg_id() {
        let seg = SegMap {
            width: 2,
            height: 1,
            data: vec![0, 9],
            category_table: [(0, "unlabeled".to_string())].into(),
        };
        assert_eq!(seg.first_unknown_id(), Some(9));
    }
}
