//! Tools for turning simulator captures into KITTI-format detection datasets.
//!
//! * [`geometry`]: frames, poses, pinhole projection, oriented boxes, IoU.
//!   Generic over the scalar type; the aliases below fix it to `f64`.
//! * [`frame`]: the on-disk interchange dump written by the simulator bridge.
//! * [`annotate`]: label generation (candidate selection, depth-buffer
//!   visibility, KITTI rows) and lidar object ground truth.
//! * [`curate`]: difficulty binning and train/validation manifests.
//! * [`scenario`]: weather and accident scenario manifests.
//! * [`eval`]: detection matching, accident metrics, cascade merging.
//! * [`pipeline`]: whole-dump annotation on a worker pool.
//! * [`synth`]: a small ray-cast renderer for building synthetic dumps.

pub mod annotate;
pub mod curate;
pub mod eval;
pub mod frame;
pub mod pipeline;
pub mod geometry;
pub mod scalar;
pub mod scenario;
pub mod synth;

pub use scalar::Scalar;

pub type Vec3 = geometry::Vec3<f64>;
pub type Mat3 = geometry::Mat3<f64>;
pub type Pose = geometry::Pose<f64>;
pub type CameraIntrinsics = geometry::CameraIntrinsics<f64>;
pub type OrientedBox3 = geometry::OrientedBox3<f64>;
pub type Rect2 = geometry::Rect2<f64>;

pub type Vec3f = geometry::Vec3<f32>;
pub type Posef = geometry::Pose<f32>;
pub type Rect2f = geometry::Rect2<f32>;
