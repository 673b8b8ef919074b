//! Coordinate frames, rigid transforms, pinhole projection, oriented boxes
//! and rectangle overlap.
//!
//! Conventions: the world frame is right-handed with up = +z. The camera
//! frame follows KITTI: +x right, +y down, +z forward along the optical axis.

mod angle;
mod camera;
mod obb;
mod pose;
mod rect;
mod vec3;

pub use angle::wrap_angle;
pub use camera::{project, unproject, CameraIntrinsics, IntrinsicsError, Projection, NEAR_PLANE};
pub use obb::{box_vertices, point_in_oriented_box, yaw_rotation, BoxError, OrientedBox3};
pub use pose::{compose, invert, Mat3, Pose, PoseError};
pub use rect::{rect_iou, Rect2};
pub use vec3::Vec3;
