use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Pose, Vec3};
use crate::scalar::Scalar;

/// Points with camera-frame depth at or below this distance (meters) do not project.
pub const NEAR_PLANE: f64 = 0.1;

/// Ideal pinhole intrinsics. Pixel `(i, j)` has its center at `u = i, v = j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct CameraIntrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum IntrinsicsError {
    #[error("focal lengths must be positive and finite")]
    BadFocalLength,
    #[error("image size must be at least 1x1")]
    EmptyImage,
    #[error("principal point must lie inside the image")]
    PrincipalPointOutside,
}

impl<T: Scalar> CameraIntrinsics<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, width: u32, height: u32) -> Result<Self, IntrinsicsError> {
        let k = Self { fx, fy, cx, cy, width, height };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), IntrinsicsError> {
        if !(self.fx > T::zero() && self.fy > T::zero() && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(IntrinsicsError::BadFocalLength);
        }
        if self.width < 1 || self.height < 1 {
            return Err(IntrinsicsError::EmptyImage);
        }
        let w = T::lit(self.width as f64);
        let h = T::lit(self.height as f64);
        if !(self.cx >= T::zero() && self.cx < w && self.cy >= T::zero() && self.cy < h) {
            return Err(IntrinsicsError::PrincipalPointOutside);
        }
        Ok(())
    }

    /// Projects a camera-frame point. `None` at or behind the near plane.
    #[inline]
    pub fn project_camera(&self, p: &Vec3<T>) -> Option<Projection<T>> {
        if p.z <= T::lit(NEAR_PLANE) {
            return None;
        }
        Some(Projection {
            u: self.fx * p.x / p.z + self.cx,
            v: self.fy * p.y / p.z + self.cy,
            depth: p.z,
        })
    }

    /// Camera-frame point at depth `z` along the ray through pixel `(u, v)`.
    #[inline]
    pub fn unproject(&self, u: T, v: T, z: T) -> Vec3<T> {
        Vec3::new((u - self.cx) * z / self.fx, (v - self.cy) * z / self.fy, z)
    }

    /// Nearest pixel index for a sub-pixel coordinate, if inside the image.
    #[inline]
    pub fn pixel_index(&self, u: T, v: T) -> Option<(u32, u32)> {
        let (ur, vr) = (u.round(), v.round());
        if ur < T::zero() || vr < T::zero() {
            return None;
        }
        let (ui, vi) = (ur.to_u64()?, vr.to_u64()?);
        (ui < self.width as u64 && vi < self.height as u64).then_some((ui as u32, vi as u32))
    }
}

/// Pixel coordinates and camera-frame depth of a projected point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<T> {
    pub u: T,
    pub v: T,
    pub depth: T,
}

/// Projects a world point through a camera whose pose in the world is `camera_pose_world`.
pub fn project<T: Scalar>(
    point_world: &Vec3<T>,
    camera_pose_world: &Pose<T>,
    k: &CameraIntrinsics<T>,
) -> Option<Projection<T>> {
    k.project_camera(&camera_pose_world.apply_inverse(point_world))
}

/// Inverse of [`project`]: world point at camera depth `z` behind pixel `(u, v)`.
pub fn unproject<T: Scalar>(u: T, v: T, z: T, camera_pose_world: &Pose<T>, k: &CameraIntrinsics<T>) -> Vec3<T> {
    camera_pose_world.apply(&k.unproject(u, v, z))
}
