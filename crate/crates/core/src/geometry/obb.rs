use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{wrap_angle, Mat3, Vec3};
use crate::scalar::Scalar;

/// Rotation about the world up axis (+z).
pub fn yaw_rotation<T: Scalar>(yaw: T) -> Mat3<T> {
    let (s, c) = yaw.sin_cos();
    let (o, z) = (T::one(), T::zero());
    Mat3([[c, -s, z], [s, c, z], [z, z, o]])
}

/// Yaw-only oriented 3D box in world coordinates.
///
/// `extent` holds half-lengths along the box's local length (x), width (y)
/// and height (z) axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct OrientedBox3<T> {
    pub center: Vec3<T>,
    pub extent: Vec3<T>,
    pub yaw: T,
}

#[derive(Debug, Error, PartialEq)]
pub enum BoxError {
    #[error("box extents must be positive and finite")]
    BadExtent,
    #[error("box center must be finite")]
    BadCenter,
    #[error("box yaw must lie in [-pi, pi)")]
    YawOutOfRange,
}

impl<T: Scalar> OrientedBox3<T> {
    /// Builds a box, wrapping `yaw` into `[-pi, pi)`.
    pub fn new(center: Vec3<T>, extent: Vec3<T>, yaw: T) -> Result<Self, BoxError> {
        let b = Self { center, extent, yaw: wrap_angle(yaw) };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), BoxError> {
        if !self.center.is_finite() {
            return Err(BoxError::BadCenter);
        }
        let e = &self.extent;
        if !(e.is_finite() && e.x > T::zero() && e.y > T::zero() && e.z > T::zero()) {
            return Err(BoxError::BadExtent);
        }
        if !(self.yaw >= -T::PI() && self.yaw < T::PI()) {
            return Err(BoxError::YawOutOfRange);
        }
        Ok(())
    }

    pub fn rotation(&self) -> Mat3<T> {
        yaw_rotation(self.yaw)
    }

    /// Unit vector of the box's local length axis in world coordinates.
    pub fn length_axis(&self) -> Vec3<T> {
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c, s, T::zero())
    }

    /// Point in the box's local frame.
    #[inline]
    pub fn to_local(&self, p: &Vec3<T>) -> Vec3<T> {
        let d = *p - self.center;
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    #[inline]
    pub fn contains(&self, p: &Vec3<T>) -> bool {
        let l = self.to_local(p);
        l.x.abs() <= self.extent.x && l.y.abs() <= self.extent.y && l.z.abs() <= self.extent.z
    }

    pub fn vertices(&self) -> [Vec3<T>; 8] {
        box_vertices(self)
    }
}

/// The eight corners `center + R_yaw * (±ex, ±ey, ±ez)`.
///
/// Corner `i` takes the `+` sign on x when bit 0 of `i` is set, on y for bit 1
/// and on z for bit 2; a clear bit selects `-`. Corner 0 is `(-ex, -ey, -ez)`,
/// corner 7 is `(+ex, +ey, +ez)`.
pub fn box_vertices<T: Scalar>(b: &OrientedBox3<T>) -> [Vec3<T>; 8] {
    let r = b.rotation();
    let sign = |bit: bool| if bit { T::one() } else { -T::one() };
    std::array::from_fn(|i| {
        let local = Vec3::new(
            sign(i & 1 != 0) * b.extent.x,
            sign(i & 2 != 0) * b.extent.y,
            sign(i & 4 != 0) * b.extent.z,
        );
        b.center + r.mul_vec(&local)
    })
}

/// Boundary-inclusive containment test.
pub fn point_in_oriented_box<T: Scalar>(p: &Vec3<T>, b: &OrientedBox3<T>) -> bool {
    b.contains(p)
}
