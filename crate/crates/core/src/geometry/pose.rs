use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Vec3;
use crate::scalar::Scalar;

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Scalar> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn from_row_major(v: [T; 9]) -> Self {
        Self([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    pub fn from_columns(c0: Vec3<T>, c1: Vec3<T>, c2: Vec3<T>) -> Self {
        Self([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    pub fn to_row_major(&self) -> [T; 9] {
        let m = &self.0;
        [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Self([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// `self^T * v` without materializing the transpose.
    pub fn mul_transpose_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Self(out)
    }

    pub fn determinant(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn column(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    /// Largest per-entry deviation of `R^T R` from the identity.
    pub fn orthonormality_error(&self) -> T {
        let rtr = self.transpose().mul_mat(self);
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { T::one() } else { T::zero() };
                worst = worst.max((rtr.0[i][j] - expected).abs());
            }
        }
        worst
    }

    pub fn is_rotation(&self) -> bool {
        let tol = T::orthonormal_tolerance();
        self.0.iter().flatten().all(|v| v.is_finite())
            && self.orthonormality_error() <= tol
            && (self.determinant() - T::one()).abs() <= tol
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PoseError {
    #[error("rotation is not orthonormal with determinant +1")]
    NotARotation,
    #[error("translation has non-finite components")]
    NonFiniteTranslation,
}

/// Pose of a child frame expressed in a parent frame:
/// `p_parent = rotation * p_child + translation`.
///
/// Serialized as `{"rotation": [9 floats, row-major], "translation": [3 floats]}`.
/// Deserialization does not check the rotation; call [`Pose::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "PoseRepr<T>", into = "PoseRepr<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Pose<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

#[derive(Serialize, Deserialize)]
struct PoseRepr<T> {
    rotation: [T; 9],
    translation: [T; 3],
}

impl<T: Scalar> From<PoseRepr<T>> for Pose<T> {
    fn from(r: PoseRepr<T>) -> Self {
        Pose {
            rotation: Mat3::from_row_major(r.rotation),
            translation: r.translation.into(),
        }
    }
}

impl<T: Scalar> From<Pose<T>> for PoseRepr<T> {
    fn from(p: Pose<T>) -> Self {
        PoseRepr {
            rotation: p.rotation.to_row_major(),
            translation: p.translation.into(),
        }
    }
}

impl<T: Scalar> Pose<T> {
    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Result<Self, PoseError> {
        let p = Self { rotation, translation };
        p.validate()?;
        Ok(p)
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
        }
    }

    pub fn from_translation(t: Vec3<T>) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: t,
        }
    }

    pub fn validate(&self) -> Result<(), PoseError> {
        if !self.rotation.is_rotation() {
            return Err(PoseError::NotARotation);
        }
        if !self.translation.is_finite() {
            return Err(PoseError::NonFiniteTranslation);
        }
        Ok(())
    }

    /// Maps a point from the child frame into the parent frame.
    pub fn apply(&self, p: &Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    /// Maps a point from the parent frame into the child frame.
    pub fn apply_inverse(&self, p: &Vec3<T>) -> Vec3<T> {
        self.rotation.mul_transpose_vec(&(*p - self.translation))
    }

    pub fn rotate(&self, v: &Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(v)
    }

    /// Pose of a KITTI-convention camera at `position` in a z-up world,
    /// looking horizontally along `heading` (radians, counter-clockwise from +x).
    pub fn camera_looking_along(position: Vec3<T>, heading: T) -> Self {
        let (s, c) = heading.sin_cos();
        let forward = Vec3::new(c, s, T::zero());
        let right = Vec3::new(s, -c, T::zero());
        let down = Vec3::new(T::zero(), T::zero(), -T::one());
        Self {
            rotation: Mat3::from_columns(right, down, forward),
            translation: position,
        }
    }
}

/// `a ∘ b`: if `b` is the pose of frame C in frame B and `a` the pose of B in A,
/// the result is the pose of C in A.
pub fn compose<T: Scalar>(a: &Pose<T>, b: &Pose<T>) -> Pose<T> {
    Pose {
        rotation: a.rotation.mul_mat(&b.rotation),
        translation: a.apply(&b.translation),
    }
}

pub fn invert<T: Scalar>(a: &Pose<T>) -> Pose<T> {
    let rt = a.rotation.transpose();
    Pose {
        translation: -rt.mul_vec(&a.translation),
        rotation: rt,
    }
}
