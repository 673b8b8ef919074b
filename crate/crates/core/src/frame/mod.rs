//! The interchange dump written by the simulator bridge and read by the
//! annotation pipeline.
//!
//! ```text
//! dump_root/
//!   rig.json                  SensorRig
//!   frames/<frame_id>/
//!     meta.json               FrameMeta
//!     rgb.png                 8-bit RGB
//!     depth.f32               "DPF1" | u32 LE width | u32 LE height | f32 LE meters, row-major
//!     seg.png                 8-bit single-channel category ids
//!     lidar.bin               N x (f32 x, f32 y, f32 z, f32 intensity) LE, lidar frame
//!     objects.json            [ObjectState]
//! ```

mod codec;
mod dump;
mod types;
mod validate;

pub use codec::{decode_depth, decode_lidar, encode_depth, encode_lidar, DEPTH_MAGIC};
pub use dump::{frame_dir, list_frame_ids, load_frame, load_frame_with_rig, load_rig, write_frame, write_rig};
pub use types::{
    CameraSensor, Category, DepthMap, FrameDump, FrameMeta, LidarPoint, LidarScan, LidarSensor, ObjectState,
    OutOfBounds, SegMap, SensorRig, Source, DEFAULT_POINTS_PER_SCAN,
};
pub use validate::{validate_dump, Issue, IssueKind, ValidationReport};

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("{}: missing file", .path.display())]
    MissingFile { path: PathBuf },
    #[error("{}: malformed: {reason}", .path.display())]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("{}: invariant violated: {reason}", .path.display())]
    InvariantViolation { path: PathBuf, reason: String },
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl FrameError {
    pub(crate) fn malformed(path: &Path, reason: impl Into<String>) -> Self {
        Self::MalformedHeader { path: path.to_path_buf(), reason: reason.into() }
    }

    pub(crate) fn invariant(path: &Path, reason: impl Into<String>) -> Self {
        Self::InvariantViolation { path: path.to_path_buf(), reason: reason.into() }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            Self::MissingFile { path: path.to_path_buf() }
        } else {
            Self::Io { path: path.to_path_buf(), source }
        }
    }

    pub fn path(&self) -> &Path {
        match self {
            Self::MissingFile { path }
            | Self::MalformedHeader { path, .. }
            | Self::InvariantViolation { path, .. }
            | Self::Io { path, .. } => path,
        }
    }

    pub fn kind(&self) -> IssueKind {
        match self {
            Self::MissingFile { .. } => IssueKind::MissingFile,
            Self::MalformedHeader { .. } => IssueKind::MalformedHeader,
            Self::InvariantViolation { .. } => IssueKind::InvariantViolation,
            Self::Io { .. } => IssueKind::Io,
        }
    }
}
