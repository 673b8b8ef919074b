use std::path::{Path, PathBuf};

use serde::Serialize;

use super::dump::{load_frame_with_rig, scan_frame_dirs, FRAMES_DIR, RIG_FILE};
use super::{frame_dir, load_rig, FrameError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IssueKind {
    MissingFile,
    MalformedHeader,
    InvariantViolation,
    Io,
    /// Non-fatal observation.
    Notice,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub frame_id: Option<u64>,
    pub file: PathBuf,
    pub kind: IssueKind,
    pub message: String,
}

impl Issue {
    fn from_error(frame_id: Option<u64>, e: &FrameError) -> Self {
        Self { frame_id, file: e.path().to_path_buf(), kind: e.kind(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub frame_count: usize,
    pub valid_frames: usize,
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_invariant_violation(&self) -> bool {
        self.errors.iter().any(|i| i.kind == IssueKind::InvariantViolation)
    }
}

/// Non-destructive scan of a dump. A frame counts as valid exactly when
/// [`super::load_frame`] would load it.
pub fn validate_dump(dump_root: &Path) -> ValidationReport {
    let mut report = ValidationReport::default();
    let rig = match load_rig(dump_root) {
        Ok(rig) => Some(rig),
        Err(e) => {
            let mut issue = Issue::from_error(None, &e);
            if matches!(e, FrameError::MissingFile { .. }) {
                issue.message = format!("missing {RIG_FILE}");
            }
            report.errors.push(issue);
            None
        }
    };
    let (ids, stray) = match scan_frame_dirs(dump_root) {
        Ok(found) => found,
        Err(e) => {
            if rig.is_some() {
                let mut issue = Issue::from_error(None, &e);
                if matches!(e, FrameError::MissingFile { .. }) {
                    issue.message = format!("missing {FRAMES_DIR}/ directory");
                }
                report.errors.push(issue);
            }
            return report;
        }
    };
    for name in stray {
        report.warnings.push(Issue {
            frame_id: None,
            file: dump_root.join(FRAMES_DIR).join(&name),
            kind: IssueKind::Notice,
            message: format!("ignoring {name:?}: not a frame directory"),
        });
    }
    report.frame_count = ids.len();
    let Some(rig) = rig else {
        return report;
    };
    for id in ids {
        match load_frame_with_rig(dump_root, &rig, id) {
            Ok(frame) => {
                report.valid_frames += 1;
                if frame.depth.is_none() {
                    report.warnings.push(Issue {
                        frame_id: Some(id),
                        file: frame_dir(dump_root, id).join("depth.f32"),
                        kind: IssueKind::Notice,
                        message: "no depth map; occlusion will be reported as unknown".into(),
                    });
                }
            }
            Err(e) => report.errors.push(Issue::from_error(Some(id), &e)),
        }
    }
    report
}
