use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::codec::{decode_png, encode_png, read_png_header};
use super::{
    decode_depth, decode_lidar, encode_depth, encode_lidar, Category, FrameDump, FrameError, FrameMeta, ObjectState,
    SegMap, SensorRig,
};

pub(crate) const RIG_FILE: &str = "rig.json";
pub(crate) const FRAMES_DIR: &str = "frames";

pub fn frame_dir(dump_root: &Path, frame_id: u64) -> PathBuf {
    dump_root.join(FRAMES_DIR).join(frame_id.to_string())
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, FrameError> {
    fs::read(path).map_err(|e| FrameError::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FrameError> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| FrameError::malformed(path, format!("json: {e}")))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), FrameError> {
    fs::write(path, bytes).map_err(|e| FrameError::io(path, e))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), FrameError> {
    let mut s = serde_json::to_string_pretty(value).expect("interchange types serialize");
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

pub fn load_rig(dump_root: &Path) -> Result<SensorRig, FrameError> {
    let path = dump_root.join(RIG_FILE);
    let rig: SensorRig = read_json(&path)?;
    rig.camera
        .intrinsics
        .validate()
        .map_err(|e| FrameError::invariant(&path, format!("camera intrinsics: {e}")))?;
    rig.camera
        .pose_in_ego
        .validate()
        .map_err(|e| FrameError::invariant(&path, format!("camera pose: {e}")))?;
    rig.lidar
        .pose_in_ego
        .validate()
        .map_err(|e| FrameError::invariant(&path, format!("lidar pose: {e}")))?;
    Ok(rig)
}

/// Numeric frame directory names under `frames/`, ascending.
pub fn list_frame_ids(dump_root: &Path) -> Result<Vec<u64>, FrameError> {
    Ok(scan_frame_dirs(dump_root)?.0)
}

/// Returns (numeric ids ascending, names of entries that are not frame directories).
pub(crate) fn scan_frame_dirs(dump_root: &Path) -> Result<(Vec<u64>, Vec<String>), FrameError> {
    let dir = dump_root.join(FRAMES_DIR);
    let entries = fs::read_dir(&dir).map_err(|e| FrameError::io(&dir, e))?;
    let mut ids = Vec::new();
    let mut stray = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| FrameError::io(&dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let is_dir = entry.file_type().map(|t| t.is_dir()).unwrap_or(false);
        match name.parse::<u64>() {
            Ok(id) if is_dir && id.to_string() == name => ids.push(id),
            _ => stray.push(name),
        }
    }
    ids.sort_unstable();
    stray.sort();
    Ok((ids, stray))
}

/// Loads and validates one frame, reading `rig.json` first.
pub fn load_frame(dump_root: &Path, frame_id: u64) -> Result<FrameDump, FrameError> {
    let rig = load_rig(dump_root)?;
    load_frame_with_rig(dump_root, &rig, frame_id)
}

/// Loads and validates one frame against an already-loaded rig.
pub fn load_frame_with_rig(dump_root: &Path, rig: &SensorRig, frame_id: u64) -> Result<FrameDump, FrameError> {
    let dir = frame_dir(dump_root, frame_id);
    let k = &rig.camera.intrinsics;

    let meta_path = dir.join("meta.json");
    let meta: FrameMeta = read_json(&meta_path)?;
    if meta.frame_id != frame_id {
        return Err(FrameError::invariant(
            &meta_path,
            format!("frame_id {} does not match directory {frame_id}", meta.frame_id),
        ));
    }
    if !meta.timestamp.is_finite() {
        return Err(FrameError::invariant(&meta_path, "timestamp is not finite"));
    }
    meta.ego_pose_world
        .validate()
        .map_err(|e| FrameError::invariant(&meta_path, format!("ego pose: {e}")))?;

    let objects_path = dir.join("objects.json");
    let objects: Vec<ObjectState> = read_json(&objects_path)?;
    let mut ids = BTreeSet::new();
    for o in &objects {
        if o.category == Category::DontCare {
            return Err(FrameError::invariant(&objects_path, format!("object {} has category DontCare", o.object_id)));
        }
        o.bbox
            .validate()
            .map_err(|e| FrameError::invariant(&objects_path, format!("object {}: {e}", o.object_id)))?;
        if !o.forward_yaw.is_finite() {
            return Err(FrameError::invariant(&objects_path, format!("object {}: forward_yaw not finite", o.object_id)));
        }
        if !ids.insert(o.object_id) {
            return Err(FrameError::invariant(&objects_path, format!("duplicate object_id {}", o.object_id)));
        }
    }

    let depth_path = dir.join("depth.f32");
    let depth = if depth_path.exists() {
        let d = decode_depth(&read_bytes(&depth_path)?, &depth_path)?;
        if (d.width, d.height) != (k.width, k.height) {
            return Err(FrameError::malformed(
                &depth_path,
                format!("{}x{} does not match camera {}x{}", d.width, d.height, k.width, k.height),
            ));
        }
        Some(d)
    } else {
        None
    };

    let seg_path = dir.join("seg.png");
    let img = decode_png(&read_bytes(&seg_path)?, &seg_path)?;
    if img.color != png::ColorType::Grayscale {
        return Err(FrameError::malformed(&seg_path, format!("expected single-channel png, got {:?}", img.color)));
    }
    if (img.width, img.height) != (k.width, k.height) {
        return Err(FrameError::malformed(
            &seg_path,
            format!("{}x{} does not match camera {}x{}", img.width, img.height, k.width, k.height),
        ));
    }
    let seg = SegMap {
        width: img.width,
        height: img.height,
        data: img.data,
        category_table: rig.category_table.clone(),
    };
    if let Some(id) = seg.first_unknown_id() {
        return Err(FrameError::invariant(&seg_path, format!("category id {id} missing from category_table")));
    }

    let lidar_path = dir.join("lidar.bin");
    let lidar = decode_lidar(&read_bytes(&lidar_path)?, &lidar_path)?;

    let rgb_path = dir.join("rgb.png");
    let (w, h, color) = read_png_header(&read_bytes(&rgb_path)?, &rgb_path)?;
    if !matches!(color, png::ColorType::Rgb | png::ColorType::Rgba) {
        return Err(FrameError::malformed(&rgb_path, format!("expected RGB png, got {color:?}")));
    }
    if (w, h) != (k.width, k.height) {
        return Err(FrameError::malformed(
            &rgb_path,
            format!("{w}x{h} does not match camera {}x{}", k.width, k.height),
        ));
    }

    Ok(FrameDump {
        meta,
        rig: rig.clone(),
        rgb_path,
        depth,
        seg,
        lidar,
        objects,
    })
}

pub fn write_rig(dump_root: &Path, rig: &SensorRig) -> Result<(), FrameError> {
    fs::create_dir_all(dump_root).map_err(|e| FrameError::io(dump_root, e))?;
    write_json(&dump_root.join(RIG_FILE), rig)
}

/// Writes every file of `frame` under `frames/<frame_id>/`. Without `rgb`
/// (packed 8-bit RGB), a false-color image of the segmentation is written.
pub fn write_frame(dump_root: &Path, frame: &FrameDump, rgb: Option<&[u8]>) -> Result<(), FrameError> {
    let dir = frame_dir(dump_root, frame.meta.frame_id);
    fs::create_dir_all(&dir).map_err(|e| FrameError::io(&dir, e))?;
    write_json(&dir.join("meta.json"), &frame.meta)?;
    write_json(&dir.join("objects.json"), &frame.objects)?;
    if let Some(d) = &frame.depth {
        write_bytes(&dir.join("depth.f32"), &encode_depth(d))?;
    }
    let seg = &frame.seg;
    write_bytes(
        &dir.join("seg.png"),
        &encode_png(seg.width, seg.height, png::ColorType::Grayscale, &seg.data),
    )?;
    write_bytes(&dir.join("lidar.bin"), &encode_lidar(&frame.lidar))?;
    let false_color;
    let rgb = match rgb {
        Some(bytes) => bytes,
        None => {
            false_color = seg
                .data
                .iter()
                .flat_map(|&id| [id.wrapping_mul(37), id.wrapping_mul(91), id.wrapping_mul(53)])
                .collect::<Vec<u8>>();
            &false_color
        }
    };
    write_bytes(&dir.join("rgb.png"), &encode_png(seg.width, seg.height, png::ColorType::Rgb, rgb))
}
