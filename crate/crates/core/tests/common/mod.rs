//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Rotation3, Vector3, Vector4};
use rand::Rng;
use synthkit_core::annotate::{Dimensions, KittiLabel};
use synthkit_core::eval::Detection;
use synthkit_core::frame::{Category, DepthMap, FrameDump, FrameMeta, LidarScan, ObjectState, SegMap, SensorRig, Source};
use synthkit_core::synth::default_rig;
use synthkit_core::{CameraIntrinsics, OrientedBox3, Pose, Rect2, Vec3};

pub const FAR: f32 = 1000.0;

pub fn object(object_id: u64, category: Category, center: [f64; 3], extent: [f64; 3], yaw: f64) -> ObjectState {
    let bbox = OrientedBox3::new(Vec3::from(center), Vec3::from(extent), yaw).unwrap();
    ObjectState { object_id, category, bbox, forward_yaw: bbox.yaw }
}

/// A frame from the default rig at the world origin (camera 1.6 m up,
/// looking along +x) with an optional depth map and blank segmentation.
pub fn fixture_frame(width: u32, height: u32, objects: Vec<ObjectState>, depth: Option<DepthMap>) -> FrameDump {
    frame_with_rig(default_rig(width, height), objects, depth)
}

pub fn frame_with_rig(rig: SensorRig, objects: Vec<ObjectState>, depth: Option<DepthMap>) -> FrameDump {
    let (w, h) = (rig.camera.intrinsics.width, rig.camera.intrinsics.height);
    FrameDump {
        meta: FrameMeta {
            frame_id: 0,
            timestamp: 0.0,
            ego_pose_world: Pose::identity(),
            weather_tag: "clear_noon".into(),
            source: Source::Sim,
            ego_object_id: None,
        },
        seg: SegMap { width: w, height: h, data: vec![0; (w * h) as usize], category_table: rig.category_table.clone() },
        rig,
        rgb_path: PathBuf::from("rgb.png"),
        depth,
        lidar: LidarScan::default(),
        objects,
    }
}

/// Box 8 m tall whose center is exactly `distance` from the default camera.
pub fn tall_box_at(distance: f64) -> ObjectState {
    object(1, Category::Car, [distance, 0.0, 1.6], [2.0, 1.0, 4.0], 0.0)
}

/// Depth map where everything sits behind a wall at 1 m except the 3x3
/// windows around the first `n` corners of `obj`, for the default rig.
pub fn reveal_corners(obj: &ObjectState, n: usize, width: u32, height: u32) -> DepthMap {
    let frame = fixture_frame(width, height, vec![], None);
    let (k, cam) = (*frame.intrinsics(), frame.camera_pose_world());
    let mut d = DepthMap::filled(width, height, 1.0);
    for p in oracle_corners(&obj.bbox).iter().take(n) {
        let (u, v, _) = oracle_project(*p, &cam, &k).unwrap();
        let (px, py) = pixel_of(u, v, &k).unwrap();
        for y in py - 1..=py + 1 {
            for x in px - 1..=px + 1 {
                d.set(x, y, FAR);
            }
        }
    }
    d
}

// ---- projection -------------------------------------------------------------

fn na_rotation(p: &Pose) -> Matrix3<f64> {
    Matrix3::from_row_slice(&p.rotation.to_row_major())
}

/// World-to-pixel through a 3x4 intrinsic matrix and a 4x4 homogeneous
/// extrinsic. Returns (u, v, camera depth), or None at or behind the near plane.
pub fn oracle_project(point: [f64; 3], camera_pose_world: &Pose, k: &CameraIntrinsics) -> Option<(f64, f64, f64)> {
    let r = na_rotation(camera_pose_world);
    let t = Vector3::from(camera_pose_world.translation.to_array());
    let mut world_to_cam = Matrix4::<f64>::identity();
    world_to_cam.fixed_view_mut::<3, 3>(0, 0).copy_from(&r.transpose());
    world_to_cam.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-(r.transpose() * t)));
    let kmat = Matrix3x4::new(k.fx, 0.0, k.cx, 0.0, 0.0, k.fy, k.cy, 0.0, 0.0, 0.0, 1.0, 0.0);
    let pc = world_to_cam * Vector4::new(point[0], point[1], point[2], 1.0);
    if pc.z <= 0.1 {
        return None;
    }
    let h = kmat * pc;
    Some((h.x / h.z, h.y / h.z, pc.z))
}

pub fn random_rotation<R: Rng>(rng: &mut R) -> Rotation3<f64> {
    let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let axis = if axis.norm() < 1e-3 { Vector3::z() } else { axis };
    Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

pub fn pose_from_na(r: &Rotation3<f64>, t: [f64; 3]) -> Pose {
    let m = r.matrix();
    let rows = [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]];
    Pose::new(synthkit_core::Mat3::from_row_major(rows), Vec3::from(t)).unwrap()
}

// ---- boxes and visibility ---------------------------------------------------

/// Box corners, bit 0 of the index selecting +x, bit 1 +y, bit 2 +z.
pub fn oracle_corners(b: &OrientedBox3) -> [[f64; 3]; 8] {
    let r = Rotation3::from_axis_angle(&Vector3::z_axis(), b.yaw);
    let c = Vector3::from(b.center.to_array());
    std::array::from_fn(|i| {
        let s = |bit: usize| if i & bit != 0 { 1.0 } else { -1.0 };
        let p = c + r * Vector3::new(s(1) * b.extent.x, s(2) * b.extent.y, s(4) * b.extent.z);
        [p.x, p.y, p.z]
    })
}

pub fn pixel_of(u: f64, v: f64, k: &CameraIntrinsics) -> Option<(u32, u32)> {
    let (x, y) = (u.round(), v.round());
    (x >= 0.0 && y >= 0.0 && x < k.width as f64 && y < k.height as f64).then_some((x as u32, y as u32))
}

/// Corners whose 3x3 pixel window holds some depth at or beyond the corner
/// depth minus 0.15 m.
pub fn oracle_visible_vertices(obj: &ObjectState, frame: &FrameDump) -> u32 {
    let k = frame.intrinsics();
    let cam = frame.camera_pose_world();
    let d = frame.depth.as_ref().unwrap();
    let mut n = 0;
    for p in oracle_corners(&obj.bbox) {
        let Some((u, v, z)) = oracle_project(p, &cam, k) else { continue };
        let Some((px, py)) = pixel_of(u, v, k) else { continue };
        let mut seen = false;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (x, y) = (px as i64 + dx, py as i64 + dy);
                if x >= 0 && y >= 0 && x < k.width as i64 && y < k.height as i64 && d.get(x as u32, y as u32) as f64 >= z - 0.15 {
                    seen = true;
                }
            }
        }
        n += seen as u32;
    }
    n
}

/// Pixel positions of the 5x5 cell-centered samples on each camera-facing
/// face that land in the image.
pub fn oracle_face_sample_pixels(obj: &ObjectState, frame: &FrameDump) -> Vec<(u32, u32)> {
    let k = frame.intrinsics();
    let cam = frame.camera_pose_world();
    let b = &obj.bbox;
    let r = Rotation3::from_axis_angle(&Vector3::z_axis(), b.yaw);
    let c = Vector3::from(b.center.to_array());
    let e = b.extent.to_array();
    let eye = Vector3::from(cam.translation.to_array());
    let mut out = Vec::new();
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let mut n = Vector3::zeros();
            n[axis] = sign;
            let normal = r * n;
            let face_center = c + normal * e[axis];
            if normal.dot(&(face_center - eye)) >= 0.0 {
                continue;
            }
            let (a, bb) = ((axis + 1) % 3, (axis + 2) % 3);
            for i in 0..5 {
                for j in 0..5 {
                    let mut local = n * e[axis];
                    local[a] = (-0.8 + 0.4 * i as f64) * e[a];
                    local[bb] = (-0.8 + 0.4 * j as f64) * e[bb];
                    let p = c + r * local;
                    if let Some((u, v, _)) = oracle_project([p.x, p.y, p.z], &cam, k) {
                        if let Some(px) = pixel_of(u, v, k) {
                            out.push(px);
                        }
                    }
                }
            }
        }
    }
    out
}

// ---- labels -------------------------------------------------------------------

/// Value as it reads back from two-decimal text.
pub fn q2(x: f64) -> f64 {
    let s = format!("{x:.2}");
    let v: f64 = s.parse().unwrap();
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

pub fn quantize(l: &KittiLabel) -> KittiLabel {
    KittiLabel {
        object_type: l.object_type,
        truncated: q2(l.truncated),
        occluded: l.occluded,
        alpha: q2(l.alpha),
        bbox: Rect2 { left: q2(l.bbox.left), top: q2(l.bbox.top), right: q2(l.bbox.right), bottom: q2(l.bbox.bottom) },
        dimensions: Dimensions {
            height: q2(l.dimensions.height),
            width: q2(l.dimensions.width),
            length: q2(l.dimensions.length),
        },
        location: Vec3::new(q2(l.location.x), q2(l.location.y), q2(l.location.z)),
        rotation_y: q2(l.rotation_y),
    }
}

pub fn random_label<R: Rng>(rng: &mut R) -> KittiLabel {
    use std::f64::consts::PI;
    let types = [
        Category::Car,
        Category::Van,
        Category::Truck,
        Category::Pedestrian,
        Category::PersonSitting,
        Category::Cyclist,
        Category::Tram,
        Category::Misc,
    ];
    let left = rng.random_range(0.0..1200.0);
    let top = rng.random_range(0.0..360.0);
    KittiLabel {
        object_type: types[rng.random_range(0..types.len())],
        truncated: rng.random_range(0.0..=1.0),
        occluded: rng.random_range(0..=3),
        alpha: rng.random_range(-PI..PI),
        bbox: Rect2 {
            left,
            top,
            right: left + rng.random_range(0.0..300.0),
            bottom: top + rng.random_range(0.0..200.0),
        },
        dimensions: Dimensions {
            height: rng.random_range(0.5..4.0),
            width: rng.random_range(0.3..3.0),
            length: rng.random_range(0.3..12.0),
        },
        location: Vec3::new(rng.random_range(-60.0..60.0), rng.random_range(-3.0..3.0), rng.random_range(0.5..120.0)),
        rotation_y: rng.random_range(-PI..PI),
    }
}

// ---- evaluation ---------------------------------------------------------------

/// (first detected frame, coverage %, mean run length) by splitting the
/// trace into runs at misses and frame gaps.
pub fn oracle_trace(frames: &[u64], detected: &[bool]) -> (Option<u64>, f64, f64) {
    let mut text = String::new();
    for (i, (&f, &d)) in frames.iter().zip(detected).enumerate() {
        if i > 0 && f != frames[i - 1] + 1 {
            text.push('|');
        }
        text.push(if d { '1' } else { '0' });
    }
    let runs: Vec<usize> = text.split(['0', '|']).map(str::len).filter(|&n| n > 0).collect();
    let hits: usize = runs.iter().sum();
    let first = frames.iter().zip(detected).find(|(_, &d)| d).map(|(&f, _)| f);
    let coverage = if frames.is_empty() { 0.0 } else { 100.0 * hits as f64 / frames.len() as f64 };
    let avg = if runs.is_empty() { 0.0 } else { hits as f64 / runs.len() as f64 };
    (first, coverage, avg)
}

pub fn oracle_iou(a: &Rect2, b: &Rect2) -> f64 {
    let w = (a.right.min(b.right) - a.left.max(b.left)).max(0.0);
    let h = (a.bottom.min(b.bottom) - a.top.max(b.top)).max(0.0);
    let inter = w * h;
    let union = (a.right - a.left) * (a.bottom - a.top) + (b.right - b.left) * (b.bottom - b.top) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Keeps a detection unless some kept detection of a strictly earlier
/// stage in the same frame and category overlaps it at `thr` or more.
pub fn oracle_merge(stages: &[Vec<Detection>], thr: f64) -> Vec<Detection> {
    let flat: Vec<(usize, &Detection)> =
        stages.iter().enumerate().flat_map(|(s, v)| v.iter().map(move |d| (s, d))).collect();
    let mut kept = vec![false; flat.len()];
    for i in 0..flat.len() {
        let (si, di) = flat[i];
        kept[i] = !(0..flat.len()).any(|j| {
            let (sj, dj) = flat[j];
            sj < si && kept[j] && dj.frame_id == di.frame_id && dj.category == di.category && oracle_iou(&dj.rect, &di.rect) >= thr
        });
    }
    flat.iter().zip(kept).filter(|(_, k)| *k).map(|((_, d), _)| (*d).clone()).collect()
}
