//! Ray-cast rendering of simple box scenes into interchange frames.
//!
//! Depth, segmentation and lidar are produced by intersecting rays with the
//! scene's boxes (plus a ground plane for lidar), so they are consistent
//! with the object metadata by construction. Used for fixtures, demos and
//! throughput runs.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;

use crate::frame::{
    write_frame, write_rig, CameraSensor, Category, DepthMap, FrameDump, FrameError, FrameMeta, LidarPoint, LidarScan,
    LidarSensor, ObjectState, SegMap, SensorRig, Source, DEFAULT_POINTS_PER_SCAN,
};
use crate::geometry::compose;
use crate::{CameraIntrinsics, OrientedBox3, Pose, Vec3};

/// Depth written where no surface is hit, meters.
pub const FAR_DEPTH: f32 = 1000.0;

pub const SEG_UNLABELED: u8 = 0;
pub const SEG_OCCLUDER: u8 = 1;

pub fn seg_id(c: Category) -> u8 {
    match c {
        Category::Car => 10,
        Category::Van => 11,
        Category::Truck => 12,
        Category::Pedestrian => 4,
        Category::PersonSitting => 13,
        Category::Cyclist => 14,
        Category::Tram => 15,
        Category::Misc => 16,
        Category::DontCare => SEG_UNLABELED,
    }
}

pub fn category_table() -> BTreeMap<u8, String> {
    let mut t: BTreeMap<u8, String> = Category::ALL
        .iter()
        .filter(|c| **c != Category::DontCare)
        .map(|c| (seg_id(*c), c.as_str().to_string()))
        .collect();
    t.insert(SEG_UNLABELED, "unlabeled".into());
    t.insert(SEG_OCCLUDER, "occluder".into());
    t
}

/// 640x480-style rig: camera 1.6 m above the ego origin looking along ego +x,
/// lidar 1.8 m above the origin.
pub fn default_rig(width: u32, height: u32) -> SensorRig {
    let f = width as f64 * 0.78125;
    SensorRig {
        camera: CameraSensor {
            intrinsics: CameraIntrinsics::new(f, f, width as f64 / 2.0, height as f64 / 2.0, width, height)
                .expect("valid default intrinsics"),
            pose_in_ego: Pose::camera_looking_along(Vec3::new(0.0, 0.0, 1.6), 0.0),
        },
        lidar: LidarSensor {
            pose_in_ego: Pose::from_translation(Vec3::new(0.0, 0.0, 1.8)),
            points_per_scan_hint: DEFAULT_POINTS_PER_SCAN,
        },
        category_table: category_table(),
    }
}

/// A fronto-parallel occluder covering pixel columns `u0..u1` and rows
/// `v0..v1` (half-open) at camera depth `depth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenOccluder {
    pub u0: u32,
    pub v0: u32,
    pub u1: u32,
    pub v1: u32,
    pub depth: f32,
}

impl ScreenOccluder {
    pub fn covers(&self, x: u32, y: u32) -> bool {
        x >= self.u0 && x < self.u1 && y >= self.v0 && y < self.v1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub rig: SensorRig,
    pub ego_pose_world: Pose,
    pub objects: Vec<ObjectState>,
    pub occluders: Vec<ScreenOccluder>,
}

/// Entry distance along a ray into a box, if it hits in front of `t_min`.
fn ray_box(origin: &Vec3, dir: &Vec3, b: &OrientedBox3, t_min: f64) -> Option<f64> {
    let o = b.to_local(origin);
    let (s, c) = b.yaw.sin_cos();
    let d = Vec3::new(c * dir.x + s * dir.y, -s * dir.x + c * dir.y, dir.z);
    let (mut t0, mut t1) = (t_min, f64::INFINITY);
    for (oi, di, ei) in [(o.x, d.x, b.extent.x), (o.y, d.y, b.extent.y), (o.z, d.z, b.extent.z)] {
        if di.abs() < 1e-15 {
            if oi.abs() > ei {
                return None;
            }
            continue;
        }
        let (a, bb) = ((-ei - oi) / di, (ei - oi) / di);
        let (near, far) = if a < bb { (a, bb) } else { (bb, a) };
        t0 = t0.max(near);
        t1 = t1.min(far);
        if t0 > t1 {
            return None;
        }
    }
    Some(t0)
}

impl Scene {
    pub fn camera_pose_world(&self) -> Pose {
        compose(&self.ego_pose_world, &self.rig.camera.pose_in_ego)
    }

    /// Renders depth and segmentation ids.
    pub fn render(&self) -> (DepthMap, Vec<u8>) {
        let k = self.rig.camera.intrinsics;
        let (w, h) = (k.width, k.height);
        let mut depth = DepthMap::filled(w, h, FAR_DEPTH);
        let mut seg = vec![SEG_UNLABELED; (w * h) as usize];
        let cam = self.camera_pose_world();
        for obj in &self.objects {
            let corners = obj.bbox.vertices().map(|c| cam.apply_inverse(&c));
            let (x0, y0, x1, y1) = if corners.iter().all(|c| c.z > 0.05) {
                let us = corners.iter().map(|c| k.fx * c.x / c.z + k.cx);
                let vs = corners.iter().map(|c| k.fy * c.y / c.z + k.cy);
                let (umin, umax) = us.fold((f64::INFINITY, f64::NEG_INFINITY), |a, u| (a.0.min(u), a.1.max(u)));
                let (vmin, vmax) = vs.fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(v), a.1.max(v)));
                if umax < -1.0 || vmax < -1.0 || umin > w as f64 || vmin > h as f64 {
                    continue;
                }
                (
                    (umin.floor().max(0.0)) as u32,
                    (vmin.floor().max(0.0)) as u32,
                    (umax.ceil() as i64).clamp(0, w as i64 - 1) as u32,
                    (vmax.ceil() as i64).clamp(0, h as i64 - 1) as u32,
                )
            } else if corners.iter().any(|c| c.z > 0.05) {
                (0, 0, w - 1, h - 1)
            } else {
                continue;
            };
            let id = seg_id(obj.category);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let dir_cam = Vec3::new((x as f64 - k.cx) / k.fx, (y as f64 - k.cy) / k.fy, 1.0);
                    let dir = cam.rotate(&dir_cam);
                    if let Some(t) = ray_box(&cam.translation, &dir, &obj.bbox, 1e-3) {
                        let z = t as f32;
                        if z < depth.get(x, y) {
                            depth.set(x, y, z);
                            seg[(y * w + x) as usize] = id;
                        }
                    }
                }
            }
        }
        for occ in &self.occluders {
            for y in occ.v0..occ.v1.min(h) {
                for x in occ.u0..occ.u1.min(w) {
                    if occ.depth < depth.get(x, y) {
                        depth.set(x, y, occ.depth);
                        seg[(y * w + x) as usize] = SEG_OCCLUDER;
                    }
                }
            }
        }
        (depth, seg)
    }

    /// Spinning-lidar scan against the boxes and the ground plane `z = 0`,
    /// `beams` elevation rings by `azimuth_steps` columns, in the lidar frame.
    /// Rays that hit nothing within `range_m` produce no point.
    pub fn scan_lidar(&self, beams: u32, azimuth_steps: u32, range_m: f64) -> LidarScan {
        let lidar = compose(&self.ego_pose_world, &self.rig.lidar.pose_in_ego);
        let origin = lidar.translation;
        let mut points = Vec::with_capacity((beams * azimuth_steps) as usize);
        for b in 0..beams {
            let elev = (-25.0 + 27.0 * b as f64 / (beams.max(2) - 1) as f64).to_radians();
            for a in 0..azimuth_steps {
                let az = std::f64::consts::TAU * a as f64 / azimuth_steps as f64;
                let dir_l = Vec3::new(elev.cos() * az.cos(), elev.cos() * az.sin(), elev.sin());
                let dir = lidar.rotate(&dir_l);
                let mut best = range_m;
                if dir.z < 0.0 {
                    best = best.min(-origin.z / dir.z);
                }
                let mut hit_object = false;
                for obj in &self.objects {
                    if let Some(t) = ray_box(&origin, &dir, &obj.bbox, 1e-3) {
                        if t < best {
                            best = t;
                            hit_object = true;
                        }
                    }
                }
                if best < range_m {
                    let p = dir_l.scale(best);
                    points.push(LidarPoint {
                        x: p.x as f32,
                        y: p.y as f32,
                        z: p.z as f32,
                        intensity: if hit_object { 0.8 } else { 0.2 },
                    });
                }
            }
        }
        LidarScan { points }
    }

    pub fn to_frame(&self, frame_id: u64, weather_tag: &str, lidar: LidarScan) -> FrameDump {
        let (depth, seg) = self.render();
        let k = self.rig.camera.intrinsics;
        FrameDump {
            meta: FrameMeta {
                frame_id,
                timestamp: frame_id as f64 * 0.05,
                ego_pose_world: self.ego_pose_world,
                weather_tag: weather_tag.to_string(),
                source: Source::Sim,
                ego_object_id: None,
            },
            rig: self.rig.clone(),
            rgb_path: "rgb.png".into(),
            depth: Some(depth),
            seg: SegMap { width: k.width, height: k.height, data: seg, category_table: self.rig.category_table.clone() },
            lidar,
            objects: self.objects.clone(),
        }
    }
}

/// Road users scattered ahead of a randomly placed ego vehicle.
pub fn random_scene<R: Rng>(rng: &mut R, rig: &SensorRig, object_count: usize) -> Scene {
    let heading: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let ego_pose_world = Pose::new(
        crate::geometry::yaw_rotation(heading),
        Vec3::new(rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0), 0.0),
    )
    .expect("yaw rotation");
    let mut objects = Vec::with_capacity(object_count);
    for i in 0..object_count {
        let category = match rng.random_range(0..10) {
            0..=5 => Category::Car,
            6..=8 => Category::Pedestrian,
            _ => Category::Cyclist,
        };
        let extent = match category {
            Category::Pedestrian => Vec3::new(0.3, 0.3, 0.9),
            Category::Cyclist => Vec3::new(0.9, 0.3, 0.85),
            _ => Vec3::new(rng.random_range(1.9..2.6), rng.random_range(0.85..1.05), rng.random_range(0.7..0.9)),
        };
        // denser near the ego, still reaching past the default 120 m radius
        let forward = 4.0 + 126.0 * rng.random_range(0.0f64..1.0).powi(2);
        let lateral = rng.random_range(-0.4..0.4) * (forward + 10.0);
        let local = Vec3::new(forward, lateral, extent.z);
        let yaw = heading + rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let bbox = OrientedBox3::new(ego_pose_world.apply(&local), extent, yaw).expect("positive extents");
        objects.push(ObjectState { object_id: i as u64 + 1, category, bbox, forward_yaw: bbox.yaw });
    }
    Scene { rig: rig.clone(), ego_pose_world, objects, occluders: Vec::new() }
}

/// Writes a dump of `frames` random scenes rendered with the default rig.
pub fn write_synthetic_dump<R: Rng>(
    root: &Path,
    rng: &mut R,
    frames: u64,
    objects_per_frame: usize,
    (width, height): (u32, u32),
) -> Result<(), FrameError> {
    let rig = default_rig(width, height);
    write_rig(root, &rig)?;
    for frame_id in 0..frames {
        let scene = random_scene(rng, &rig, objects_per_frame);
        let lidar = scene.scan_lidar(16, 360, 120.0);
        write_frame(root, &scene.to_frame(frame_id, "clear_noon", lidar), None)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_hits_box_front_face() {
        let b = OrientedBox3::new(Vec3::new(10.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0), 0.0).unwrap();
        let t = ray_box(&Vec3::zero(), &Vec3::new(1.0, 0.0, 0.0), &b, 0.0).unwrap();
        assert!((t - 9.0).abs() < 1e-12);
        assert!(ray_box(&Vec3::zero(), &Vec3::new(-1.0, 0.0, 0.0), &b, 0.0).is_none());
        assert!(ray_box(&Vec3::zero(), &Vec3::new(0.0, 1.0, 0.0), &b, 0.0).is_none());
    }

    #[test]
    fn render_depth_of_box_ahead() {
        let rig = default_rig(64, 48);
        let b = OrientedBox3::new(Vec3::new(20.0, 0.0, 1.6), Vec3::new(1.0, 2.0, 1.0), 0.0).unwrap();
        let scene = Scene {
            rig,
            ego_pose_world: Pose::identity(),
            objects: vec![ObjectState { object_id: 1, category: Category::Car, bbox: b, forward_yaw: 0.0 }],
            occluders: vec![],
        };
        let (depth, seg) = scene.render();
        assert!((depth.get(32, 24) - 19.0).abs() < 1e-4);
        assert_eq!(seg[24 * 64 + 32], seg_id(Category::Car));
        assert_eq!(depth.get(0, 0), FAR_DEPTH);
    }

    #[test]
    fn lidar_hits_ground_and_box() {
        let rig = default_rig(64, 48);
        let b = OrientedBox3::new(Vec3::new(8.0, 0.0, 1.0), Vec3::new(1.0, 1.0, 1.0), 0.0).unwrap();
        let scene = Scene {
            rig,
            ego_pose_world: Pose::identity(),
            objects: vec![ObjectState { object_id: 1, category: Category::Car, bbox: b, forward_yaw: 0.0 }],
            occluders: vec![],
        };
        let scan = scene.scan_lidar(16, 720, 100.0);
        assert!(scan.points.iter().any(|p| p.intensity > 0.5));
        assert!(scan.points.iter().any(|p| p.intensity < 0.5));
    }
}
