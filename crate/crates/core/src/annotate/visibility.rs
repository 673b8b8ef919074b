use crate::frame::{DepthMap, FrameDump, ObjectState};
use crate::geometry::NEAR_PLANE;
use crate::{CameraIntrinsics, Rect2, Vec3};

use super::AnnotationConfig;

/// Depth-buffer visibility of one object.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityReport {
    pub visible_vertex_count: u32,
    /// Per corner, in the order of [`crate::geometry::box_vertices`].
    pub vertex_visible: [bool; 8],
    /// Fraction of in-image samples on camera-facing faces that sit behind
    /// nearer geometry. 1.0 when no sample lands in the image.
    pub occlusion_fraction: f64,
    pub face_samples_in_image: u32,
    /// Hull of the projected corners after clipping box edges at the near plane.
    pub projected_rect: Option<Rect2>,
    /// `projected_rect` intersected with the image.
    pub clipped_rect: Option<Rect2>,
    /// Height of `clipped_rect`, 0 when there is none.
    pub pixel_height: f64,
    pub depth_available: bool,
}

/// The object's box expressed in the camera frame.
struct CameraBox {
    center: Vec3,
    /// Local length/width/height unit axes, camera frame.
    axes: [Vec3; 3],
    extent: [f64; 3],
}

impl CameraBox {
    fn new(obj: &ObjectState, frame: &FrameDump) -> Self {
        let cam = frame.camera_pose_world();
        let r = obj.bbox.rotation();
        let axes = std::array::from_fn(|i| cam.rotation.mul_transpose_vec(&r.column(i)));
        Self {
            center: cam.apply_inverse(&obj.bbox.center),
            axes,
            extent: obj.bbox.extent.to_array(),
        }
    }

    #[inline]
    fn point(&self, local: [f64; 3]) -> Vec3 {
        let mut p = self.center;
        for ((axis, l), e) in self.axes.iter().zip(local).zip(self.extent) {
            p += axis.scale(l * e);
        }
        p
    }

    /// Camera depth at which the ray through the camera origin along `dir`
    /// enters the box, if it does so in front of the camera.
    fn entry_depth(&self, dir: &Vec3) -> Option<f64> {
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for i in 0..3 {
            let o = -self.center.dot(&self.axes[i]);
            let d = dir.dot(&self.axes[i]);
            let e = self.extent[i];
            if d.abs() < 1e-15 {
                if o.abs() > e {
                    return None;
                }
                continue;
            }
            let (a, b) = ((-e - o) / d, (e - o) / d);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
            if t0 > t1 {
                return None;
            }
        }
        (t0 > 0.0).then_some(t0 * dir.z)
    }

    fn corners(&self) -> [Vec3; 8] {
        let s = |bit: bool| if bit { 1.0 } else { -1.0 };
        std::array::from_fn(|i| self.point([s(i & 1 != 0), s(i & 2 != 0), s(i & 4 != 0)]))
    }
}

/// True when any pixel in the `window`-wide square around `(px, py)` is at
/// least as far as `depth - tol`.
#[inline]
fn window_sees(d: &DepthMap, px: u32, py: u32, window: u32, depth: f64, tol: f64) -> bool {
    let half = (window / 2) as i64;
    let threshold = depth - tol;
    let (w, h) = (d.width as i64, d.height as i64);
    let (x0, x1) = ((px as i64 - half).max(0), (px as i64 + half).min(w - 1));
    let (y0, y1) = ((py as i64 - half).max(0), (py as i64 + half).min(h - 1));
    (y0..=y1).any(|y| (x0..=x1).any(|x| d.get(x as u32, y as u32) as f64 >= threshold))
}

fn corner_visibility(
    corners: &[Vec3; 8],
    k: &CameraIntrinsics,
    depth: Option<&DepthMap>,
    cfg: &AnnotationConfig,
) -> [bool; 8] {
    std::array::from_fn(|i| {
        let Some(p) = k.project_camera(&corners[i]) else {
            return false;
        };
        let Some((px, py)) = k.pixel_index(p.u, p.v) else {
            return false;
        };
        match depth {
            Some(d) => window_sees(d, px, py, cfg.vertex_neighborhood, p.depth, cfg.depth_tolerance_m),
            None => true,
        }
    })
}

/// Returns (occluded samples, in-image samples) over the camera-facing faces.
fn face_samples(cb: &CameraBox, k: &CameraIntrinsics, depth: Option<&DepthMap>, cfg: &AnnotationConfig) -> (u32, u32) {
    let n = cfg.face_samples_per_axis.max(1);
    let grid = |i: u32| -1.0 + (2 * i + 1) as f64 / n as f64;
    let (mut occluded, mut in_image) = (0u32, 0u32);
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let normal = cb.axes[axis].scale(sign);
            let mut face_center = [0.0; 3];
            face_center[axis] = sign;
            // camera sits at the origin; facing iff the normal points back toward it
            if normal.dot(&cb.point(face_center)) >= 0.0 {
                continue;
            }
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            for i in 0..n {
                for j in 0..n {
                    let mut local = face_center;
                    local[a] = grid(i);
                    local[b] = grid(j);
                    let Some(p) = k.project_camera(&cb.point(local)) else {
                        continue;
                    };
                    let Some((px, py)) = k.pixel_index(p.u, p.v) else {
                        continue;
                    };
                    in_image += 1;
                    if let Some(d) = depth {
                        // Compare against the object's own surface along this pixel's ray, so
                        // that a face seen edge-on is not hidden by the box's nearer faces.
                        let ray = Vec3::new((px as f64 - k.cx) / k.fx, (py as f64 - k.cy) / k.fy, 1.0);
                        let reference = cb.entry_depth(&ray).unwrap_or(p.depth);
                        if (d.get(px, py) as f64) < reference - cfg.depth_tolerance_m {
                            occluded += 1;
                        }
                    }
                }
            }
        }
    }
    (occluded, in_image)
}

/// Hull of the box corners projected after clipping its edges at the near plane.
fn projected_hull(corners: &[Vec3; 8], k: &CameraIntrinsics) -> Option<Rect2> {
    let (mut lo_u, mut lo_v, mut hi_u, mut hi_v) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut add = |p: &Vec3| {
        let (u, v) = (k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy);
        lo_u = lo_u.min(u);
        lo_v = lo_v.min(v);
        hi_u = hi_u.max(u);
        hi_v = hi_v.max(v);
    };
    let in_front = |p: &Vec3| p.z > NEAR_PLANE;
    let mut any = false;
    for c in corners.iter().filter(|c| in_front(c)) {
        add(c);
        any = true;
    }
    if !any {
        return None;
    }
    for i in 0..8usize {
        for bit in [1usize, 2, 4] {
            let j = i | bit;
            if j == i {
                continue;
            }
            let (a, b) = (&corners[i], &corners[j]);
            if in_front(a) != in_front(b) {
                let t = (NEAR_PLANE - a.z) / (b.z - a.z);
                let mut p = *a + (*b - *a).scale(t);
                p.z = NEAR_PLANE;
                add(&p);
            }
        }
    }
    Rect2::new(lo_u, lo_v, hi_u, hi_v)
}

/// Corner visibility, surface occlusion and image-plane extent of `obj`.
pub fn assess_visibility(obj: &ObjectState, frame: &FrameDump, cfg: &AnnotationConfig) -> VisibilityReport {
    let k = frame.intrinsics();
    let depth = frame.depth.as_ref();
    let cb = CameraBox::new(obj, frame);
    let corners = cb.corners();

    let vertex_visible = corner_visibility(&corners, k, depth, cfg);
    let (occluded, in_image) = face_samples(&cb, k, depth, cfg);
    let occlusion_fraction = if in_image == 0 { 1.0 } else { occluded as f64 / in_image as f64 };

    let projected_rect = projected_hull(&corners, k);
    let image = Rect2 { left: 0.0, top: 0.0, right: k.width as f64, bottom: k.height as f64 };
    let clipped_rect = projected_rect.and_then(|r| r.intersection(&image));

    VisibilityReport {
        visible_vertex_count: vertex_visible.iter().filter(|v| **v).count() as u32,
        vertex_visible,
        occlusion_fraction,
        face_samples_in_image: in_image,
        projected_rect,
        clipped_rect,
        pixel_height: clipped_rect.map_or(0.0, |r| r.height()),
        depth_available: depth.is_some(),
    }
}
