use serde::{Deserialize, Serialize};

use super::{select_candidates, AnnotationConfig};
use crate::frame::{Category, FrameDump};
use crate::{OrientedBox3, Vec3};

/// Ground truth for one object as seen by the lidar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarObjectRecord {
    pub object_id: u64,
    pub category: Category,
    /// Box center, world frame.
    pub location: Vec3,
    pub forward_yaw: f64,
    pub point_count: u64,
}

const CELL_M: f64 = 2.0;
const MAX_CELLS_PER_AXIS: f64 = 1024.0;

/// Counts, per box, the points that lie inside it (boundary inclusive).
///
/// Points are bucketed into a ground-plane grid covering the boxes so each
/// box only visits nearby points.
pub fn count_points_in_boxes(points: &[Vec3], boxes: &[OrientedBox3]) -> Vec<u64> {
    let mut counts = vec![0u64; boxes.len()];
    if boxes.is_empty() || points.is_empty() {
        return counts;
    }
    let radius = |b: &OrientedBox3| b.extent.x.hypot(b.extent.y);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for b in boxes {
        let r = radius(b);
        x0 = x0.min(b.center.x - r);
        y0 = y0.min(b.center.y - r);
        x1 = x1.max(b.center.x + r);
        y1 = y1.max(b.center.y + r);
    }
    let cell = CELL_M.max((x1 - x0) / MAX_CELLS_PER_AXIS).max((y1 - y0) / MAX_CELLS_PER_AXIS);
    let nx = ((x1 - x0) / cell).floor() as usize + 1;
    let ny = ((y1 - y0) / cell).floor() as usize + 1;
    let cell_of = |x: f64, y: f64| -> Option<usize> {
        if !(x >= x0 && x <= x1 && y >= y0 && y <= y1) {
            return None;
        }
        let (i, j) = (((x - x0) / cell) as usize, ((y - y0) / cell) as usize);
        Some(j.min(ny - 1) * nx + i.min(nx - 1))
    };

    // counting sort of point indices by cell
    let mut starts = vec![0u32; nx * ny + 1];
    let cells: Vec<Option<usize>> = points.iter().map(|p| cell_of(p.x, p.y)).collect();
    for c in cells.iter().flatten() {
        starts[c + 1] += 1;
    }
    for i in 0..nx * ny {
        starts[i + 1] += starts[i];
    }
    let mut fill = starts.clone();
    let mut sorted = vec![0u32; starts[nx * ny] as usize];
    for (idx, c) in cells.iter().enumerate() {
        if let Some(c) = c {
            sorted[fill[*c] as usize] = idx as u32;
            fill[*c] += 1;
        }
    }

    for (b, count) in boxes.iter().zip(counts.iter_mut()) {
        let r = radius(b);
        let i0 = (((b.center.x - r - x0) / cell).floor().max(0.0) as usize).min(nx - 1);
        let i1 = (((b.center.x + r - x0) / cell).floor().max(0.0) as usize).min(nx - 1);
        let j0 = (((b.center.y - r - y0) / cell).floor().max(0.0) as usize).min(ny - 1);
        let j1 = (((b.center.y + r - y0) / cell).floor().max(0.0) as usize).min(ny - 1);
        for j in j0..=j1 {
            let row = j * nx;
            let span = &sorted[starts[row + i0] as usize..starts[row + i1 + 1] as usize];
            *count += span.iter().filter(|&&i| b.contains(&points[i as usize])).count() as u64;
        }
    }
    counts
}

/// Lidar point counts for every annotation candidate (zero-count objects included).
pub fn annotate_lidar(frame: &FrameDump, cfg: &AnnotationConfig) -> Vec<LidarObjectRecord> {
    let mut candidates = select_candidates(frame, cfg);
    candidates.sort_by_key(|o| o.object_id);
    let lidar = frame.lidar_pose_world();
    let points: Vec<Vec3> = frame
        .lidar
        .points
        .iter()
        .map(|p| lidar.apply(&Vec3::new(p.x as f64, p.y as f64, p.z as f64)))
        .collect();
    let boxes: Vec<OrientedBox3> = candidates.iter().map(|o| o.bbox).collect();
    let counts = count_points_in_boxes(&points, &boxes);
    candidates
        .iter()
        .zip(counts)
        .map(|(o, point_count)| LidarObjectRecord {
            object_id: o.object_id,
            category: o.category,
            location: o.bbox.center,
            forward_yaw: o.forward_yaw,
            point_count,
        })
        .collect()
}
