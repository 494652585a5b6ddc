use std::collections::HashMap;

use serde::Serialize;

use crate::cloud::scenes::SurfaceModel;
use crate::cloud::PointCloud;
use crate::index::locate_cell;
use crate::map::{MultiLevelMap, PatchId};

/// Reference surface for map accuracy.
pub enum GroundTruth<'a> {
    Cloud(&'a PointCloud),
    /// Sampled on a barycentric grid of the given order inside each patch.
    Surface(&'a dyn SurfaceModel, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchError {
    pub patch: PatchId,
    pub error: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapAccuracyReport {
    /// Traversable patches with at least one associated point.
    pub per_patch: Vec<PatchError>,
    pub e_avg: f64,
    pub num_traversable: usize,
    /// Traversable patches left out because no point fell on them.
    pub num_without_points: usize,
}

/// Mean vertical distance between each traversable patch and the ground
/// truth points above or below it at the same level (within `thr_slice`).
pub fn map_accuracy(map: &MultiLevelMap, truth: &GroundTruth) -> MapAccuracyReport {
    let thr = map.params().thr_slice;
    let res = map.params().res_m;
    let mut sums: HashMap<PatchId, (f64, usize)> = HashMap::new();
    let mut add = |id: PatchId, d: f64| {
        let e = sums.entry(id).or_default();
        e.0 += d;
        e.1 += 1;
    };
    match truth {
        GroundTruth::Cloud(cloud) => {
            for p in &cloud.points {
                let idx = locate_cell(p.x, p.y, res);
                for q in map.cell_patches(idx).iter().filter(|q| q.traversable) {
                    let d = (q.z_at(p.x, p.y) - p.z).abs();
                    if d <= thr {
                        add(q.id, d);
                    }
                }
            }
        }
        GroundTruth::Surface(model, order) => {
            let k = (*order).max(1);
            for q in map.patches().iter().filter(|q| q.traversable) {
                let [a, b, c] = q.vertices;
                for i in 0..=k {
                    for j in 0..=k - i {
                        let (u, v) = (i as f64 / k as f64, j as f64 / k as f64);
                        let x = a.x + u * (b.x - a.x) + v * (c.x - a.x);
                        let y = a.y + u * (b.y - a.y) + v * (c.y - a.y);
                        let zp = q.z_at(x, y);
                        let nearest = model
                            .heights(x, y)
                            .into_iter()
                            .map(|z| (zp - z).abs())
                            .fold(f64::INFINITY, f64::min);
                        if nearest <= thr {
                            add(q.id, nearest);
                        }
                    }
                }
            }
        }
    }
    let num_traversable = map.traversable_count();
    let mut per_patch: Vec<PatchError> = sums
        .into_iter()
        .map(|(patch, (s, n))| PatchError {
            patch,
            error: s / n as f64,
            points: n,
        })
        .collect();
    per_patch.sort_by_key(|e| e.patch);
    let e_avg = if per_patch.is_empty() {
        0.0
    } else {
        per_patch.iter().map(|e| e.error).sum::<f64>() / per_patch.len() as f64
    };
    MapAccuracyReport {
        num_without_points: num_traversable - per_patch.len(),
        per_patch,
        e_avg,
        num_traversable,
    }
}
