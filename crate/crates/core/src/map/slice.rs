use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MapParams;
use crate::cloud::{Point3, PointCloud};

/// A vertically contiguous cluster of one map cell's points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub z_min: f64,
    pub z_max: f64,
    pub z_avg: f64,
    pub count: usize,
}

/// Map cell index of `(x, y)`: cell `(m, n)` owns the half-open square
/// `[m res_m - res_m/2, m res_m + res_m/2) x [n res_m - res_m/2, n res_m + res_m/2)`.
pub fn map_cell_of(x: f64, y: f64, res_m: f64) -> (i32, i32) {
    (
        (x / res_m + 0.5).floor() as i32,
        (y / res_m + 0.5).floor() as i32,
    )
}

/// Groups points by the map cell that owns them.
pub fn cluster_points(cloud: &PointCloud, params: &MapParams) -> BTreeMap<(i32, i32), Vec<Point3>> {
    let mut cells: BTreeMap<(i32, i32), Vec<Point3>> = BTreeMap::new();
    for p in &cloud.points {
        cells
            .entry(map_cell_of(p.x, p.y, params.res_m))
            .or_default()
            .push(*p);
    }
    cells
}

/// Splits ascending heights at gaps wider than `thr_slice` and keeps the
/// groups holding at least `least_num` values.
pub fn slice_cell(z_values: &[f64], params: &MapParams) -> Vec<Slice> {
    debug_assert!(
        z_values.windows(2).all(|w| w[0] <= w[1]),
        "heights must be sorted"
    );
    let mut slices = Vec::new();
    let mut start = 0;
    for end in 1..=z_values.len() {
        let split = end == z_values.len() || z_values[end] - z_values[end - 1] > params.thr_slice;
        if !split {
            continue;
        }
        let run = &z_values[start..end];
        if run.len() >= params.least_num {
            let sum: f64 = run.iter().sum();
            let z_avg = (sum / run.len() as f64).clamp(run[0], run[run.len() - 1]);
            slices.push(Slice {
                z_min: run[0],
                z_max: run[run.len() - 1],
                z_avg,
                count: run.len(),
            });
        }
        start = end;
    }
    slices
}

/// Whether two slices are close enough vertically to belong to one surface.
pub fn can_connect(s1: &Slice, s2: &Slice, params: &MapParams) -> bool {
    let limit = params.connect_distance();
    s1.z_min - s2.z_max <= limit && s2.z_min - s1.z_max <= limit
}

/// Height of a slice's representative point: the top for tall slices
/// (steep terrain), the mean otherwise.
pub fn representative_z(s: &Slice, params: &MapParams) -> f64 {
    if s.z_max - s.z_min > params.thr_rep {
        s.z_max
    } else {
        s.z_avg
    }
}

/// Slices of every occupied map cell, ascending in z within each cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CellSlices {
    pub cells: BTreeMap<(i32, i32), Vec<Slice>>,
    /// Points dropped by the `least_num` filter.
    pub discarded: usize,
}

impl CellSlices {
    pub fn get(&self, m: i32, n: i32) -> &[Slice] {
        self.cells.get(&(m, n)).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Clusters and slices a whole cloud.
pub fn slice_cloud(cloud: &PointCloud, params: &MapParams) -> CellSlices {
    let mut heights: BTreeMap<(i32, i32), Vec<f64>> = BTreeMap::new();
    for p in &cloud.points {
        heights
            .entry(map_cell_of(p.x, p.y, params.res_m))
            .or_default()
            .push(p.z);
    }
    let mut out = CellSlices::default();
    for (key, mut zs) in heights {
        zs.sort_by(f64::total_cmp);
        let slices = slice_cell(&zs, params);
        out.discarded += zs.len() - slices.iter().map(|s| s.count).sum::<usize>();
        if !slices.is_empty() {
            out.cells.insert(key, slices);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params() -> MapParams {
        MapParams::default()
    }

    #[test]
    fn cluster_cell_examples() {
        assert_eq!(map_cell_of(0.31, -0.29, 0.6), (1, 0));
        assert_eq!(map_cell_of(0.0, 0.0, 0.6), (0, 0));
        assert_eq!(map_cell_of(0.3, 0.0, 0.6), (1, 0));
        assert_eq!(map_cell_of(-0.3, 0.0, 0.6), (0, 0));
        assert_eq!(map_cell_of(-0.30001, 0.0, 0.6), (-1, 0));
    }

    #[test]
    fn cluster_points_groups() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.31, -0.29, 1.0),
            Point3::new(0.0, 0.0, 5.0),
            Point3::new(0.0, 0.0, -2.0),
        ]);
        let cells = cluster_points(&cloud, &params());
        assert_eq!(cells[&(1, 0)].len(), 1);
        assert_eq!(cells[&(0, 0)].len(), 2);
    }

    fn slice_params(thr_slice: f64, least_num: usize) -> MapParams {
        MapParams {
            thr_slice,
            least_num,
            ..params()
        }
    }

    #[test]
    fn two_slices() {
        let s = slice_cell(&[0.00, 0.05, 0.10, 1.00, 1.04], &slice_params(0.5, 2));
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].z_min, s[0].z_max, s[0].count), (0.0, 0.10, 3));
        assert_abs_diff_eq!(s[0].z_avg, 0.05, epsilon = 1e-12);
        assert_eq!((s[1].z_min, s[1].z_max, s[1].count), (1.0, 1.04, 2));
        assert_abs_diff_eq!(s[1].z_avg, 1.02, epsilon = 1e-12);
    }

    #[test]
    fn singleton_dropped() {
        let s = slice_cell(&[0.0, 2.0, 2.05, 2.1], &slice_params(0.5, 2));
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].z_min, s[0].z_max, s[0].count), (2.0, 2.1, 3));
        assert_abs_diff_eq!(s[0].z_avg, 2.05, epsilon = 1e-12);
    }

    #[test]
    fn single_value_slice() {
        let s = slice_cell(&[0.7], &slice_params(0.5, 1));
        assert_eq!(
            s,
            vec![Slice {
                z_min: 0.7,
                z_max: 0.7,
                z_avg: 0.7,
                count: 1
            }]
        );
        assert!(slice_cell(&[], &params()).is_empty());
    }

    fn slice(z_min: f64, z_max: f64) -> Slice {
        Slice {
            z_min,
            z_max,
            z_avg: 0.5 * (z_min + z_max),
            count: 3,
        }
    }

    #[test]
    fn connect_examples() {
        let p = MapParams {
            res_pc: 0.2,
            lambda: 1.5,
            ..params()
        };
        assert!(can_connect(&slice(0.0, 0.2), &slice(0.25, 0.40), &p));
        assert!(!can_connect(&slice(0.0, 0.2), &slice(0.6, 0.8), &p));
        let s = slice(0.3, 0.9);
        assert!(can_connect(&s, &s, &p));
    }

    #[test]
    fn representative_examples() {
        let p = MapParams {
            thr_rep: 0.3,
            ..params()
        };
        let flat = Slice {
            z_min: 1.0,
            z_max: 1.0,
            z_avg: 1.0,
            count: 4,
        };
        assert_eq!(representative_z(&flat, &p), 1.0);
        let tall = Slice {
            z_min: 0.0,
            z_max: 0.5,
            z_avg: 0.2,
            count: 4,
        };
        assert_eq!(representative_z(&tall, &p), 0.5);
        let p = MapParams {
            thr_rep: 0.25,
            ..params()
        };
        let boundary = Slice {
            z_min: 0.0,
            z_max: 0.25,
            z_avg: 0.1,
            count: 4,
        };
        assert_eq!(representative_z(&boundary, &p), 0.1);
    }

    proptest! {
        #[test]
        fn slicing_partitions_points(
            mut zs in prop::collection::vec(-5.0..5.0f64, 0..200),
            thr in 0.05..1.0f64,
            least in 1usize..5,
        ) {
            zs.sort_by(f64::total_cmp);
            let p = slice_params(thr, least);
            let slices = slice_cell(&zs, &p);
            let kept: usize = slices.iter().map(|s| s.count).sum();
            prop_assert!(kept <= zs.len());
            for s in &slices {
                prop_assert!(s.count >= least);
                prop_assert!(s.z_min <= s.z_avg && s.z_avg <= s.z_max);
            }
            for w in slices.windows(2) {
                prop_assert!(w[1].z_min - w[0].z_max > thr);
            }
            // Every value is either inside exactly one slice or discarded.
            let covered = zs.iter().filter(|z| slices.iter().any(|s| s.z_min <= **z && **z <= s.z_max)).count();
            prop_assert_eq!(covered, kept);
        }
    }
}
