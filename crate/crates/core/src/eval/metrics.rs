use serde::Serialize;

use crate::cloud::Point3;
use crate::index::locate_cell;
use crate::map::MultiLevelMap;
use crate::opt::same_level_obstacles;
use crate::search::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryReport {
    /// 3D arc length.
    pub length: f64,
    pub mean_curvature: f64,
    pub max_curvature: f64,
    /// Waypoints the curvature was averaged over.
    pub interior_count: usize,
    /// Zero-length segments, skipped for curvature.
    pub degenerate_segments: usize,
    pub collision_free: bool,
    pub total_time: f64,
}

/// Turning angle over incoming segment length at every interior point,
/// after dropping zero-length segments. Returns the curvatures and the
/// number of dropped segments.
pub fn discrete_curvatures(points: &[Point3]) -> (Vec<f64>, usize) {
    let mut kept: Vec<Point3> = Vec::with_capacity(points.len());
    let mut degenerate = 0;
    for p in points {
        match kept.last() {
            Some(q) if (p - q).norm() < 1e-9 => degenerate += 1,
            _ => kept.push(*p),
        }
    }
    let curvatures = kept
        .windows(3)
        .map(|w| {
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            a.cross(&b).norm().atan2(a.dot(&b)) / a.norm()
        })
        .collect();
    (curvatures, degenerate)
}

/// Length, curvature and collision status of a trajectory. A waypoint is
/// in collision when it is not inside its traversable patch's mesh cell
/// part, or, with `safety_radius > 0`, when a same-level obstacle lies
/// nearer than `safety_radius`.
pub fn trajectory_metrics(
    traj: &Trajectory,
    map: &MultiLevelMap,
    safety_radius: f64,
) -> TrajectoryReport {
    let points: Vec<Point3> = traj.positions().collect();
    let length = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let (curvatures, degenerate_segments) = discrete_curvatures(&points);
    let interior_count = curvatures.len();
    let mean_curvature = if interior_count == 0 {
        0.0
    } else {
        curvatures.iter().sum::<f64>() / interior_count as f64
    };
    let max_curvature = curvatures.iter().copied().fold(0.0, f64::max);
    let res = map.params().res_m;
    let collision_free = traj.waypoints.iter().all(|w| {
        let p = map.patch(w.patch);
        p.traversable
            && locate_cell(w.state.x, w.state.y, res) == p.home
            && (safety_radius <= 0.0
                || same_level_obstacles(map, w, safety_radius)
                    .is_none_or(|o| o.distance >= safety_radius))
    });
    TrajectoryReport {
        length,
        mean_curvature,
        max_curvature,
        interior_count,
        degenerate_segments,
        collision_free,
        total_time: traj.total_time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn two_points_have_no_curvature() {
        let (k, d) = discrete_curvatures(&[Point3::origin(), Point3::new(1.0, 0.0, 0.0)]);
        assert!(k.is_empty());
        assert_eq!(d, 0);
    }

    #[test]
    fn square_wave() {
        let pts: Vec<Point3> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 1.0), (2.0, 0.0)]
            .iter()
            .map(|&(x, y)| Point3::new(x, y, 0.0))
            .collect();
        let (k, _) = discrete_curvatures(&pts);
        let mean = k.iter().sum::<f64>() / k.len() as f64;
        assert_relative_eq!(mean, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn circle_chords() {
        let r = 3.0;
        let pts: Vec<Point3> = (0..=36)
            .map(|i| {
                let a = i as f64 * 2.0 * PI / 36.0;
                Point3::new(r * a.cos(), r * a.sin(), 1.0)
            })
            .collect();
        let (k, _) = discrete_curvatures(&pts);
        let mean = k.iter().sum::<f64>() / k.len() as f64;
        assert!((mean * r - 1.0).abs() < 0.02, "{mean}");
        // chord-angle closed form: (pi/18) / (2 r sin(pi/36))
        assert_relative_eq!(
            mean,
            (PI / 18.0) / (2.0 * r * (PI / 36.0).sin()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn duplicates_are_skipped() {
        let pts = [
            Point3::origin(),
            Point3::origin(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ];
        let (k, d) = discrete_curvatures(&pts);
        assert_eq!(d, 1);
        assert_eq!(k, vec![0.0]);
    }
}
