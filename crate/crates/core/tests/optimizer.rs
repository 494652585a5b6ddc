mod common;

use common::{field, flat, map_of, merge};
use patchnav::index::locate_patch;
use patchnav::opt::{
    interpolate, objective3d_eval, objective_eval, optimize_stage1, optimize_stage2,
    same_level_obstacles,
};
use patchnav::search::Control;
use patchnav::{MultiLevelMap, OptParams, RobotState, Trajectory, Waypoint};

fn on_map(map: &MultiLevelMap, pts: &[(f64, f64)], ref_z: f64) -> Trajectory {
    let mut t = Trajectory::default();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let patch = locate_patch(map, x, y, None, ref_z).expect("point on the map");
        let state = RobotState {
            x,
            y,
            z: map.patch(patch).z_at(x, y),
            ..Default::default()
        };
        t.push(Waypoint { state, patch }, i as f64, Control::default());
    }
    t
}

fn xy(t: &Trajectory) -> Vec<[f64; 2]> {
    t.waypoints.iter().map(|w| [w.state.x, w.state.y]).collect()
}

#[test]
fn straight_line_on_open_ground_is_a_fixed_point() {
    let map = map_of(&flat(6.0));
    let pts: Vec<(f64, f64)> = (0..8).map(|i| (-2.0 + 0.5 * i as f64, 0.1)).collect();
    let t = on_map(&map, &pts, 0.0);
    let r = optimize_stage1(&map, &t, &OptParams::default()).unwrap();
    assert_eq!(r.initial_objective, 0.0);
    assert_eq!(r.iterations, 0);
    assert_eq!(r.trajectory, t);
}

#[test]
fn zigzag_is_smoothed() {
    let map = map_of(&flat(6.0));
    let pts: Vec<(f64, f64)> = (0..10)
        .map(|i| (-2.5 + 0.5 * i as f64, if i % 2 == 0 { 0.0 } else { 0.3 }))
        .collect();
    let t = on_map(&map, &pts, 0.0);
    let p = OptParams::default();
    let r = optimize_stage1(&map, &t, &p).unwrap();
    assert!(r.final_objective < r.initial_objective);
    let none = vec![None; pts.len()];
    let before = objective_eval(&xy(&t), &none, &p).unwrap().smoothness;
    let after = objective_eval(&xy(&r.trajectory), &none, &p)
        .unwrap()
        .smoothness;
    assert!(after < before, "{after} vs {before}");
    assert_eq!(r.trajectory.waypoints[0], t.waypoints[0]);
    assert_eq!(r.trajectory.waypoints[9], t.waypoints[9]);
    // Logged objectives never increase.
    for w in r.log.windows(2) {
        assert!(w[1].objective <= w[0].objective);
    }
}

#[test]
fn path_hugging_an_edge_moves_away() {
    // Ground ends at map cell 2; mesh cells from x = 1.2 on are obstacles.
    let map = map_of(&field(6.0, |x, _| (x < 1.5).then_some(0.0)));
    let p = OptParams::default();
    let pts: Vec<(f64, f64)> = (0..13)
        .map(|i| {
            (
                if i == 0 || i == 12 { 0.0 } else { 0.7 },
                -3.0 + 0.5 * i as f64,
            )
        })
        .collect();
    let t = on_map(&map, &pts, 0.0);
    let mean_clearance = |t: &Trajectory| {
        let d: Vec<f64> = t.waypoints[1..12]
            .iter()
            .map(|w| same_level_obstacles(&map, w, p.r_o).map_or(p.r_o, |o| o.distance))
            .collect();
        d.iter().sum::<f64>() / d.len() as f64
    };
    let r = optimize_stage1(&map, &t, &p).unwrap();
    assert!(mean_clearance(&r.trajectory) > mean_clearance(&t));
    for w in &r.trajectory.waypoints {
        let patch = map.patch(w.patch);
        assert!(patch.traversable);
        assert!((w.state.z - patch.z_at(w.state.x, w.state.y)).abs() < 1e-9);
    }
}

#[test]
fn nearest_obstacle_two_cells_ahead() {
    let map = map_of(&field(6.0, |x, _| (x < 1.5).then_some(0.0)));
    let w = on_map(&map, &[(0.5, 0.3)], 0.0).waypoints[0];
    let o = same_level_obstacles(&map, &w, 1.2).unwrap();
    assert!(
        (o.point[0] - 1.5).abs() < 1e-12 && (o.point[1] - 0.3).abs() < 1e-12,
        "{:?}",
        o.point
    );
    assert!((o.distance - 1.0).abs() < 1e-12);
    let centre = on_map(&map, &[(-3.0, 0.1)], 0.0).waypoints[0];
    assert!(same_level_obstacles(&map, &centre, 1.2).is_none());
}

#[test]
fn overhead_level_is_not_an_obstacle() {
    // A lower floor and a deck over x < 0; the floor is open everywhere.
    let map = map_of(&merge([
        flat(6.0),
        field(6.0, |x, _| (x < 0.0).then_some(3.0)),
    ]));
    let below = on_map(&map, &[(-2.0, 0.1)], 0.0).waypoints[0];
    assert!(same_level_obstacles(&map, &below, 1.2).is_none());
    // The deck's own edge is an obstacle for a waypoint on it.
    let above = on_map(&map, &[(-0.6, 0.1)], 3.0).waypoints[0];
    assert!(map.patch(above.patch).z_at(-0.6, 0.1) == 3.0);
    assert!(same_level_obstacles(&map, &above, 1.2).is_some_and(|o| o.point[0] > -0.6));
}

#[test]
fn stage2_without_work_is_the_identity() {
    let map = map_of(&flat(6.0));
    let t = on_map(&map, &[(0.0, 0.0), (0.5, 0.3), (1.0, 0.1), (1.4, 0.6)], 0.0);
    let p = OptParams {
        interp_factor: 1,
        max_iters_stage2: 0,
        ..OptParams::default()
    };
    let (out, log) = optimize_stage2(&map, &t, &p).unwrap();
    assert_eq!(out, t);
    assert!(log.is_empty());
}

#[test]
fn inclined_straight_line_interpolates_onto_the_plane() {
    let (a, b) = (0.2, -0.1);
    let map = map_of(&field(4.0, |x, y| Some(a * x + b * y)));
    let t = on_map(
        &map,
        &[(-2.0, -1.0), (-0.5, -0.2), (1.0, 0.6), (2.5, 1.4)],
        0.0,
    );
    let p = OptParams::default();
    let (dense, original) = interpolate(&map, &t, 4).unwrap();
    assert_eq!(dense.len(), 13);
    assert_eq!(original.iter().filter(|o| **o).count(), 4);
    for w in &dense.waypoints {
        assert!((w.state.z - (a * w.state.x + b * w.state.y)).abs() < 1e-9);
    }
    // Only collinear points: nothing to smooth.
    let straight = on_map(&map, &[(-2.0, -1.0), (0.0, 0.0), (2.0, 1.0)], 0.0);
    let (dense, _) = interpolate(&map, &straight, 4).unwrap();
    let ps: Vec<_> = dense.positions().map(|p| p.coords).collect();
    assert!(objective3d_eval(&ps, &p).unwrap().0 < 1e-20);
    let (out, _) = optimize_stage2(&map, &straight, &p).unwrap();
    for (u, v) in out.waypoints.iter().zip(&dense.waypoints) {
        assert!((u.state.position() - v.state.position()).norm() < 1e-9);
    }
}

#[test]
fn stage2_smooths_a_ridge_crossing() {
    let map = map_of(&field(4.0, |x, _| Some(0.5 * x.abs())));
    let t = on_map(
        &map,
        &[(-2.1, 0.1), (-0.9, 0.1), (0.9, 0.1), (2.1, 0.1)],
        0.0,
    );
    let p = OptParams {
        fix_original: false,
        ..OptParams::default()
    };
    let (dense, _) = interpolate(&map, &t, p.interp_factor).unwrap();
    let (out, log) = optimize_stage2(&map, &t, &p).unwrap();
    let value = |t: &Trajectory| {
        let ps: Vec<_> = t.positions().map(|q| q.coords).collect();
        objective3d_eval(&ps, &p).unwrap().0
    };
    assert!(
        value(&out) < value(&dense),
        "{} vs {}",
        value(&out),
        value(&dense)
    );
    assert!(!log.is_empty());
    let band = 0.5 * map.params().thr_rep;
    for w in &out.waypoints {
        assert!((w.state.z - map.patch(w.patch).z_at(w.state.x, w.state.y)).abs() <= band + 1e-12);
    }
    assert_eq!(out.waypoints[0], t.waypoints[0]);
    assert_eq!(out.waypoints.last(), t.waypoints.last());
}
