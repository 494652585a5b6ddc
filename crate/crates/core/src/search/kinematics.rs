use super::{wrap_angle, Control, RobotParams, RobotState, SearchError, Waypoint};
use crate::index::{locate_cell, locate_patch_hinted};
use crate::map::{MultiLevelMap, Patch, PatchFrame, PatchId};

/// One integration step of a differential-drive robot on a patch.
///
/// Wheel speeds are clamped after the acceleration is applied; the heading
/// and the patch-frame velocity are averaged over the step and mapped into
/// the world through the patch rotation. `z` lands on the patch plane.
pub fn state_transition(
    s: &RobotState,
    patch: &Patch,
    u: Control,
    robot: &RobotParams,
) -> RobotState {
    let dt = robot.dt;
    let v_left = robot.clamp_speed(s.v_left + u.a_left * dt);
    let v_right = robot.clamp_speed(s.v_right + u.a_right * dt);
    let d_theta = ((s.v_left - s.v_right) + (v_left - v_right)) / (2.0 * robot.track_width) * dt;
    let theta = s.theta + d_theta;
    let (v0, v1) = (s.speed(), 0.5 * (v_left + v_right));
    let lx = 0.5 * (v0 * s.theta.cos() + v1 * theta.cos()) * dt;
    let ly = 0.5 * (v0 * s.theta.sin() + v1 * theta.sin()) * dt;
    let [[t11, t12], [t21, t22]] = patch.frame.rotation_xy();
    let x = s.x + lx * t11 + ly * t12;
    let y = s.y + lx * t21 + ly * t22;
    RobotState {
        x,
        y,
        z: adjust_z(x, y, patch),
        v_left,
        v_right,
        theta: wrap_angle(theta),
    }
}

/// Re-expresses a patch-frame heading in the frame of the next patch so
/// that its projection onto the world xy plane keeps its direction.
pub fn adjust_orientation(
    theta_pm: f64,
    from: &PatchFrame,
    to: &PatchFrame,
) -> Result<f64, SearchError> {
    let [[a11, a12], [a21, a22]] = from.rotation_xy();
    let (c, s) = (theta_pm.cos(), theta_pm.sin());
    let (dx, dy) = (a11 * c + a12 * s, a21 * c + a22 * s);
    let [[b11, b12], [b21, b22]] = to.rotation_xy();
    let det = b11 * b22 - b12 * b21;
    if det.abs() <= 1e-12 {
        return Err(SearchError::TransitionFailure);
    }
    let wx = (b22 * dx - b12 * dy) / det;
    let wy = (-b21 * dx + b11 * dy) / det;
    if wx.hypot(wy) <= 1e-12 {
        return Err(SearchError::TransitionFailure);
    }
    Ok(wy.atan2(wx))
}

/// The height that puts `(x, y)` on the patch plane.
pub fn adjust_z(x: f64, y: f64, patch: &Patch) -> f64 {
    patch.z_at(x, y)
}

/// World yaw of the xy projection of a patch-frame heading.
pub fn heading_xy(theta: f64, frame: &PatchFrame) -> f64 {
    let [[a11, a12], [a21, a22]] = frame.rotation_xy();
    let (c, s) = (theta.cos(), theta.sin());
    (a21 * c + a22 * s).atan2(a11 * c + a12 * s)
}

/// Patch-frame heading whose xy projection points along world yaw `yaw`.
pub fn heading_on_patch(yaw: f64, frame: &PatchFrame) -> f64 {
    let [[b11, b12], [b21, b22]] = frame.rotation_xy();
    let det = b11 * b22 - b12 * b21;
    let (dx, dy) = (yaw.cos(), yaw.sin());
    ((-b21 * dx + b11 * dy) / det).atan2((b22 * dx - b12 * dy) / det)
}

/// Result of one integration step taken on the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub waypoint: Waypoint,
    /// Previous patch and the heading before adjustment, when the step
    /// moved onto another patch.
    pub transition: Option<(PatchId, f64)>,
}

/// Integrates one step and resolves the patch under the new position.
/// `None` means the robot left the traversable surface.
pub fn advance(map: &MultiLevelMap, w: &Waypoint, u: Control, robot: &RobotParams) -> Option<Step> {
    let patch = map.patch(w.patch);
    let mut state = state_transition(&w.state, patch, u, robot);
    if locate_cell(state.x, state.y, map.params().res_m) == patch.home {
        return Some(Step {
            waypoint: Waypoint {
                state,
                patch: w.patch,
            },
            transition: None,
        });
    }
    let next = locate_patch_hinted(map, state.x, state.y, w.patch)?;
    let next_patch = map.patch(next);
    let theta_before = state.theta;
    state.theta = adjust_orientation(theta_before, &patch.frame, &next_patch.frame).ok()?;
    state.z = adjust_z(state.x, state.y, next_patch);
    Some(Step {
        waypoint: Waypoint { state, patch: next },
        transition: Some((w.patch, theta_before)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Point3;
    use crate::map::{patch_frame, MeshIndex, Part, VertexKey};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn patch(a: Point3, b: Point3, c: Point3) -> Patch {
        let (frame, vertices) = patch_frame(a, b, c).unwrap();
        let key = VertexKey {
            m: 0,
            n: 0,
            slice: 0,
        };
        Patch {
            id: PatchId(0),
            home: MeshIndex::new(0, 0, Part::Down),
            level: 0,
            vertices,
            keys: [key; 3],
            frame,
            traversable: true,
        }
    }

    fn flat() -> Patch {
        patch(
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        )
    }

    fn state(v_left: f64, v_right: f64, theta: f64) -> RobotState {
        RobotState {
            x: 0.0,
            y: 0.0,
            z: 0.0,
            v_left,
            v_right,
            theta,
        }
    }

    #[test]
    fn straight_line_step() {
        let r = RobotParams::default();
        let s = state_transition(&state(1.0, 1.0, 0.0), &flat(), Control::new(0.0, 0.0), &r);
        assert_abs_diff_eq!(s.x, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn spin_in_place() {
        let r = RobotParams {
            track_width: 0.5,
            ..RobotParams::default()
        };
        let s = state_transition(&state(1.0, -1.0, 0.0), &flat(), Control::new(0.0, 0.0), &r);
        assert_abs_diff_eq!(s.theta, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(s.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn accelerate_from_rest() {
        let r = RobotParams::default();
        let s = state_transition(&state(0.0, 0.0, 0.0), &flat(), Control::new(1.0, 1.0), &r);
        assert_abs_diff_eq!(s.v_left, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.v_right, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.x, 0.005, epsilon = 1e-15);
    }

    #[test]
    fn unclamped_heading_matches_closed_form() {
        // dθ = (vl - vr)/l dt + (al - ar)/(2l) dt²
        let r = RobotParams {
            v_max: 5.0,
            ..RobotParams::default()
        };
        let s0 = state(0.3, 0.1, 0.2);
        let u = Control::new(1.0, -0.5);
        let s = state_transition(&s0, &flat(), u, &r);
        let want = 0.2 + 0.2 / 0.5 * 0.1 + 1.5 / 1.0 * 0.01;
        assert_abs_diff_eq!(s.theta, want, epsilon = 1e-14);
    }

    #[test]
    fn speeds_clamped() {
        let r = RobotParams {
            forward_only: true,
            ..RobotParams::default()
        };
        let s = state_transition(&state(1.0, 0.0, 0.0), &flat(), Control::new(1.0, -1.0), &r);
        assert_eq!((s.v_left, s.v_right), (1.0, 0.0));
    }

    #[test]
    fn orientation_examples() {
        let a = 0.4f64;
        let tilted = patch(
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(a.cos(), 0.0, a.sin()),
            Point3::new(0.0, 1.0, 0.0),
        );
        assert_abs_diff_eq!(tilted.frame.x_axis.x, a.cos(), epsilon = 1e-12);
        let f = flat();
        assert_abs_diff_eq!(
            adjust_orientation(0.7, &f.frame, &f.frame).unwrap(),
            0.7,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            adjust_orientation(0.0, &f.frame, &tilted.frame).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            adjust_orientation(FRAC_PI_2, &f.frame, &tilted.frame).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-15
        );
        let th = adjust_orientation(0.9, &f.frame, &tilted.frame).unwrap();
        assert_abs_diff_eq!(heading_xy(th, &tilted.frame), 0.9, epsilon = 1e-12);
    }

    #[test]
    fn z_examples() {
        let level = patch(
            Point3::new(0.0, 0.0, 0.5),
            Point3::new(1.0, 0.0, 0.5),
            Point3::new(0.0, 1.0, 0.5),
        );
        assert_abs_diff_eq!(adjust_z(3.0, -2.0, &level), 0.5, epsilon = 1e-15);
        let p = patch(
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(0.6, 0.0, 0.0),
            Point3::new(0.6, 0.6, 0.3),
        );
        assert_abs_diff_eq!(adjust_z(0.6, 0.6, &p), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(adjust_z(0.0, 0.0, &p), 0.0, epsilon = 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn world_heading_preserved(
            theta in -3.1f64..3.1,
            n1 in -0.6f64..0.6, n2 in -0.6f64..0.6,
            m1 in -0.6f64..0.6, m2 in -0.6f64..0.6,
        ) {
            let p = patch(Point3::origin(), Point3::new(1.0, 0.0, n1), Point3::new(0.0, 1.0, n2));
            let q = patch(Point3::origin(), Point3::new(1.0, 0.0, m1), Point3::new(0.0, 1.0, m2));
            let t = adjust_orientation(theta, &p.frame, &q.frame).unwrap();
            let d = wrap_angle(heading_xy(t, &q.frame) - heading_xy(theta, &p.frame));
            proptest::prop_assert!(d.abs() < 1e-12);
            let back = heading_on_patch(heading_xy(theta, &p.frame), &p.frame);
            proptest::prop_assert!(wrap_angle(back - theta).abs() < 1e-12);
        }
    }
}
