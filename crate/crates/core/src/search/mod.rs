//! Min-time kinematic A* over differential-drive motion primitives that
//! are integrated directly on map patches.

mod astar;
mod expand;
pub mod io;
mod kinematics;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::PatchId;

pub use astar::{search, Pose, SearchResult};
pub use expand::{
    control_set, expand_node, integrate_primitive, MotionPrimitive, SearchNode, Transition,
};
pub use kinematics::{
    adjust_orientation, adjust_z, advance, heading_on_patch, heading_xy, state_transition, Step,
};

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("invalid robot parameters: {0}")]
    InvalidParams(String),
    #[error("start pose is not on a traversable patch")]
    InvalidStart,
    #[error("goal pose is not on a traversable patch")]
    InvalidGoal,
    #[error("no trajectory found after {expansions} expansions")]
    Infeasible { expansions: usize },
    #[error("heading has no projection onto the new patch")]
    TransitionFailure,
}

/// Differential-drive robot and search discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotParams {
    /// Distance between the wheels.
    pub track_width: f64,
    /// Symmetric per-wheel acceleration bound.
    pub a_max: f64,
    pub v_max: f64,
    /// Number of acceleration values per wheel in the control set.
    pub accel_levels: usize,
    /// Integration step.
    pub dt: f64,
    /// Integration steps per motion primitive.
    pub num_iter: usize,
    /// Edge length of the pruning voxels.
    pub voxel_size: f64,
    /// Distance to the goal at which the search stops.
    pub goal_tol: f64,
    /// Clamp wheel speeds to `[0, v_max]` instead of `[-v_max, v_max]`.
    pub forward_only: bool,
    pub max_expansions: usize,
    /// Robot height; slices must be separated by more than this.
    pub height: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        RobotParams {
            track_width: 0.5,
            a_max: 1.0,
            v_max: 1.0,
            accel_levels: 3,
            dt: 0.1,
            num_iter: 10,
            voxel_size: 0.3,
            goal_tol: 0.5,
            forward_only: false,
            max_expansions: 200_000,
            height: 0.5,
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<(), SearchError> {
        let positive = [
            ("track_width", self.track_width),
            ("a_max", self.a_max),
            ("v_max", self.v_max),
            ("dt", self.dt),
            ("voxel_size", self.voxel_size),
            ("goal_tol", self.goal_tol),
            ("height", self.height),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SearchError::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.accel_levels < 2 {
            return Err(SearchError::InvalidParams(
                "accel_levels must be at least 2".into(),
            ));
        }
        if self.num_iter == 0 || self.max_expansions == 0 {
            return Err(SearchError::InvalidParams(
                "num_iter and max_expansions must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn primitive_duration(&self) -> f64 {
        self.num_iter as f64 * self.dt
    }

    pub(crate) fn clamp_speed(&self, v: f64) -> f64 {
        let lo = if self.forward_only { 0.0 } else { -self.v_max };
        v.clamp(lo, self.v_max)
    }
}

/// Robot state: world position, wheel speeds and heading in the frame of
/// the patch the robot stands on.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v_left: f64,
    pub v_right: f64,
    pub theta: f64,
}

impl RobotState {
    pub fn speed(&self) -> f64 {
        0.5 * (self.v_left + self.v_right)
    }

    pub fn position(&self) -> crate::cloud::Point3 {
        crate::cloud::Point3::new(self.x, self.y, self.z)
    }
}

/// Wheel accelerations `(a_left, a_right)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control {
    pub a_left: f64,
    pub a_right: f64,
}

impl Control {
    pub fn new(a_left: f64, a_right: f64) -> Self {
        Control { a_left, a_right }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub state: RobotState,
    pub patch: PatchId,
}

/// A timed waypoint sequence. `controls[k]` is the control that produced
/// waypoint `k`; the first entry is zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
    pub times: Vec<f64>,
    pub controls: Vec<Control>,
    pub total_time: f64,
}

impl Trajectory {
    pub fn single(w: Waypoint) -> Self {
        Trajectory {
            waypoints: vec![w],
            times: vec![0.0],
            controls: vec![Control::default()],
            total_time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn push(&mut self, w: Waypoint, t: f64, u: Control) {
        self.waypoints.push(w);
        self.times.push(t);
        self.controls.push(u);
        self.total_time = t;
    }

    pub fn positions(&self) -> impl Iterator<Item = crate::cloud::Point3> + '_ {
        self.waypoints.iter().map(|w| w.state.position())
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = (a + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    if w < -std::f64::consts::PI {
        w + std::f64::consts::TAU
    } else {
        w
    }
}
