use super::kinematics::advance;
use super::{Control, RobotParams, Waypoint};
use crate::map::{MultiLevelMap, PatchId};

/// A patch change inside a primitive: waypoint `step` moved off `from`,
/// where its heading was `theta_before`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub step: usize,
    pub from: PatchId,
    pub theta_before: f64,
}

/// Waypoints produced by holding one control for `num_iter` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPrimitive {
    pub control: Control,
    pub waypoints: Vec<Waypoint>,
    pub duration: f64,
    pub transitions: Vec<Transition>,
}

impl MotionPrimitive {
    pub fn end(&self) -> &Waypoint {
        self.waypoints.last().expect("primitive has waypoints")
    }
}

/// A search graph node. `parent` indexes the search's node arena.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchNode {
    pub waypoint: Waypoint,
    pub g: f64,
    pub parent: Option<usize>,
    pub control: Control,
}

/// The `accel_levels x accel_levels` grid over `[-a_max, a_max]^2`, left
/// wheel outermost.
pub fn control_set(robot: &RobotParams) -> Vec<Control> {
    let k = robot.accel_levels;
    let level = |i: usize| -robot.a_max + 2.0 * robot.a_max * i as f64 / (k - 1) as f64;
    (0..k)
        .flat_map(|i| (0..k).map(move |j| Control::new(level(i), level(j))))
        .collect()
}

/// Integrates `u` from `start`. Fails as soon as any step leaves the
/// traversable surface or cannot carry its heading onto the next patch.
pub fn integrate_primitive(
    map: &MultiLevelMap,
    start: &Waypoint,
    u: Control,
    robot: &RobotParams,
) -> Option<MotionPrimitive> {
    let mut waypoints = Vec::with_capacity(robot.num_iter);
    let mut transitions = Vec::new();
    let mut current = *start;
    for k in 0..robot.num_iter {
        let step = advance(map, &current, u, robot)?;
        if let Some((from, theta_before)) = step.transition {
            transitions.push(Transition {
                step: k,
                from,
                theta_before,
            });
        }
        current = step.waypoint;
        waypoints.push(current);
    }
    Some(MotionPrimitive {
        control: u,
        waypoints,
        duration: robot.primitive_duration(),
        transitions,
    })
}

/// All primitives from the node's waypoint that stay on traversable ground.
pub fn expand_node(
    map: &MultiLevelMap,
    node: &SearchNode,
    controls: &[Control],
    robot: &RobotParams,
) -> Vec<MotionPrimitive> {
    controls
        .iter()
        .filter_map(|&u| integrate_primitive(map, &node.waypoint, u, robot))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_grid() {
        let r = RobotParams {
            a_max: 2.0,
            accel_levels: 3,
            ..RobotParams::default()
        };
        let set = control_set(&r);
        assert_eq!(set.len(), 9);
        assert_eq!(set[0], Control::new(-2.0, -2.0));
        assert_eq!(set[4], Control::new(0.0, 0.0));
        assert_eq!(set[5], Control::new(0.0, 2.0));
        let r5 = RobotParams {
            accel_levels: 5,
            ..r
        };
        assert_eq!(control_set(&r5).len(), 25);
    }
}
