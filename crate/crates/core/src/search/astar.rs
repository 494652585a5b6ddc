use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::expand::{control_set, expand_node, integrate_primitive, MotionPrimitive, SearchNode};
use super::kinematics::heading_on_patch;
use super::{Control, RobotParams, RobotState, SearchError, Trajectory, Waypoint};
use crate::cloud::Point3;
use crate::index::locate_patch_near;
use crate::map::MultiLevelMap;

/// A start or goal: world position with a reference height used to pick
/// the level, and a world yaw (ignored for goals).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(default)]
    pub yaw: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Pose { x, y, z, yaw: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Start waypoint followed by every primitive waypoint.
    pub trajectory: Trajectory,
    /// Start waypoint followed by the end waypoint of every primitive.
    pub nodes: Vec<Waypoint>,
    /// `(g, h)` of each entry of `nodes`.
    pub costs: Vec<(f64, f64)>,
    pub primitives: Vec<MotionPrimitive>,
    pub expansions: usize,
}

impl SearchResult {
    pub fn total_time(&self) -> f64 {
        self.trajectory.total_time
    }
}

struct Open {
    f: f64,
    h: f64,
    seq: usize,
    node: usize,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // BinaryHeap pops the maximum, so smaller keys compare greater.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.h.total_cmp(&self.h))
            .then(other.seq.cmp(&self.seq))
    }
}

type Voxel = (i64, i64, i64);

fn voxel_of(s: &RobotState, size: f64) -> Voxel {
    (
        (s.x / size).floor() as i64,
        (s.y / size).floor() as i64,
        (s.z / size).floor() as i64,
    )
}

/// Lower bound on the remaining time: the straight-line distance still to
/// cover before the goal tolerance is reached, at top speed.
fn heuristic(p: &Point3, goal: &Point3, robot: &RobotParams) -> f64 {
    ((goal - p).norm() - robot.goal_tol).max(0.0) / robot.v_max
}

/// Minimum-time A* from `start` to `goal` over motion primitives.
pub fn search(
    map: &MultiLevelMap,
    start: Pose,
    goal: Pose,
    robot: &RobotParams,
) -> Result<SearchResult, SearchError> {
    robot.validate()?;
    let start_patch =
        locate_patch_near(map, start.x, start.y, start.z).ok_or(SearchError::InvalidStart)?;
    let goal_patch =
        locate_patch_near(map, goal.x, goal.y, goal.z).ok_or(SearchError::InvalidGoal)?;
    let sp = map.patch(start_patch);
    let start_state = RobotState {
        x: start.x,
        y: start.y,
        z: sp.z_at(start.x, start.y),
        v_left: 0.0,
        v_right: 0.0,
        theta: heading_on_patch(start.yaw, &sp.frame),
    };
    let goal_pos = Point3::new(goal.x, goal.y, map.patch(goal_patch).z_at(goal.x, goal.y));
    let start_wp = Waypoint {
        state: start_state,
        patch: start_patch,
    };
    let reached = |w: &Waypoint| (goal_pos - w.state.position()).norm() <= robot.goal_tol;

    if reached(&start_wp) {
        return Ok(SearchResult {
            trajectory: Trajectory::single(start_wp),
            nodes: vec![start_wp],
            costs: vec![(0.0, 0.0)],
            primitives: Vec::new(),
            expansions: 0,
        });
    }
    if map.component(start_patch) != map.component(goal_patch) {
        return Err(SearchError::Infeasible { expansions: 0 });
    }

    let controls = control_set(robot);
    let mut nodes = vec![SearchNode {
        waypoint: start_wp,
        g: 0.0,
        parent: None,
        control: Control::default(),
    }];
    let mut owner: HashMap<Voxel, usize> = HashMap::new();
    owner.insert(voxel_of(&start_state, robot.voxel_size), 0);
    let mut open = BinaryHeap::new();
    let h0 = heuristic(&start_wp.state.position(), &goal_pos, robot);
    open.push(Open {
        f: h0,
        h: h0,
        seq: 0,
        node: 0,
    });
    let mut seq = 1;
    let mut expansions = 0;

    while let Some(Open { node, .. }) = open.pop() {
        let current = nodes[node];
        if owner.get(&voxel_of(&current.waypoint.state, robot.voxel_size)) != Some(&node) {
            continue;
        }
        if reached(&current.waypoint) {
            return Ok(reconstruct(map, &nodes, node, &goal_pos, robot, expansions));
        }
        if expansions >= robot.max_expansions {
            break;
        }
        expansions += 1;
        for prim in expand_node(map, &current, &controls, robot) {
            let end = *prim.end();
            let g = current.g + prim.duration;
            let voxel = voxel_of(&end.state, robot.voxel_size);
            if let Some(&other) = owner.get(&voxel) {
                if nodes[other].g <= g {
                    continue;
                }
            }
            let id = nodes.len();
            nodes.push(SearchNode {
                waypoint: end,
                g,
                parent: Some(node),
                control: prim.control,
            });
            owner.insert(voxel, id);
            let h = heuristic(&end.state.position(), &goal_pos, robot);
            open.push(Open {
                f: g + h,
                h,
                seq,
                node: id,
            });
            seq += 1;
        }
    }
    Err(SearchError::Infeasible { expansions })
}

fn reconstruct(
    map: &MultiLevelMap,
    nodes: &[SearchNode],
    last: usize,
    goal: &Point3,
    robot: &RobotParams,
    expansions: usize,
) -> SearchResult {
    let mut chain = vec![last];
    while let Some(p) = nodes[*chain.last().unwrap()].parent {
        chain.push(p);
    }
    chain.reverse();

    let start = nodes[chain[0]].waypoint;
    let mut trajectory = Trajectory::single(start);
    let mut waypoints = vec![start];
    let mut costs = vec![(0.0, heuristic(&start.state.position(), goal, robot))];
    let mut primitives = Vec::with_capacity(chain.len() - 1);
    let mut step = 0usize;
    for pair in chain.windows(2) {
        let (from, to) = (&nodes[pair[0]], &nodes[pair[1]]);
        let prim = integrate_primitive(map, &from.waypoint, to.control, robot)
            .expect("replaying a stored primitive succeeds");
        for w in &prim.waypoints {
            step += 1;
            trajectory.push(*w, step as f64 * robot.dt, prim.control);
        }
        waypoints.push(to.waypoint);
        costs.push((to.g, heuristic(&to.waypoint.state.position(), goal, robot)));
        primitives.push(prim);
    }
    // Keep the accumulated clock consistent with the node costs.
    trajectory.total_time = nodes[last].g;
    SearchResult {
        trajectory,
        nodes: waypoints,
        costs,
        primitives,
        expansions,
    }
}
