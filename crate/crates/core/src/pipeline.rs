//! Search followed by both optimization stages.

use thiserror::Error;

use crate::map::MultiLevelMap;
use crate::opt::{optimize_stage1, optimize_stage2, LogEntry, OptError, OptParams, Stage1Result};
use crate::search::{search, Pose, RobotParams, SearchError, SearchResult, Trajectory};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Opt(#[from] OptError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub search: SearchResult,
    /// Thinned search nodes handed to stage 1.
    pub stage1_input: Trajectory,
    pub stage1: Stage1Result,
    pub stage2: Trajectory,
    pub stage2_log: Vec<LogEntry>,
}

impl PlanOutcome {
    pub fn log(&self) -> Vec<LogEntry> {
        self.stage1
            .log
            .iter()
            .chain(&self.stage2_log)
            .copied()
            .collect()
    }
}

/// The search nodes as a trajectory, dropping nodes closer than
/// `min_spacing` to the previously kept one. Both endpoints are kept.
pub fn node_path(result: &SearchResult, min_spacing: f64) -> Trajectory {
    let nodes = &result.nodes;
    let mut out = Trajectory::single(nodes[0]);
    for (i, w) in nodes.iter().enumerate().skip(1) {
        let last = out.waypoints.last().unwrap().state.position();
        let d = (w.state.position() - last).norm();
        if i + 1 == nodes.len() {
            if d < min_spacing && out.len() > 1 {
                out.waypoints.pop();
                out.times.pop();
                out.controls.pop();
            }
            let first = out.waypoints[0].state.position();
            if out.len() > 1 || (w.state.position() - first).norm() >= 1e-9 {
                out.push(*w, result.costs[i].0, Default::default());
            }
        } else if d >= min_spacing {
            out.push(*w, result.costs[i].0, Default::default());
        }
    }
    out.total_time = result.trajectory.total_time;
    out
}

pub fn plan_and_optimize(
    map: &MultiLevelMap,
    start: Pose,
    goal: Pose,
    robot: &RobotParams,
    opt: &OptParams,
) -> Result<PlanOutcome, PlanError> {
    opt.validate()?;
    let result = search(map, start, goal, robot)?;
    let stage1_input = node_path(&result, 0.5 * robot.voxel_size);
    let stage1 = optimize_stage1(map, &stage1_input, opt)?;
    let (stage2, stage2_log) = optimize_stage2(map, &stage1.trajectory, opt)?;
    Ok(PlanOutcome {
        search: result,
        stage1_input,
        stage1,
        stage2,
        stage2_log,
    })
}
