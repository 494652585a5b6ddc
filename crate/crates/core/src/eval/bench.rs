use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::metrics::trajectory_metrics;
use crate::map::MultiLevelMap;
use crate::opt::{same_level_obstacles, OptParams};
use crate::pipeline::{plan_and_optimize, PlanError};
use crate::search::{Pose, RobotParams, RobotState, SearchError, Waypoint};

pub const PAIRS_CSV_HEADER: &str =
    "index,start_x,start_y,start_z,goal_x,goal_y,goal_z,status,expansions,\
traj_time,length,mean_curvature,max_curvature";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Success,
    SnapFailure,
    Infeasible,
    Collision,
    OptFailure,
}

impl PairStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PairStatus::Success => "success",
            PairStatus::SnapFailure => "snap_failure",
            PairStatus::Infeasible => "infeasible",
            PairStatus::Collision => "collision",
            PairStatus::OptFailure => "opt_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOutcome {
    pub index: usize,
    pub start: Pose,
    pub goal: Pose,
    pub status: PairStatus,
    pub expansions: usize,
    /// Trajectory duration found by the search.
    pub traj_time: f64,
    pub length: f64,
    pub mean_curvature: f64,
    pub max_curvature: f64,
    /// Wall-clock planning plus optimization time.
    pub planning_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub n_pairs: usize,
    pub successes: usize,
    /// `None` when no pairs were run.
    pub success_rate: Option<f64>,
    pub mean_length: Option<f64>,
    pub mean_curvature: Option<f64>,
    pub mean_tp_seconds: Option<f64>,
    pub median_tp_seconds: Option<f64>,
    pub status_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub pairs: Vec<PairOutcome>,
    pub summary: BenchSummary,
}

fn run_pair(
    map: &MultiLevelMap,
    index: usize,
    (start, goal): (Pose, Pose),
    robot: &RobotParams,
    opt: &OptParams,
    safety_radius: f64,
) -> PairOutcome {
    let clock = Instant::now();
    let result = plan_and_optimize(map, start, goal, robot, opt);
    let planning_seconds = clock.elapsed().as_secs_f64();
    let mut out = PairOutcome {
        index,
        start,
        goal,
        status: PairStatus::Infeasible,
        expansions: 0,
        traj_time: 0.0,
        length: 0.0,
        mean_curvature: 0.0,
        max_curvature: 0.0,
        planning_seconds,
    };
    match result {
        Ok(plan) => {
            let report = trajectory_metrics(&plan.stage2, map, safety_radius);
            out.expansions = plan.search.expansions;
            out.traj_time = plan.search.total_time();
            out.length = report.length;
            out.mean_curvature = report.mean_curvature;
            out.max_curvature = report.max_curvature;
            out.status = if report.collision_free {
                PairStatus::Success
            } else {
                PairStatus::Collision
            };
        }
        Err(PlanError::Search(SearchError::InvalidStart | SearchError::InvalidGoal)) => {
            out.status = PairStatus::SnapFailure;
        }
        Err(PlanError::Search(SearchError::Infeasible { expansions })) => {
            out.expansions = expansions
        }
        Err(_) => out.status = PairStatus::OptFailure,
    }
    out
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(xs: &[f64]) -> Option<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => None,
        n if n % 2 == 1 => Some(v[n / 2]),
        n => Some(0.5 * (v[n / 2 - 1] + v[n / 2])),
    }
}

/// Plans and optimizes every pair in parallel. A pair succeeds when the
/// optimized trajectory exists and is collision free.
pub fn run_benchmark(
    map: &MultiLevelMap,
    pairs: &[(Pose, Pose)],
    robot: &RobotParams,
    opt: &OptParams,
    safety_radius: f64,
) -> BenchReport {
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &pair)| run_pair(map, i, pair, robot, opt, safety_radius))
        .collect();
    let ok: Vec<&PairOutcome> = outcomes
        .iter()
        .filter(|o| o.status == PairStatus::Success)
        .collect();
    let times: Vec<f64> = outcomes.iter().map(|o| o.planning_seconds).collect();
    let mut status_counts = BTreeMap::new();
    for o in &outcomes {
        *status_counts
            .entry(o.status.as_str().to_owned())
            .or_insert(0) += 1;
    }
    let summary = BenchSummary {
        n_pairs: outcomes.len(),
        successes: ok.len(),
        success_rate: (!outcomes.is_empty()).then(|| ok.len() as f64 / outcomes.len() as f64),
        mean_length: mean(&ok.iter().map(|o| o.length).collect::<Vec<_>>()),
        mean_curvature: mean(&ok.iter().map(|o| o.mean_curvature).collect::<Vec<_>>()),
        mean_tp_seconds: mean(&times),
        median_tp_seconds: median(&times),
        status_counts,
    };
    BenchReport {
        pairs: outcomes,
        summary,
    }
}

/// Seeded random start/goal pairs on patch centroids of the largest
/// traversable component. Centroids with a same-level obstacle nearer than
/// `clearance` are avoided unless nothing else is left.
pub fn generate_pairs(
    map: &MultiLevelMap,
    n: usize,
    seed: u64,
    clearance: f64,
) -> Vec<(Pose, Pose)> {
    let mut sizes: BTreeMap<u32, usize> = BTreeMap::new();
    for p in map.patches() {
        if let Some(c) = map.component(p.id) {
            *sizes.entry(c).or_default() += 1;
        }
    }
    let Some(largest) = sizes
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(c, _)| *c)
    else {
        return Vec::new();
    };
    let members: Vec<_> = map
        .patches()
        .iter()
        .filter(|p| map.component(p.id) == Some(largest))
        .collect();
    let clear: Vec<_> = members
        .iter()
        .filter(|p| {
            let c = p.centroid();
            let w = Waypoint {
                state: RobotState {
                    x: c.x,
                    y: c.y,
                    z: c.z,
                    ..Default::default()
                },
                patch: p.id,
            };
            clearance <= 0.0 || same_level_obstacles(map, &w, clearance).is_none()
        })
        .collect();
    let pool = if clear.is_empty() {
        members.iter().collect()
    } else {
        clear
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pose = |rng: &mut ChaCha8Rng| {
        let c = pool[rng.random_range(0..pool.len())].centroid();
        Pose {
            x: c.x,
            y: c.y,
            z: c.z,
            yaw: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        }
    };
    (0..n).map(|_| (pose(&mut rng), pose(&mut rng))).collect()
}

/// Per-pair results without timings, so reruns give identical files.
pub fn write_pairs_csv(report: &BenchReport, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{PAIRS_CSV_HEADER}")?;
    for o in &report.pairs {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            o.index,
            o.start.x,
            o.start.y,
            o.start.z,
            o.goal.x,
            o.goal.y,
            o.goal.z,
            o.status.as_str(),
            o.expansions,
            o.traj_time,
            o.length,
            o.mean_curvature,
            o.max_curvature
        )?;
    }
    Ok(())
}

pub fn write_timings_csv(report: &BenchReport, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "index,planning_seconds")?;
    for o in &report.pairs {
        writeln!(out, "{},{}", o.index, o.planning_seconds)?;
    }
    Ok(())
}
