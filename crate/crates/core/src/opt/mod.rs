//! Two-stage trajectory refinement: conjugate-gradient descent on the 2D
//! collision/curvature/smoothness objective with same-level obstacle
//! lookup, then interpolation and 3D smoothing.

mod objective;
mod obstacles;
mod stage1;
mod stage2;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use objective::{objective_eval, objective_value, Objective};
pub use obstacles::{obstacle_cells, same_level_obstacles, Obstacle};
pub use stage1::{optimize_stage1, Stage1Result};
pub use stage2::{interpolate, objective3d_eval, optimize_stage2};

#[derive(Debug, Error, PartialEq)]
pub enum OptError {
    #[error("invalid optimizer parameters: {0}")]
    InvalidParams(String),
    #[error("segment {0} has zero length")]
    DegenerateSegment(usize),
    #[error("waypoint {0} is not on a traversable patch")]
    OffSurface(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptParams {
    /// Obstacle weight.
    pub w_o: f64,
    /// Curvature weight.
    pub w_c: f64,
    /// Smoothness weight.
    pub w_s: f64,
    /// Obstacles farther than this are ignored.
    pub r_o: f64,
    /// Curvature above this is penalized.
    pub c_max: f64,
    pub max_iters_stage1: usize,
    pub max_iters_stage2: usize,
    pub grad_tol: f64,
    /// Stage-2 subdivisions per segment.
    pub interp_factor: usize,
    /// Hold the stage-1 waypoints fixed during stage 2.
    pub fix_original: bool,
}

impl Default for OptParams {
    fn default() -> Self {
        OptParams {
            w_o: 1.0,
            w_c: 1.0,
            w_s: 4.0,
            r_o: 1.2,
            c_max: 1.0,
            max_iters_stage1: 100,
            max_iters_stage2: 50,
            grad_tol: 1e-6,
            interp_factor: 4,
            fix_original: true,
        }
    }
}

impl OptParams {
    pub fn validate(&self) -> Result<(), OptError> {
        for (name, w) in [
            ("w_o", self.w_o),
            ("w_c", self.w_c),
            ("w_s", self.w_s),
            ("grad_tol", self.grad_tol),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(OptError::InvalidParams(format!(
                    "{name} must be non-negative, got {w}"
                )));
            }
        }
        for (name, v) in [("r_o", self.r_o), ("c_max", self.c_max)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(OptError::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.interp_factor == 0 {
            return Err(OptError::InvalidParams(
                "interp_factor must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One optimizer iteration, as written to the optimization log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub stage: u8,
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
}

pub fn write_log_csv(log: &[LogEntry], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "stage,iteration,objective,grad_norm,step")?;
    for e in log {
        writeln!(
            out,
            "{},{},{},{},{}",
            e.stage, e.iteration, e.objective, e.grad_norm, e.step
        )?;
    }
    Ok(())
}
