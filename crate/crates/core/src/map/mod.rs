//! Multi-level triangular-patch map construction.
//!
//! Points are clustered into square map cells, each cell's heights are cut
//! into vertically separated slices, and slices of three neighbouring cells
//! are chained into triangular patches. Patches live in mesh cells, which
//! are offset from the map grid by half a cell so that their corners are map
//! cell centers; each mesh cell is split along its diagonal into a `Down`
//! and an `Up` part.

mod builder;
pub mod io;
mod multilevel;
mod patch;
mod slice;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builder::build_map;
pub use multilevel::MultiLevelMap;
pub use patch::{patch_frame, Patch, PatchFrame, VertexKey};
pub use slice::{
    can_connect, cluster_points, representative_z, slice_cell, slice_cloud, CellSlices, Slice,
};

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("invalid map parameters: {0}")]
    InvalidParams(String),
    #[error("patch vertices are collinear")]
    DegeneratePatch,
    #[error("patch is vertical")]
    VerticalPatch,
}

/// Map construction parameters. Lengths in meters, `thr_slope` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapParams {
    /// Map cell size.
    pub res_m: f64,
    /// Minimum vertical gap separating two slices of one cell.
    pub thr_slice: f64,
    /// Slices with fewer points are discarded as noise.
    pub least_num: usize,
    /// Slack on the slice connection distance, in units of `res_pc`.
    pub lambda: f64,
    /// Point cloud resolution.
    pub res_pc: f64,
    /// Slice span above which the maximum height represents the slice.
    pub thr_rep: f64,
    /// Patches tilted at least this much from horizontal are untraversable.
    pub thr_slope: f64,
}

impl Default for MapParams {
    fn default() -> Self {
        MapParams {
            res_m: 0.6,
            thr_slice: 1.0,
            least_num: 3,
            lambda: 1.5,
            res_pc: 0.2,
            thr_rep: 0.3,
            thr_slope: 40.0,
        }
    }
}

impl MapParams {
    /// Defaults scaled to a point cloud resolution, with `res_m = 3 res_pc`.
    pub fn for_resolution(res_pc: f64) -> Self {
        MapParams {
            res_pc,
            res_m: 3.0 * res_pc,
            thr_rep: 1.5 * res_pc,
            ..MapParams::default()
        }
    }

    pub fn validate(&self) -> Result<(), MapError> {
        let bad = |msg: &str| Err(MapError::InvalidParams(msg.to_owned()));
        let positive = [
            ("res_m", self.res_m),
            ("thr_slice", self.thr_slice),
            ("res_pc", self.res_pc),
            ("thr_rep", self.thr_rep),
            ("thr_slope", self.thr_slope),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(MapError::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.least_num == 0 {
            return bad("least_num must be at least 1");
        }
        if !(self.lambda.is_finite() && self.lambda >= 1.0) {
            return bad("lambda must be at least 1.0");
        }
        if self.res_m < self.res_pc {
            return bad("res_m must not be smaller than res_pc");
        }
        if self.thr_slope >= 90.0 {
            return bad("thr_slope must be below 90 degrees");
        }
        Ok(())
    }

    /// Maximum vertical distance for two slices to connect.
    pub fn connect_distance(&self) -> f64 {
        self.lambda * self.res_pc
    }
}

/// Which triangle of a mesh cell: `Down` lies below the diagonal from
/// `(m, n)` to `(m + 1, n + 1)`, `Up` above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Down,
    Up,
}

impl Part {
    pub fn as_str(self) -> &'static str {
        match self {
            Part::Down => "down",
            Part::Up => "up",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Part::Down => 0,
            Part::Up => 1,
        }
    }
}

impl std::str::FromStr for Part {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "down" => Ok(Part::Down),
            "up" => Ok(Part::Up),
            other => Err(format!("unknown mesh part {other:?}")),
        }
    }
}

/// Address of one half of a mesh cell. Mesh cell `(m, n)` covers
/// `[m res_m, (m+1) res_m] x [n res_m, (n+1) res_m]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeshIndex {
    pub m: i32,
    pub n: i32,
    pub part: Part,
}

impl MeshIndex {
    pub fn new(m: i32, n: i32, part: Part) -> Self {
        MeshIndex { m, n, part }
    }
}

/// Index of a patch inside a [`MultiLevelMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatchId(pub u32);

impl PatchId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}
