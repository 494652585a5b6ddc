//! Global trajectory planning for ground robots on multi-level terrain.
//!
//! The pipeline has three stages:
//!
//! 1. [`map`] turns a raw point cloud into a multi-level map of triangular
//!    patches that share vertices across regularly arranged mesh cells.
//! 2. [`search`] runs a min-time A* over differential-drive motion
//!    primitives integrated on those patches.
//! 3. [`opt`] refines the resulting path, first in 2D against same-level
//!    obstacles, then in 3D for curvature and smoothness.
//!
//! [`eval`] measures map accuracy and trajectory quality, and [`pipeline`]
//! wires the stages together for the CLI and the benchmark harness.

pub mod cloud;
pub mod eval;
pub mod index;
pub mod map;
pub mod opt;
pub mod pipeline;
pub mod search;

mod fmt;

pub use cloud::{CloudFormat, Point3, PointCloud};
pub use fmt::fmt_g9;
pub use map::{MapParams, MeshIndex, MultiLevelMap, Part, Patch, PatchId};
pub use opt::OptParams;
pub use search::{RobotParams, RobotState, Trajectory, Waypoint};
