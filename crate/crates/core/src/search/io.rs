//! Trajectory files: a CSV with one row per waypoint and a JSON document
//! with the same fields.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Control, RobotState, Trajectory, Waypoint};
use crate::map::{MeshIndex, MultiLevelMap, Part};

pub const CSV_HEADER: &str =
    "t,x,y,z,v_left,v_right,theta,patch_cell_m,patch_cell_n,patch_part,patch_level";

#[derive(Debug, Error)]
pub enum TrajectoryFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: no patch at cell ({m}, {n}, {part}) level {level}")]
    UnknownPatch {
        line: usize,
        m: i32,
        n: i32,
        part: &'static str,
        level: u32,
    },
}

/// One serialized waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaypointRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v_left: f64,
    pub v_right: f64,
    pub theta: f64,
    pub patch_cell_m: i32,
    pub patch_cell_n: i32,
    pub patch_part: Part,
    pub patch_level: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryDoc {
    total_time: f64,
    waypoints: Vec<WaypointRecord>,
}

pub fn records(traj: &Trajectory, map: &MultiLevelMap) -> Vec<WaypointRecord> {
    traj.waypoints
        .iter()
        .zip(&traj.times)
        .map(|(w, &t)| {
            let p = map.patch(w.patch);
            let s = w.state;
            WaypointRecord {
                t,
                x: s.x,
                y: s.y,
                z: s.z,
                v_left: s.v_left,
                v_right: s.v_right,
                theta: s.theta,
                patch_cell_m: p.home.m,
                patch_cell_n: p.home.n,
                patch_part: p.home.part,
                patch_level: p.level,
            }
        })
        .collect()
}

fn from_records(
    recs: impl IntoIterator<Item = (usize, WaypointRecord)>,
    total_time: Option<f64>,
    map: &MultiLevelMap,
) -> Result<Trajectory, TrajectoryFileError> {
    let mut traj = Trajectory::default();
    for (line, r) in recs {
        let idx = MeshIndex::new(r.patch_cell_m, r.patch_cell_n, r.patch_part);
        let patch = map
            .patch_at(idx, r.patch_level)
            .ok_or(TrajectoryFileError::UnknownPatch {
                line,
                m: r.patch_cell_m,
                n: r.patch_cell_n,
                part: r.patch_part.as_str(),
                level: r.patch_level,
            })?;
        let state = RobotState {
            x: r.x,
            y: r.y,
            z: r.z,
            v_left: r.v_left,
            v_right: r.v_right,
            theta: r.theta,
        };
        traj.push(
            Waypoint {
                state,
                patch: patch.id,
            },
            r.t,
            Control::default(),
        );
    }
    if let Some(t) = total_time {
        traj.total_time = t;
    }
    Ok(traj)
}

pub fn write_csv(
    traj: &Trajectory,
    map: &MultiLevelMap,
    out: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records(traj, map) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.x,
            r.y,
            r.z,
            r.v_left,
            r.v_right,
            r.theta,
            r.patch_cell_m,
            r.patch_cell_n,
            r.patch_part.as_str(),
            r.patch_level
        )?;
    }
    Ok(())
}

pub fn read_csv(
    reader: impl BufRead,
    map: &MultiLevelMap,
) -> Result<Trajectory, TrajectoryFileError> {
    let mut recs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != CSV_HEADER {
                return Err(TrajectoryFileError::Parse {
                    line: 1,
                    message: "unexpected header".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| TrajectoryFileError::Parse {
            line: lineno,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 11 {
            return Err(bad(format!("expected 11 fields, found {}", fields.len())));
        }
        let f = |k: usize| {
            fields[k]
                .parse::<f64>()
                .map_err(|e| bad(format!("field {}: {e}", k + 1)))
        };
        let int = |k: usize| {
            fields[k]
                .parse::<i32>()
                .map_err(|e| bad(format!("field {}: {e}", k + 1)))
        };
        recs.push((
            lineno,
            WaypointRecord {
                t: f(0)?,
                x: f(1)?,
                y: f(2)?,
                z: f(3)?,
                v_left: f(4)?,
                v_right: f(5)?,
                theta: f(6)?,
                patch_cell_m: int(7)?,
                patch_cell_n: int(8)?,
                patch_part: fields[9].parse().map_err(bad)?,
                patch_level: fields[10]
                    .parse()
                    .map_err(|e| bad(format!("field 11: {e}")))?,
            },
        ));
    }
    from_records(recs, None, map)
}

pub fn write_json(
    traj: &Trajectory,
    map: &MultiLevelMap,
    out: &mut impl Write,
) -> Result<(), TrajectoryFileError> {
    let doc = TrajectoryDoc {
        total_time: traj.total_time,
        waypoints: records(traj, map),
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_json(
    reader: impl std::io::Read,
    map: &MultiLevelMap,
) -> Result<Trajectory, TrajectoryFileError> {
    let doc: TrajectoryDoc = serde_json::from_reader(reader)?;
    from_records(
        doc.waypoints.into_iter().enumerate(),
        Some(doc.total_time),
        map,
    )
}
