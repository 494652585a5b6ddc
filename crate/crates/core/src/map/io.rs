//! Map export: Wavefront OBJ for viewing and a JSON document that can be
//! loaded back into an identical [`MultiLevelMap`].

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::multilevel::PatchDraft;
use super::{MapError, MapParams, MultiLevelMap, Part, VertexKey};
use crate::cloud::Point3;
use crate::fmt::fmt_g9;

pub const MAP_FORMAT: &str = "patchnav-map";
pub const MAP_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MapFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed map file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported map file: {0}")]
    Format(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Serialize, Deserialize)]
struct MapDocument {
    format: String,
    version: u32,
    params: MapParams,
    num_patches: usize,
    num_traversable: usize,
    patches: Vec<PatchRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PatchRecord {
    id: u32,
    cell: [i32; 2],
    part: Part,
    level: u32,
    traversable: bool,
    slope_deg: f64,
    normal: [f64; 3],
    vertices: [[f64; 3]; 3],
    /// Source slice of each vertex as `[m, n, slice index]`.
    slices: [[i32; 3]; 3],
}

/// Writes one vertex per patch corner and one face per patch, with faces
/// grouped into `traversable` and `untraversable`.
pub fn write_obj(map: &MultiLevelMap, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "# patchnav multi-level map")?;
    writeln!(
        out,
        "# patches {} traversable {}",
        map.len(),
        map.traversable_count()
    )?;
    for p in map.patches() {
        for v in &p.vertices {
            writeln!(out, "v {} {} {}", fmt_g9(v.x), fmt_g9(v.y), fmt_g9(v.z))?;
        }
    }
    for (group, flag) in [("traversable", true), ("untraversable", false)] {
        writeln!(out, "g {group}")?;
        for p in map.patches().iter().filter(|p| p.traversable == flag) {
            let base = p.id.index() * 3 + 1;
            writeln!(out, "f {} {} {}", base, base + 1, base + 2)?;
        }
    }
    Ok(())
}

pub fn write_json(map: &MultiLevelMap, out: &mut impl Write) -> Result<(), MapFileError> {
    let doc = MapDocument {
        format: MAP_FORMAT.to_owned(),
        version: MAP_VERSION,
        params: *map.params(),
        num_patches: map.len(),
        num_traversable: map.traversable_count(),
        patches: map
            .patches()
            .iter()
            .map(|p| PatchRecord {
                id: p.id.0,
                cell: [p.home.m, p.home.n],
                part: p.home.part,
                level: p.level,
                traversable: p.traversable,
                slope_deg: p.slope_deg(),
                normal: p.frame.z_axis.into(),
                vertices: p.vertices.map(|v| [v.x, v.y, v.z]),
                slices: p.keys.map(|k| [k.m, k.n, k.slice as i32]),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_json(reader: impl Read) -> Result<MultiLevelMap, MapFileError> {
    let doc: MapDocument = serde_json::from_reader(reader)?;
    if doc.format != MAP_FORMAT || doc.version != MAP_VERSION {
        return Err(MapFileError::Format(format!(
            "{} v{}",
            doc.format, doc.version
        )));
    }
    doc.params.validate()?;
    let drafts = doc
        .patches
        .into_iter()
        .map(|r| PatchDraft {
            home: (r.cell[0], r.cell[1], r.part),
            vertices: r.vertices.map(|[x, y, z]| Point3::new(x, y, z)),
            keys: r.slices.map(|[m, n, s]| VertexKey {
                m,
                n,
                slice: s as u32,
            }),
        })
        .collect();
    Ok(MultiLevelMap::from_drafts(doc.params, drafts)?)
}

pub fn save_map(
    map: &MultiLevelMap,
    json_path: &Path,
    obj_path: Option<&Path>,
) -> Result<(), MapFileError> {
    let mut out = BufWriter::new(File::create(json_path)?);
    write_json(map, &mut out)?;
    out.flush()?;
    if let Some(obj) = obj_path {
        let mut out = BufWriter::new(File::create(obj)?);
        write_obj(map, &mut out)?;
        out.flush()?;
    }
    Ok(())
}

pub fn load_map(path: &Path) -> Result<MultiLevelMap, MapFileError> {
    read_json(BufReader::new(File::open(path)?))
}
