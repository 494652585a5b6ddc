use rayon::prelude::*;

use super::multilevel::{MultiLevelMap, PatchDraft};
use super::patch::VertexKey;
use super::slice::{can_connect, representative_z, slice_cloud, CellSlices};
use super::{MapError, MapParams, Part};
use crate::cloud::{Point3, PointCloud};

/// Builds the multi-level map of `cloud`.
///
/// Map cells are processed in parallel; the result is identical to a
/// sequential build because patches are ordered by their mesh cell, part
/// and height before ids are assigned.
pub fn build_map(cloud: &PointCloud, params: &MapParams) -> Result<MultiLevelMap, MapError> {
    params.validate()?;
    let slices = slice_cloud(cloud, params);
    let corners: Vec<(i32, i32)> = slices.cells.keys().copied().collect();
    let drafts: Vec<PatchDraft> = corners
        .par_iter()
        .flat_map_iter(|&(m, n)| {
            let mut out = mesh_part_patches(&slices, params, m, n, Part::Down);
            out.extend(mesh_part_patches(&slices, params, m, n, Part::Up));
            out
        })
        .collect();
    MultiLevelMap::from_drafts(*params, drafts)
}

struct Candidate {
    keys: [VertexKey; 3],
    vertices: [Point3; 3],
    mean_z: f64,
    max_z: f64,
}

/// Candidate patches of one mesh cell part, reduced so that no two share a
/// vertex, keeping the uppermost whenever they would.
fn mesh_part_patches(
    slices: &CellSlices,
    params: &MapParams,
    m: i32,
    n: i32,
    part: Part,
) -> Vec<PatchDraft> {
    // Chain first -> middle -> last along the two axis-aligned edges; the
    // middle cell is the right-angle corner of the triangle.
    let (first, middle, last) = match part {
        Part::Down => ((m, n), (m + 1, n), (m + 1, n + 1)),
        Part::Up => ((m, n), (m, n + 1), (m + 1, n + 1)),
    };
    let (s_first, s_mid, s_last) = (
        slices.get(first.0, first.1),
        slices.get(middle.0, middle.1),
        slices.get(last.0, last.1),
    );
    if s_first.is_empty() || s_mid.is_empty() || s_last.is_empty() {
        return Vec::new();
    }
    let res = params.res_m;
    let vertex = |cell: (i32, i32), idx: usize, z: f64| {
        (
            VertexKey {
                m: cell.0,
                n: cell.1,
                slice: idx as u32,
            },
            Point3::new(cell.0 as f64 * res, cell.1 as f64 * res, z),
        )
    };

    let mut candidates = Vec::new();
    for (i, a) in s_first.iter().enumerate() {
        for (j, b) in s_mid.iter().enumerate() {
            if !can_connect(a, b, params) {
                continue;
            }
            for (k, c) in s_last.iter().enumerate() {
                if !can_connect(b, c, params) {
                    continue;
                }
                let va = vertex(first, i, representative_z(a, params));
                let vb = vertex(middle, j, representative_z(b, params));
                let vc = vertex(last, k, representative_z(c, params));
                // Counter-clockwise in xy so the normal points up.
                let ordered = match part {
                    Part::Down => [va, vb, vc],
                    Part::Up => [va, vc, vb],
                };
                let vertices = ordered.map(|v| v.1);
                let zs = vertices.map(|v| v.z);
                candidates.push(Candidate {
                    keys: ordered.map(|v| v.0),
                    vertices,
                    mean_z: (zs[0] + zs[1] + zs[2]) / 3.0,
                    max_z: zs[0].max(zs[1]).max(zs[2]),
                });
            }
        }
    }
    // Enumeration order is slice-index order, so a stable sort keeps it as
    // the final tie-break.
    candidates.sort_by(|a, b| {
        b.mean_z
            .total_cmp(&a.mean_z)
            .then(b.max_z.total_cmp(&a.max_z))
    });

    let mut kept: Vec<Candidate> = Vec::new();
    for cand in candidates {
        let clashes = kept
            .iter()
            .any(|k| k.keys.iter().any(|key| cand.keys.contains(key)));
        if !clashes {
            kept.push(cand);
        }
    }
    kept.into_iter()
        .map(|c| PatchDraft {
            home: (m, n, part),
            vertices: c.vertices,
            keys: c.keys,
        })
        .collect()
}
