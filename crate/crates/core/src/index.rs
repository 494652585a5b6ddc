//! Constant-time patch lookups over the regular mesh-cell layout.

use crate::map::{MeshIndex, MultiLevelMap, Part, Patch, PatchId};

/// The mesh cell part containing `(x, y)`. Points on the diagonal belong to
/// the down part.
pub fn locate_cell(x: f64, y: f64, res_m: f64) -> MeshIndex {
    let m = (x / res_m).floor();
    let n = (y / res_m).floor();
    let part = if y - n * res_m <= x - m * res_m {
        Part::Down
    } else {
        Part::Up
    };
    MeshIndex::new(m as i32, n as i32, part)
}

pub fn shares_vertices(p1: &Patch, p2: &Patch) -> bool {
    p1.shares_vertices(p2)
}

/// Finds the traversable patch under `(x, y)`.
///
/// With a hint, only the hint itself (when `(x, y)` is still in its mesh
/// part) or traversable patches sharing a vertex with it qualify; this is
/// how a moving waypoint stays on its own level. Without a hint the patch
/// whose plane height at `(x, y)` is nearest to `ref_z` wins.
pub fn locate_patch(
    map: &MultiLevelMap,
    x: f64,
    y: f64,
    hint: Option<PatchId>,
    ref_z: f64,
) -> Option<PatchId> {
    match hint {
        Some(h) => locate_patch_hinted(map, x, y, h),
        None => locate_patch_near(map, x, y, ref_z),
    }
}

pub fn locate_patch_hinted(map: &MultiLevelMap, x: f64, y: f64, hint: PatchId) -> Option<PatchId> {
    let idx = locate_cell(x, y, map.params().res_m);
    let from = map.patch(hint);
    if from.home == idx {
        return from.traversable.then_some(hint);
    }
    let from_z = from.z_at(x, y);
    let shared = |q: &Patch| {
        q.vertices
            .iter()
            .filter(|v| from.vertices.contains(v))
            .count()
    };
    map.neighbors(hint)
        .iter()
        .map(|&q| map.patch(q))
        .filter(|q| q.home == idx && q.traversable)
        .min_by(|a, b| {
            shared(b)
                .cmp(&shared(a))
                .then(
                    (a.z_at(x, y) - from_z)
                        .abs()
                        .total_cmp(&(b.z_at(x, y) - from_z).abs()),
                )
                .then(a.level.cmp(&b.level))
        })
        .map(|q| q.id)
}

pub fn locate_patch_near(map: &MultiLevelMap, x: f64, y: f64, ref_z: f64) -> Option<PatchId> {
    let idx = locate_cell(x, y, map.params().res_m);
    map.cell_patches(idx)
        .iter()
        .filter(|p| p.traversable)
        .min_by(|a, b| {
            (a.z_at(x, y) - ref_z)
                .abs()
                .total_cmp(&(b.z_at(x, y) - ref_z).abs())
        })
        .map(|p| p.id)
}

/// Follows a straight xy move from `start` (resting on `from`) to `target`
/// in hops short enough that every hop lands on a vertex-sharing neighbour.
/// Returns the patch under `target`, or `None` if the move leaves the
/// traversable surface.
pub fn trace_patch(
    map: &MultiLevelMap,
    from: PatchId,
    start: (f64, f64),
    target: (f64, f64),
) -> Option<PatchId> {
    let max_hop = map.params().res_m / 4.0;
    let (dx, dy) = (target.0 - start.0, target.1 - start.1);
    let hops = ((dx.hypot(dy) / max_hop).ceil() as usize).max(1);
    let mut current = from;
    for k in 1..=hops {
        let (x, y) = if k == hops {
            target
        } else {
            let t = k as f64 / hops as f64;
            (start.0 + t * dx, start.1 + t * dy)
        };
        current = locate_patch_hinted(map, x, y, current)?;
    }
    Some(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_examples() {
        assert_eq!(
            locate_cell(0.1, 0.05, 0.6),
            MeshIndex::new(0, 0, Part::Down)
        );
        assert_eq!(locate_cell(0.05, 0.1, 0.6), MeshIndex::new(0, 0, Part::Up));
        assert_eq!(locate_cell(0.2, 0.2, 0.6), MeshIndex::new(0, 0, Part::Down));
        assert_eq!(
            locate_cell(-0.1, -0.05, 0.6),
            MeshIndex::new(-1, -1, Part::Up)
        );
        assert_eq!(
            locate_cell(0.7, 0.05, 0.6),
            MeshIndex::new(1, 0, Part::Down)
        );
        assert_eq!(locate_cell(0.65, 0.5, 0.6), MeshIndex::new(1, 0, Part::Up));
    }
}
