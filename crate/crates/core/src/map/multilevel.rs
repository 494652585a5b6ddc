use std::collections::VecDeque;

use super::patch::{patch_frame, Patch, VertexKey};
use super::{MapError, MapParams, MeshIndex, Part, PatchId};
use crate::cloud::Point3;

/// A patch before it is placed in a map.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PatchDraft {
    pub home: (i32, i32, Part),
    pub vertices: [Point3; 3],
    pub keys: [VertexKey; 3],
}

impl PatchDraft {
    fn mean_z(&self) -> f64 {
        self.vertices.iter().map(|v| v.z).sum::<f64>() / 3.0
    }
}

const NO_COMPONENT: u32 = u32::MAX;

/// The finished, immutable multi-level map.
///
/// Patches are stored sorted by mesh cell (row-major, `n` outer), then part,
/// then height, so every `(cell, part)` owns a contiguous run of ids and its
/// `level` is the position in that run.
#[derive(Debug, Clone)]
pub struct MultiLevelMap {
    params: MapParams,
    patches: Vec<Patch>,
    origin: (i32, i32),
    width: usize,
    height: usize,
    /// Patch id ranges per (cell, part) slot, CSR style.
    starts: Vec<u32>,
    adj_starts: Vec<u32>,
    adjacency: Vec<PatchId>,
    /// Connected component of each traversable patch over shared vertices.
    component: Vec<u32>,
}

impl MultiLevelMap {
    pub(crate) fn from_drafts(
        params: MapParams,
        mut drafts: Vec<PatchDraft>,
    ) -> Result<Self, MapError> {
        drafts.sort_by(|a, b| {
            (a.home.1, a.home.0, a.home.2)
                .cmp(&(b.home.1, b.home.0, b.home.2))
                .then(a.mean_z().total_cmp(&b.mean_z()))
                .then(a.keys.cmp(&b.keys))
        });
        let (mut m0, mut m1, mut n0, mut n1) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
        for d in &drafts {
            m0 = m0.min(d.home.0);
            m1 = m1.max(d.home.0);
            n0 = n0.min(d.home.1);
            n1 = n1.max(d.home.1);
        }
        let (width, height) = if drafts.is_empty() {
            (0, 0)
        } else {
            ((m1 - m0 + 1) as usize, (n1 - n0 + 1) as usize)
        };
        let origin = if drafts.is_empty() { (0, 0) } else { (m0, n0) };
        let slots = width * height * 2;
        let max_slope = params.thr_slope;

        let mut patches = Vec::with_capacity(drafts.len());
        let mut counts = vec![0u32; slots];
        for (i, d) in drafts.into_iter().enumerate() {
            let (frame, vertices) = patch_frame(d.vertices[0], d.vertices[1], d.vertices[2])?;
            let keys = if vertices == d.vertices {
                d.keys
            } else {
                [d.keys[0], d.keys[2], d.keys[1]]
            };
            let slot = slot_of(origin, width, d.home.0, d.home.1, d.home.2);
            let level = counts[slot];
            counts[slot] += 1;
            let mut patch = Patch {
                id: PatchId(i as u32),
                home: MeshIndex::new(d.home.0, d.home.1, d.home.2),
                level,
                vertices,
                keys,
                frame,
                traversable: false,
            };
            patch.traversable = patch.slope_deg() < max_slope;
            patches.push(patch);
        }
        let mut starts = Vec::with_capacity(slots + 1);
        let mut acc = 0u32;
        starts.push(0);
        for c in counts {
            acc += c;
            starts.push(acc);
        }

        let mut map = MultiLevelMap {
            params,
            patches,
            origin,
            width,
            height,
            starts,
            adj_starts: Vec::new(),
            adjacency: Vec::new(),
            component: Vec::new(),
        };
        map.link();
        Ok(map)
    }

    /// Computes vertex-sharing adjacency and traversable components.
    fn link(&mut self) {
        let mut adj_starts = Vec::with_capacity(self.patches.len() + 1);
        let mut adjacency = Vec::new();
        adj_starts.push(0);
        for p in &self.patches {
            for dn in -1..=1 {
                for dm in -1..=1 {
                    for part in [Part::Down, Part::Up] {
                        let idx = MeshIndex::new(p.home.m + dm, p.home.n + dn, part);
                        for q in self.cell_patches(idx) {
                            if q.id != p.id && p.shares_vertices(q) {
                                adjacency.push(q.id);
                            }
                        }
                    }
                }
            }
            adj_starts.push(adjacency.len() as u32);
        }
        self.adj_starts = adj_starts;
        self.adjacency = adjacency;

        let mut component = vec![NO_COMPONENT; self.patches.len()];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..self.patches.len() {
            if !self.patches[start].traversable || component[start] != NO_COMPONENT {
                continue;
            }
            component[start] = next;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                for &q in self.neighbors(PatchId(i as u32)) {
                    let qi = q.index();
                    if self.patches[qi].traversable && component[qi] == NO_COMPONENT {
                        component[qi] = next;
                        queue.push_back(qi);
                    }
                }
            }
            next += 1;
        }
        self.component = component;
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn patch(&self, id: PatchId) -> &Patch {
        &self.patches[id.index()]
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn traversable_count(&self) -> usize {
        self.patches.iter().filter(|p| p.traversable).count()
    }

    /// Inclusive mesh cell index bounds `((m_min, n_min), (m_max, n_max))`.
    pub fn mesh_bounds(&self) -> Option<((i32, i32), (i32, i32))> {
        (self.width > 0).then(|| {
            let (m0, n0) = self.origin;
            (
                (m0, n0),
                (m0 + self.width as i32 - 1, n0 + self.height as i32 - 1),
            )
        })
    }

    /// All patches of one mesh cell part, ascending in height.
    pub fn cell_patches(&self, idx: MeshIndex) -> &[Patch] {
        let (m0, n0) = self.origin;
        let (dm, dn) = (idx.m - m0, idx.n - n0);
        if dm < 0 || dn < 0 || dm as usize >= self.width || dn as usize >= self.height {
            return &[];
        }
        let slot = slot_of(self.origin, self.width, idx.m, idx.n, idx.part);
        &self.patches[self.starts[slot] as usize..self.starts[slot + 1] as usize]
    }

    /// Patches sharing at least one vertex with `id`, traversable or not.
    pub fn neighbors(&self, id: PatchId) -> &[PatchId] {
        let i = id.index();
        &self.adjacency[self.adj_starts[i] as usize..self.adj_starts[i + 1] as usize]
    }

    /// Shared-vertex component of a traversable patch.
    pub fn component(&self, id: PatchId) -> Option<u32> {
        let c = self.component[id.index()];
        (c != NO_COMPONENT).then_some(c)
    }

    /// Looks a patch up by its home and level.
    pub fn patch_at(&self, idx: MeshIndex, level: u32) -> Option<&Patch> {
        self.cell_patches(idx).get(level as usize)
    }
}

fn slot_of(origin: (i32, i32), width: usize, m: i32, n: i32, part: Part) -> usize {
    let (dm, dn) = ((m - origin.0) as usize, (n - origin.1) as usize);
    (dn * width + dm) * 2 + part.index()
}
