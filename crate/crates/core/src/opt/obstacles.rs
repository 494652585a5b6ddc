use serde::{Deserialize, Serialize};

use crate::map::{MultiLevelMap, PatchId};
use crate::search::Waypoint;

/// Nearest same-level obstacle: the center of an obstacle mesh cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub point: [f64; 2],
    pub distance: f64,
}

/// Mesh cells whose closed square meets the closed disk, as a local grid
/// starting at `origin` with `width` columns.
struct Disk {
    origin: (i32, i32),
    width: usize,
    inside: Vec<bool>,
}

impl Disk {
    fn new(x: f64, y: f64, r: f64, res: f64) -> Self {
        let (m0, m1) = (
            ((x - r) / res).floor() as i32,
            ((x + r) / res).floor() as i32,
        );
        let (n0, n1) = (
            ((y - r) / res).floor() as i32,
            ((y + r) / res).floor() as i32,
        );
        let width = (m1 - m0 + 1) as usize;
        let mut inside = Vec::with_capacity(width * (n1 - n0 + 1) as usize);
        for n in n0..=n1 {
            for m in m0..=m1 {
                let dx = x - x.clamp(m as f64 * res, (m + 1) as f64 * res);
                let dy = y - y.clamp(n as f64 * res, (n + 1) as f64 * res);
                inside.push(dx.hypot(dy) <= r);
            }
        }
        Disk {
            origin: (m0, n0),
            width,
            inside,
        }
    }

    fn slot(&self, m: i32, n: i32) -> Option<usize> {
        let (dm, dn) = (m - self.origin.0, n - self.origin.1);
        if dm < 0 || dn < 0 || dm as usize >= self.width {
            return None;
        }
        let k = dn as usize * self.width + dm as usize;
        (k < self.inside.len() && self.inside[k]).then_some(k)
    }

    fn cell(&self, k: usize) -> (i32, i32) {
        (
            self.origin.0 + (k % self.width) as i32,
            self.origin.1 + (k / self.width) as i32,
        )
    }
}

/// Mesh cells within `r_o` of the waypoint that are not free at its level,
/// in `(n, m)` order. A cell is free when both of its parts hold a
/// traversable patch reachable from the waypoint's patch through
/// vertex-sharing traversable patches inside the disk.
pub fn obstacle_cells(map: &MultiLevelMap, w: &Waypoint, r_o: f64) -> Vec<(i32, i32)> {
    let disk = Disk::new(w.state.x, w.state.y, r_o, map.params().res_m);
    let mut reached = vec![[false; 2]; disk.inside.len()];
    let mut seen: Vec<Vec<PatchId>> = vec![Vec::new(); disk.inside.len()];
    let mut queue = Vec::new();
    let start = map.patch(w.patch);
    if let (true, Some(k)) = (start.traversable, disk.slot(start.home.m, start.home.n)) {
        seen[k].push(w.patch);
        queue.push(w.patch);
    }
    let mut head = 0;
    while head < queue.len() {
        let p = map.patch(queue[head]);
        head += 1;
        if let Some(k) = disk.slot(p.home.m, p.home.n) {
            reached[k][p.home.part.index()] = true;
        }
        for &q in map.neighbors(p.id) {
            let qp = map.patch(q);
            if !qp.traversable {
                continue;
            }
            if let Some(k) = disk.slot(qp.home.m, qp.home.n) {
                if !seen[k].contains(&q) {
                    seen[k].push(q);
                    queue.push(q);
                }
            }
        }
    }
    (0..disk.inside.len())
        .filter(|&k| disk.inside[k] && reached[k] != [true, true])
        .map(|k| disk.cell(k))
        .collect()
}

/// The nearest same-level obstacle within `r_o`, if any.
pub fn same_level_obstacles(map: &MultiLevelMap, w: &Waypoint, r_o: f64) -> Option<Obstacle> {
    let res = map.params().res_m;
    let mut best: Option<Obstacle> = None;
    for (m, n) in obstacle_cells(map, w, r_o) {
        let point = [(m as f64 + 0.5) * res, (n as f64 + 0.5) * res];
        let distance = (point[0] - w.state.x).hypot(point[1] - w.state.y);
        if distance <= r_o && best.is_none_or(|b| distance < b.distance) {
            best = Some(Obstacle { point, distance });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_cells_cover_the_disk() {
        let d = Disk::new(0.3, 0.3, 0.5, 0.6);
        assert_eq!(d.inside.iter().filter(|b| **b).count(), 9);
        let d = Disk::new(0.3, 0.3, 0.2, 0.6);
        assert_eq!(d.inside, vec![true]);
        assert_eq!(d.cell(0), (0, 0));
        let d = Disk::new(0.55, 0.55, 0.1, 0.6);
        assert_eq!(d.slot(1, 1), Some(3));
        assert_eq!(d.slot(2, 1), None);
    }
}
