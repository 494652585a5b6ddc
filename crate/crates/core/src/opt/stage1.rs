use rayon::prelude::*;

use super::objective::{objective_eval, Objective};
use super::obstacles::same_level_obstacles;
use super::{LogEntry, OptError, OptParams};
use crate::index::{locate_cell, trace_patch};
use crate::map::{MultiLevelMap, PatchId};
use crate::search::{Trajectory, Waypoint};

#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Result {
    pub trajectory: Trajectory,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub iterations: usize,
    pub log: Vec<LogEntry>,
}

pub(crate) fn check_on_surface(map: &MultiLevelMap, traj: &Trajectory) -> Result<(), OptError> {
    let res = map.params().res_m;
    for (i, w) in traj.waypoints.iter().enumerate() {
        let p = map.patch(w.patch);
        if !p.traversable || locate_cell(w.state.x, w.state.y, res) != p.home {
            return Err(OptError::OffSurface(i));
        }
    }
    Ok(())
}

fn evaluate(
    map: &MultiLevelMap,
    xs: &[[f64; 2]],
    patches: &[PatchId],
    params: &OptParams,
) -> Result<Objective, OptError> {
    let obstacles: Vec<Option<[f64; 2]>> = xs
        .par_iter()
        .zip(patches)
        .map(|(x, &patch)| {
            let mut w = Waypoint {
                state: Default::default(),
                patch,
            };
            w.state.x = x[0];
            w.state.y = x[1];
            same_level_obstacles(map, &w, params.r_o).map(|o| o.point)
        })
        .collect();
    objective_eval(xs, &obstacles, params)
}

fn dot(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| p[0] * q[0] + p[1] * q[1])
        .sum()
}

/// Polak-Ribière conjugate-gradient descent on the 2D objective over the
/// interior waypoints. Moved waypoints follow their patches across
/// boundaries and are re-projected onto the patch plane; steps that would
/// leave the traversable surface are shortened.
pub fn optimize_stage1(
    map: &MultiLevelMap,
    traj: &Trajectory,
    params: &OptParams,
) -> Result<Stage1Result, OptError> {
    params.validate()?;
    check_on_surface(map, traj)?;
    let n = traj.len();
    let mut xs: Vec<[f64; 2]> = traj
        .waypoints
        .iter()
        .map(|w| [w.state.x, w.state.y])
        .collect();
    let mut patches: Vec<PatchId> = traj.waypoints.iter().map(|w| w.patch).collect();
    if n < 2 {
        let trajectory = traj.clone();
        return Ok(Stage1Result {
            trajectory,
            initial_objective: 0.0,
            final_objective: 0.0,
            iterations: 0,
            log: vec![],
        });
    }

    let max_hop = map.params().res_m / 4.0;
    let restart = (2 * n.saturating_sub(2)).max(1);
    let mut current = evaluate(map, &xs, &patches, params)?;
    let initial_objective = current.value;
    let mut log = Vec::new();
    let mut dir: Vec<[f64; 2]> = Vec::new();
    let mut prev_grad: Vec<[f64; 2]> = Vec::new();
    let mut iterations = 0;

    while iterations < params.max_iters_stage1 {
        let g = &current.gradient;
        let gnorm = dot(g, g).sqrt();
        if gnorm <= params.grad_tol || n < 3 {
            break;
        }
        let beta = if iterations % restart == 0 || prev_grad.is_empty() {
            0.0
        } else {
            let num: f64 = g
                .iter()
                .zip(&prev_grad)
                .map(|(a, b)| a[0] * (a[0] - b[0]) + a[1] * (a[1] - b[1]))
                .sum();
            (num / dot(&prev_grad, &prev_grad)).max(0.0)
        };
        dir = if beta == 0.0 {
            g.iter().map(|v| [-v[0], -v[1]]).collect()
        } else {
            g.iter()
                .zip(&dir)
                .map(|(v, d)| [-v[0] + beta * d[0], -v[1] + beta * d[1]])
                .collect()
        };
        let mut slope = dot(g, &dir);
        if slope >= 0.0 {
            dir = g.iter().map(|v| [-v[0], -v[1]]).collect();
            slope = -gnorm * gnorm;
        }
        let dmax = dir.iter().map(|d| d[0].hypot(d[1])).fold(0.0, f64::max);
        let mut alpha = (2.0 * max_hop / dmax).min(1.0);
        let linked = links(map, &xs, &patches);
        let mut accepted = None;
        while alpha * dmax >= 1e-12 {
            if let Some(found) = try_step(map, &xs, &patches, &linked, &dir, alpha, params) {
                if found.2.value <= current.value + 1e-4 * alpha * slope {
                    accepted = Some(found);
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((nx, np, next)) = accepted else {
            log.push(LogEntry {
                stage: 1,
                iteration: iterations,
                objective: current.value,
                grad_norm: gnorm,
                step: 0.0,
            });
            break;
        };
        log.push(LogEntry {
            stage: 1,
            iteration: iterations,
            objective: next.value,
            grad_norm: gnorm,
            step: alpha,
        });
        xs = nx;
        patches = np;
        prev_grad = std::mem::replace(&mut current, next).gradient;
        iterations += 1;
    }

    let mut out = traj.clone();
    for i in 1..n.saturating_sub(1) {
        let p = map.patch(patches[i]);
        let w = &mut out.waypoints[i];
        w.state.x = xs[i][0];
        w.state.y = xs[i][1];
        w.state.z = p.z_at(xs[i][0], xs[i][1]);
        w.patch = patches[i];
    }
    Ok(Stage1Result {
        trajectory: out,
        initial_objective,
        final_objective: current.value,
        iterations,
        log,
    })
}

type Trial = (Vec<[f64; 2]>, Vec<PatchId>, Objective);

/// Whether segment `i` can be followed across the surface to waypoint `i + 1`.
fn segment_ok(map: &MultiLevelMap, xs: &[[f64; 2]], patches: &[PatchId], i: usize) -> bool {
    trace_patch(
        map,
        patches[i],
        (xs[i][0], xs[i][1]),
        (xs[i + 1][0], xs[i + 1][1]),
    ) == Some(patches[i + 1])
}

fn links(map: &MultiLevelMap, xs: &[[f64; 2]], patches: &[PatchId]) -> Vec<bool> {
    (0..xs.len().saturating_sub(1))
        .map(|i| segment_ok(map, xs, patches, i))
        .collect()
}

/// Moves every interior waypoint by `alpha * dir`. Fails if a waypoint
/// leaves the surface or a segment that could be followed before no
/// longer can.
fn try_step(
    map: &MultiLevelMap,
    xs: &[[f64; 2]],
    patches: &[PatchId],
    linked: &[bool],
    dir: &[[f64; 2]],
    alpha: f64,
    params: &OptParams,
) -> Option<Trial> {
    let n = xs.len();
    let mut nx = xs.to_vec();
    let mut np = patches.to_vec();
    for i in 1..n - 1 {
        let target = [xs[i][0] + alpha * dir[i][0], xs[i][1] + alpha * dir[i][1]];
        if target != xs[i] {
            np[i] = trace_patch(
                map,
                patches[i],
                (xs[i][0], xs[i][1]),
                (target[0], target[1]),
            )?;
            nx[i] = target;
        }
    }
    for (i, _) in linked.iter().enumerate().filter(|(_, ok)| **ok) {
        if (nx[i] != xs[i] || nx[i + 1] != xs[i + 1]) && !segment_ok(map, &nx, &np, i) {
            return None;
        }
    }
    let obj = evaluate(map, &nx, &np, params).ok()?;
    Some((nx, np, obj))
}
