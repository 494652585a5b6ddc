use nalgebra::Vector3;

use super::stage1::check_on_surface;
use super::{LogEntry, OptError, OptParams};
use crate::index::{locate_patch_near, trace_patch};
use crate::map::{MultiLevelMap, PatchId};
use crate::search::{Control, RobotState, Trajectory, Waypoint};

/// Subdivides every segment into `factor` equal pieces. New waypoints rest
/// on the patch reached by following the segment from its start, with `z`
/// on that patch's plane. Returns the trajectory and, per waypoint,
/// whether it was an original one.
pub fn interpolate(
    map: &MultiLevelMap,
    traj: &Trajectory,
    factor: usize,
) -> Result<(Trajectory, Vec<bool>), OptError> {
    let mut out = Trajectory::default();
    let mut original = Vec::new();
    let n = traj.len();
    for i in 0..n {
        let w = traj.waypoints[i];
        out.push(w, traj.times[i], traj.controls[i]);
        original.push(true);
        if i + 1 == n {
            break;
        }
        let next = traj.waypoints[i + 1];
        let (s, e) = (w.state, next.state);
        for j in 1..factor {
            let t = j as f64 / factor as f64;
            let lerp = |a: f64, b: f64| a + t * (b - a);
            let (x, y) = (lerp(s.x, e.x), lerp(s.y, e.y));
            let patch = trace_patch(map, w.patch, (s.x, s.y), (x, y))
                .or_else(|| locate_patch_near(map, x, y, lerp(s.z, e.z)))
                .ok_or(OptError::OffSurface(out.len()))?;
            let state = RobotState {
                x,
                y,
                z: map.patch(patch).z_at(x, y),
                v_left: lerp(s.v_left, e.v_left),
                v_right: lerp(s.v_right, e.v_right),
                theta: s.theta,
            };
            out.push(
                Waypoint { state, patch },
                lerp(traj.times[i], traj.times[i + 1]),
                Control::default(),
            );
            original.push(false);
        }
    }
    out.total_time = traj.total_time;
    Ok((out, original))
}

/// 3D curvature and smoothness objective with gradient. Curvature at an
/// interior point is the turning angle between its segments divided by
/// the incoming segment length.
pub fn objective3d_eval(
    ps: &[Vector3<f64>],
    params: &OptParams,
) -> Result<(f64, Vec<Vector3<f64>>), OptError> {
    let n = ps.len();
    let mut grad = vec![Vector3::zeros(); n];
    let mut value = 0.0;
    for i in 1..n {
        if (ps[i] - ps[i - 1]).norm() < 1e-9 {
            return Err(OptError::DegenerateSegment(i - 1));
        }
    }
    for i in 1..n.saturating_sub(1) {
        let a = ps[i] - ps[i - 1];
        let b = ps[i + 1] - ps[i];
        let la = a.norm();
        let c = a.cross(&b);
        let (s, d) = (c.norm(), a.dot(&b));
        let theta = s.atan2(d);
        let e = theta / la - params.c_max;
        if e > 0.0 {
            value += params.w_c * e * e;
            if s > 1e-12 {
                let denom = s * s + d * d;
                let dth_da = (b.cross(&c) / s * d - b * s) / denom;
                let dth_db = (c.cross(&a) / s * d - a * s) / denom;
                let k = 2.0 * params.w_c * e;
                let dka = dth_da / la - a * (theta / (la * la * la));
                let dkb = dth_db / la;
                grad[i - 1] -= dka * k;
                grad[i] += (dka - dkb) * k;
                grad[i + 1] += dkb * k;
            }
        }
        let r = ps[i + 1] - ps[i] * 2.0 + ps[i - 1];
        value += params.w_s * r.norm_squared();
        grad[i - 1] += r * (2.0 * params.w_s);
        grad[i] -= r * (4.0 * params.w_s);
        grad[i + 1] += r * (2.0 * params.w_s);
    }
    Ok((value, grad))
}

/// Interpolates the stage-1 path and smooths it in 3D by projected
/// gradient descent. Each waypoint stays within `thr_rep / 2` of its patch
/// plane; endpoints, and with `fix_original` every stage-1 waypoint, stay
/// put.
pub fn optimize_stage2(
    map: &MultiLevelMap,
    traj: &Trajectory,
    params: &OptParams,
) -> Result<(Trajectory, Vec<LogEntry>), OptError> {
    params.validate()?;
    check_on_surface(map, traj)?;
    let (mut out, original) = interpolate(map, traj, params.interp_factor)?;
    let n = out.len();
    let mut log = Vec::new();
    if n < 3 || params.max_iters_stage2 == 0 {
        return Ok((out, log));
    }
    let free: Vec<bool> = (0..n)
        .map(|i| i > 0 && i + 1 < n && !(params.fix_original && original[i]))
        .collect();
    let mut ps: Vec<Vector3<f64>> = out.positions().map(|p| p.coords).collect();
    let mut patches: Vec<PatchId> = out.waypoints.iter().map(|w| w.patch).collect();
    let band = 0.5 * map.params().thr_rep;
    let max_hop = map.params().res_m / 4.0;
    let (mut value, mut grad) = objective3d_eval(&ps, params)?;

    for iteration in 0..params.max_iters_stage2 {
        let mask = |i: usize, g: &Vector3<f64>| if free[i] { *g } else { Vector3::zeros() };
        let g: Vec<Vector3<f64>> = grad.iter().enumerate().map(|(i, g)| mask(i, g)).collect();
        let gnorm = g.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
        if gnorm <= params.grad_tol {
            break;
        }
        let gmax = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut alpha = (max_hop / gmax).min(1.0);
        let mut accepted = None;
        while alpha * gmax >= 1e-12 {
            if let Some(trial) = project_step(map, &ps, &patches, &g, alpha, band) {
                if let Ok((v, gr)) = objective3d_eval(&trial.0, params) {
                    if v < value {
                        accepted = Some((trial, v, gr));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some(((nps, npatches), v, gr)) = accepted else {
            log.push(LogEntry {
                stage: 2,
                iteration,
                objective: value,
                grad_norm: gnorm,
                step: 0.0,
            });
            break;
        };
        log.push(LogEntry {
            stage: 2,
            iteration,
            objective: v,
            grad_norm: gnorm,
            step: alpha,
        });
        ps = nps;
        patches = npatches;
        value = v;
        grad = gr;
    }

    for i in 0..n {
        if free[i] {
            let w = &mut out.waypoints[i];
            w.state.x = ps[i].x;
            w.state.y = ps[i].y;
            w.state.z = ps[i].z;
            w.patch = patches[i];
        }
    }
    Ok((out, log))
}

fn project_step(
    map: &MultiLevelMap,
    ps: &[Vector3<f64>],
    patches: &[PatchId],
    g: &[Vector3<f64>],
    alpha: f64,
    band: f64,
) -> Option<(Vec<Vector3<f64>>, Vec<PatchId>)> {
    let mut nps = ps.to_vec();
    let mut np = patches.to_vec();
    for i in 0..ps.len() {
        if g[i] == Vector3::zeros() {
            continue;
        }
        let t = ps[i] - g[i] * alpha;
        np[i] = trace_patch(map, patches[i], (ps[i].x, ps[i].y), (t.x, t.y))?;
        let zp = map.patch(np[i]).z_at(t.x, t.y);
        nps[i] = Vector3::new(t.x, t.y, t.z.clamp(zp - band, zp + band));
    }
    Some((nps, np))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn straight_3d_line_is_free() {
        let ps: Vec<Vector3<f64>> = (0..5)
            .map(|i| Vector3::new(0.3, 0.2, 0.1) * i as f64)
            .collect();
        let (v, g) = objective3d_eval(&ps, &OptParams::default()).unwrap();
        assert!(v < 1e-24);
        assert!(g.iter().all(|g| g.norm() < 1e-12));
    }

    proptest! {
        #[test]
        fn gradient_matches_central_differences(
            pts in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64, -1.0..1.0f64), 3..7),
            c_max in 0.05..1.0f64,
        ) {
            let p = OptParams { c_max, ..OptParams::default() };
            let ps: Vec<Vector3<f64>> = pts.iter().map(|&(x, y, z)| Vector3::new(x, y, z)).collect();
            for w in ps.windows(2) {
                prop_assume!((w[1] - w[0]).norm() > 0.2);
            }
            for w in ps.windows(3) {
                let (a, b) = (w[1] - w[0], w[2] - w[1]);
                let theta = a.cross(&b).norm().atan2(a.dot(&b));
                prop_assume!(theta > 1e-2 && theta < std::f64::consts::PI - 1e-2);
                prop_assume!((theta / a.norm() - c_max).abs() > 1e-3);
            }
            let (_, g) = objective3d_eval(&ps, &p).unwrap();
            let h = 1e-6;
            for i in 0..ps.len() {
                for c in 0..3 {
                    let (mut a, mut b) = (ps.clone(), ps.clone());
                    a[i][c] += h;
                    b[i][c] -= h;
                    let fd = (objective3d_eval(&a, &p).unwrap().0 - objective3d_eval(&b, &p).unwrap().0) / (2.0 * h);
                    prop_assert!((g[i][c] - fd).abs() <= 1e-5 * fd.abs().max(1.0), "{} vs {}", g[i][c], fd);
                }
            }
        }
    }
}
