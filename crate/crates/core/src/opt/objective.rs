use super::{OptError, OptParams};
use crate::search::wrap_angle;

/// Objective value and gradient. Endpoint gradients are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub value: f64,
    pub obstacle: f64,
    pub curvature: f64,
    pub smoothness: f64,
    pub gradient: Vec<[f64; 2]>,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Gradient of the heading `atan2(v.y, v.x)` with respect to `v`.
fn dphi(v: [f64; 2]) -> [f64; 2] {
    let n2 = v[0] * v[0] + v[1] * v[1];
    [-v[1] / n2, v[0] / n2]
}

/// 2D objective over waypoints `xs` with per-waypoint nearest obstacles.
///
/// Obstacle term: `w_o (|x_i - o_i| - r_o)^2` inside `r_o`. Curvature term:
/// `w_c (dphi_i / |dx_i| - c_max)^2` above `c_max`, where `dphi_i` is the
/// heading change at waypoint `i` and `dx_i` its incoming segment.
/// Smoothness term: `w_s |x_{i+1} - 2 x_i + x_{i-1}|^2`.
pub fn objective_eval(
    xs: &[[f64; 2]],
    obstacles: &[Option<[f64; 2]>],
    params: &OptParams,
) -> Result<Objective, OptError> {
    let n = xs.len();
    let mut grad = vec![[0.0; 2]; n];
    let (mut obstacle, mut curvature, mut smoothness) = (0.0, 0.0, 0.0);
    for i in 1..n {
        if norm(sub(xs[i], xs[i - 1])) < 1e-9 {
            return Err(OptError::DegenerateSegment(i - 1));
        }
    }

    for (i, o) in obstacles.iter().enumerate().take(n) {
        let Some(o) = o else { continue };
        let d = sub(xs[i], *o);
        let dist = norm(d);
        let e = dist - params.r_o;
        if e < 0.0 {
            obstacle += params.w_o * e * e;
            if dist > 0.0 {
                let k = 2.0 * params.w_o * e / dist;
                grad[i][0] += k * d[0];
                grad[i][1] += k * d[1];
            }
        }
    }

    for i in 1..n.saturating_sub(1) {
        let a = sub(xs[i], xs[i - 1]);
        let b = sub(xs[i + 1], xs[i]);
        let la = norm(a);
        let delta = wrap_angle(b[1].atan2(b[0]) - a[1].atan2(a[0]));
        let kappa = delta.abs() / la;
        let e = kappa - params.c_max;
        if e > 0.0 {
            curvature += params.w_c * e * e;
            let s = delta.signum();
            let (ga, gb) = (dphi(a), dphi(b));
            let ua = [a[0] / la, a[1] / la];
            let k = 2.0 * params.w_c * e;
            for c in 0..2 {
                // dkappa/da and dkappa/db
                let dka = (-s * ga[c]) / la - delta.abs() / (la * la) * ua[c];
                let dkb = s * gb[c] / la;
                grad[i - 1][c] -= k * dka;
                grad[i][c] += k * (dka - dkb);
                grad[i + 1][c] += k * dkb;
            }
        }

        let r = [
            xs[i + 1][0] - 2.0 * xs[i][0] + xs[i - 1][0],
            xs[i + 1][1] - 2.0 * xs[i][1] + xs[i - 1][1],
        ];
        smoothness += params.w_s * (r[0] * r[0] + r[1] * r[1]);
        for c in 0..2 {
            grad[i - 1][c] += 2.0 * params.w_s * r[c];
            grad[i][c] -= 4.0 * params.w_s * r[c];
            grad[i + 1][c] += 2.0 * params.w_s * r[c];
        }
    }

    if n > 0 {
        grad[0] = [0.0; 2];
        grad[n - 1] = [0.0; 2];
    }
    Ok(Objective {
        value: obstacle + curvature + smoothness,
        obstacle,
        curvature,
        smoothness,
        gradient: grad,
    })
}

pub fn objective_value(
    xs: &[[f64; 2]],
    obstacles: &[Option<[f64; 2]>],
    params: &OptParams,
) -> Result<f64, OptError> {
    objective_eval(xs, obstacles, params).map(|o| o.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn straight_line_is_free() {
        let xs: Vec<[f64; 2]> = (0..6).map(|i| [i as f64 * 0.5, 1.0]).collect();
        let o = objective_eval(&xs, &[None; 6], &OptParams::default()).unwrap();
        assert_eq!(o.value, 0.0);
        assert!(o.gradient.iter().all(|g| *g == [0.0, 0.0]));
    }

    #[test]
    fn obstacle_at_half_radius() {
        let p = OptParams {
            w_o: 2.0,
            ..OptParams::default()
        };
        let xs = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let obs = [None, Some([1.0, p.r_o / 2.0]), None];
        let o = objective_eval(&xs, &obs, &p).unwrap();
        assert_abs_diff_eq!(o.value, 2.0 * (p.r_o / 2.0).powi(2), epsilon = 1e-15);
    }

    #[test]
    fn right_angle_corner() {
        let s = 0.7;
        let p = OptParams {
            c_max: 0.0,
            ..OptParams::default()
        };
        let xs = [[0.0, 0.0], [s, 0.0], [s, s]];
        let o = objective_eval(&xs, &[None; 3], &p).unwrap();
        assert_abs_diff_eq!(o.curvature, (PI / (2.0 * s)).powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(o.smoothness, 4.0 * 2.0 * s * s, epsilon = 1e-12);
    }

    #[test]
    fn coincident_points_rejected() {
        let xs = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
        assert_eq!(
            objective_eval(&xs, &[None; 3], &OptParams::default()),
            Err(OptError::DegenerateSegment(0))
        );
    }

    fn central_difference(
        xs: &[[f64; 2]],
        obs: &[Option<[f64; 2]>],
        p: &OptParams,
        i: usize,
        c: usize,
    ) -> f64 {
        let h = 1e-6;
        let (mut a, mut b) = (xs.to_vec(), xs.to_vec());
        a[i][c] += h;
        b[i][c] -= h;
        (objective_value(&a, obs, p).unwrap() - objective_value(&b, obs, p).unwrap()) / (2.0 * h)
    }

    proptest::proptest! {
        #[test]
        fn gradient_matches_central_differences(
            steps in proptest::collection::vec((0.3..1.0f64, -1.0..1.0f64), 2..7),
            obs in proptest::collection::vec(proptest::option::of((-PI..PI, 0.1..1.1f64)), 7),
            c_max in 0.05..1.0f64,
        ) {
            let p = OptParams { c_max, ..OptParams::default() };
            let mut xs = vec![[0.0, 0.0]];
            let mut heading = 0.0f64;
            for (len, turn) in &steps {
                heading += turn;
                let last = *xs.last().unwrap();
                xs.push([last[0] + len * heading.cos(), last[1] + len * heading.sin()]);
            }
            let obs: Vec<Option<[f64; 2]>> = xs
                .iter()
                .zip(&obs)
                .map(|(x, o)| o.map(|(a, d)| [x[0] + d * p.r_o * a.cos(), x[1] + d * p.r_o * a.sin()]))
                .collect();
            // Stay clear of the one-sided penalty switches.
            for (x, o) in xs.iter().zip(&obs) {
                if let Some(o) = o {
                    proptest::prop_assume!((norm(sub(*x, *o)) - p.r_o).abs() > 1e-3);
                }
            }
            for (i, (_, turn)) in steps.iter().enumerate().skip(1) {
                let k = turn.abs() / steps[i - 1].0;
                proptest::prop_assume!(turn.abs() > 1e-3 && (k - c_max).abs() > 1e-3);
            }
            let g = objective_eval(&xs, &obs, &p).unwrap().gradient;
            for (i, gi) in g.iter().enumerate().take(xs.len() - 1).skip(1) {
                for (c, gc) in gi.iter().enumerate() {
                    let fd = central_difference(&xs, &obs, &p, i, c);
                    proptest::prop_assert!((gc - fd).abs() <= 1e-5 * fd.abs().max(1.0), "{} vs {}", gc, fd);
                }
            }
        }
    }
}
