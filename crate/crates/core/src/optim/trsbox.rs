//! Approximate minimization of a quadratic model over the intersection of a
//! ball and a box: truncated conjugate gradients that freeze a coordinate
//! whenever the path reaches its bound and stop at the ball boundary.

use super::model::QuadraticModel;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Returns a step `s` with `‖s‖ <= radius` and `lower <= x + s <= upper`,
/// where `x` is the model base.
pub(crate) fn bounded_step(model: &QuadraticModel, lower: &[f64], upper: &[f64], radius: f64) -> Vec<f64> {
    let x = &model.base;
    let d = model.dim();
    let mut s = vec![0.0; d];
    let mut grad = model.gradient.clone();
    let mut free: Vec<bool> = (0..d)
        .map(|i| !((x[i] <= lower[i] && grad[i] >= 0.0) || (x[i] >= upper[i] && grad[i] <= 0.0)))
        .collect();

    let masked = |v: &[f64], free: &[bool]| -> Vec<f64> {
        v.iter().zip(free).map(|(&g, &f)| if f { -g } else { 0.0 }).collect()
    };
    let mut dir = masked(&grad, &free);
    let mut rr = dot(&dir, &dir);
    let scale = dot(&model.gradient, &model.gradient).max(f64::MIN_POSITIVE);

    for _ in 0..2 * d + 2 {
        if rr <= 1e-24 * scale {
            break;
        }
        let hd = model.hess_vec(&dir);
        let curvature = dot(&dir, &hd);

        let ss = dot(&s, &s);
        let sd = dot(&s, &dir);
        let dd = dot(&dir, &dir);
        let room = (radius * radius - ss).max(0.0);
        // positive root of ‖s + α dir‖ = radius, rationalized when sd >= 0
        let disc = (sd * sd + dd * room).sqrt();
        let to_ball = if room == 0.0 {
            0.0
        } else if sd >= 0.0 {
            room / (sd + disc)
        } else {
            (disc - sd) / dd
        };

        let mut to_box = f64::INFINITY;
        let mut hit = None;
        for i in 0..d {
            if !free[i] || dir[i] == 0.0 {
                continue;
            }
            let limit = if dir[i] > 0.0 {
                (upper[i] - x[i] - s[i]) / dir[i]
            } else {
                (lower[i] - x[i] - s[i]) / dir[i]
            };
            let limit = limit.max(0.0);
            if limit < to_box {
                to_box = limit;
                hit = Some(i);
            }
        }

        let to_min = if curvature > 0.0 { rr / curvature } else { f64::INFINITY };
        let alpha = to_min.min(to_ball).min(to_box);
        if !alpha.is_finite() {
            break;
        }
        for i in 0..d {
            s[i] += alpha * dir[i];
            grad[i] += alpha * hd[i];
        }

        if alpha == to_ball && to_ball <= to_box {
            break;
        }
        if alpha == to_box {
            let i = hit.expect("finite box limit has an index");
            s[i] = if dir[i] > 0.0 { upper[i] - x[i] } else { lower[i] - x[i] };
            free[i] = false;
            dir = masked(&grad, &free);
            rr = dot(&dir, &dir);
            continue;
        }
        let r_next = masked(&grad, &free);
        let rr_next = dot(&r_next, &r_next);
        let beta = rr_next / rr;
        for i in 0..d {
            dir[i] = r_next[i] + beta * dir[i];
        }
        rr = rr_next;
    }

    for i in 0..d {
        s[i] = (x[i] + s[i]).clamp(lower[i], upper[i]) - x[i];
    }
    s
}
