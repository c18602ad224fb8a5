use thiserror::Error;

use crate::geometry::{Point, Pose2D};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("path is empty")]
    EmptyPath,
    #[error("{0} must be positive and finite")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LookaheadKind {
    /// Farthest-along crossing of the lookahead circle.
    Circle,
    /// Path end inside the circle.
    Final,
    /// No crossing; nearest point on the path.
    Nearest,
}

fn closest_on_segment(p: Point, a: Point, b: Point) -> (Point, f64) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    (a.lerp(b, t), t)
}

/// Distance from `p` to the polyline.
pub fn distance_to_path(p: Point, path: &[Point]) -> f64 {
    match path {
        [] => f64::INFINITY,
        [only] => p.dist(*only),
        _ => path
            .windows(2)
            .map(|w| p.dist(closest_on_segment(p, w[0], w[1]).0))
            .fold(f64::INFINITY, f64::min),
    }
}

pub fn lookahead_point(pose: &Pose2D, path: &[Point], lookahead: f64) -> Result<(Point, LookaheadKind), ControlError> {
    let last = *path.last().ok_or(ControlError::EmptyPath)?;
    let c = pose.position();
    if c.dist(last) <= lookahead {
        return Ok((last, LookaheadKind::Final));
    }
    let r2 = lookahead * lookahead;
    for w in path.windows(2).rev() {
        let (a, b) = (w[0], w[1]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let (fx, fy) = (a.x - c.x, a.y - c.y);
        let qa = dx * dx + dy * dy;
        if qa == 0.0 {
            continue;
        }
        let qb = 2.0 * (fx * dx + fy * dy);
        let qc = fx * fx + fy * fy - r2;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            continue;
        }
        let s = disc.sqrt();
        let t = [(-qb + s) / (2.0 * qa), (-qb - s) / (2.0 * qa)]
            .into_iter()
            .filter(|t| (0.0..=1.0).contains(t))
            .fold(f64::NEG_INFINITY, f64::max);
        if t.is_finite() {
            return Ok((a.lerp(b, t), LookaheadKind::Circle));
        }
    }
    let nearest = if path.len() == 1 {
        last
    } else {
        path.windows(2)
            .map(|w| closest_on_segment(c, w[0], w[1]).0)
            .fold((last, f64::INFINITY), |best, q| {
                let d = q.dist(c);
                if d < best.1 {
                    (q, d)
                } else {
                    best
                }
            })
            .0
    };
    Ok((nearest, LookaheadKind::Nearest))
}

/// Exact unicycle motion at constant `v` and `omega` for `dt`.
pub fn integrate_unicycle(pose: &Pose2D, v: f64, omega: f64, dt: f64) -> Pose2D {
    let th = pose.theta;
    if omega.abs() < 1e-12 {
        let (s, c) = th.sin_cos();
        return Pose2D::new(pose.x + v * dt * c, pose.y + v * dt * s, th);
    }
    let th2 = th + omega * dt;
    let r = v / omega;
    Pose2D::new(
        pose.x + r * (th2.sin() - th.sin()),
        pose.y - r * (th2.cos() - th.cos()),
        th2,
    )
}

/// Steering curvature toward the lookahead point. The path end inside the
/// circle is reached with the arc through it, `2y/d²`.
pub fn curvature(pose: &Pose2D, target: Point, kind: LookaheadKind, lookahead: f64) -> f64 {
    let local = pose.to_local(target);
    let denom = match kind {
        LookaheadKind::Final => local.x * local.x + local.y * local.y,
        _ => lookahead * lookahead,
    };
    if denom < 1e-18 {
        0.0
    } else {
        2.0 * local.y / denom
    }
}

pub fn pure_pursuit_step(pose: &Pose2D, path: &[Point], lookahead: f64, speed: f64, dt: f64) -> Result<Pose2D, ControlError> {
    if !(lookahead > 0.0 && lookahead.is_finite()) {
        return Err(ControlError::InvalidParameter("lookahead"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ControlError::InvalidParameter("dt"));
    }
    let (target, kind) = lookahead_point(pose, path, lookahead)?;
    let kappa = curvature(pose, target, kind, lookahead);
    Ok(integrate_unicycle(pose, speed, speed * kappa, dt))
}
