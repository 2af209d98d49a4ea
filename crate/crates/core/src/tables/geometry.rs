//! Distance to a body, ray exits and chords.

use std::f64::consts::TAU;

use super::BoundaryTable;
use crate::error::{KbError, KbResult};
use crate::planar::{cross, dot, wrap_2pi, Pt};
use crate::roots::newton_bracketed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyDistance {
    /// Euclidean distance to the boundary, negative when `x` is inside.
    pub signed_distance: f64,
    pub foot_param: f64,
    pub foot: Pt,
}

/// Nearest boundary point of `body` to `x`.
pub fn distance_to_body(x: Pt, body: &BoundaryTable) -> KbResult<BodyDistance> {
    let n = 256;
    let h = TAU / n as f64;
    let mut best = (f64::INFINITY, 0usize);
    for j in 0..n {
        let d = (body.position(j as f64 * h) - x).norm_sqr();
        if d < best.0 {
            best = (d, j);
        }
    }
    let g = |u: f64| {
        let cp = body.eval(u);
        let r = cp.pos - x;
        (dot(r, cp.vel), cp.vel.norm_sqr() + dot(r, cp.acc))
    };
    let u0 = best.1 as f64 * h;
    let (lo, hi) = (u0 - h, u0 + h);
    let u = if g(lo).0 * g(hi).0 <= 0.0 {
        newton_bracketed(g, lo, hi, 1e-15, 200)?
    } else {
        // flat distance (x at a centre of curvature); keep the grid point
        u0
    };
    let cp = body.eval(u);
    let dist = (cp.pos - x).norm();
    let inside = cross(cp.vel, x - cp.pos) > 0.0;
    Ok(BodyDistance { signed_distance: if inside { -dist } else { dist }, foot_param: wrap_2pi(u), foot: cp.pos })
}

/// Signed angle from `dir` to `gamma(u) - p`, in `(-pi, pi]`.
fn angle_to(table: &BoundaryTable, p: Pt, dir: Pt, u: f64) -> f64 {
    ((table.position(u) - p) * dir.conj()).arg()
}

fn polish(table: &BoundaryTable, p: Pt, dir: Pt, lo: f64, hi: f64) -> KbResult<f64> {
    let f = |u: f64| {
        let cp = table.eval(u);
        (cross(dir, cp.pos - p), cross(dir, cp.vel))
    };
    // rounding can leave a root sitting exactly on a bracket end; widen a little
    let (mut lo, mut hi) = (lo, hi);
    let mut widen = 1e-12 * (hi - lo).abs().max(1e-12);
    for _ in 0..8 {
        if f(lo).0 * f(hi).0 <= 0.0 {
            break;
        }
        lo -= widen;
        hi += widen;
        widen *= 10.0;
    }
    let u = newton_bracketed(f, lo, hi, 1e-15, 200)?;
    let res = cross(dir, table.position(u) - p).abs();
    if res > 1e-11 * table.diameter() {
        return Err(KbError::NoConvergence(format!("ray exit residual {res:e}")));
    }
    Ok(u)
}

pub(crate) fn exit_from_interior(table: &BoundaryTable, p: Pt, dir: Pt) -> KbResult<f64> {
    // the angle is continuous and increasing in u except for one jump from
    // +pi to -pi at the backward exit, so the forward exit is the only
    // negative-to-nonnegative transition
    for &n in &[16usize, 128, 1024, 8192] {
        let h = TAU / n as f64;
        let vals: Vec<f64> = (0..n).map(|j| angle_to(table, p, dir, j as f64 * h)).collect();
        for j in 0..n {
            let a = vals[j];
            let b = vals[(j + 1) % n];
            if a < 0.0 && b >= 0.0 {
                let u = polish(table, p, dir, j as f64 * h, (j + 1) as f64 * h)?;
                return Ok(wrap_2pi(u));
            }
        }
    }
    Err(KbError::NoConvergence("no bracket for ray exit (point outside or table not convex)".into()))
}

/// Boundary parameter where the ray `p + t dir`, `t > 0`, leaves the table.
pub fn ray_exit(table: &BoundaryTable, p: Pt, dir: Pt) -> KbResult<f64> {
    let norm = dir.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(KbError::InvalidParameter("ray direction must be a nonzero vector".into()));
    }
    if !table.contains(p) {
        return Err(KbError::OutsideTable(format!("ray origin ({}, {}) is not strictly inside", p.re, p.im)));
    }
    exit_from_interior(table, p, dir / norm)
}

/// Other end of the chord leaving the boundary point `gamma(u0)` along `dir`,
/// which must point strictly into the table. The result lies in
/// `(u0, u0 + 2pi)`.
pub fn chord_exit(table: &BoundaryTable, u0: f64, dir: Pt) -> KbResult<f64> {
    let dir = dir / dir.norm();
    let cp = table.eval(u0);
    let p = cp.pos;
    let sin_a = cross(cp.tangent(), dir);
    if !(sin_a > 0.0) {
        return Err(KbError::Grazing(format!("direction does not point into the table (sin = {sin_a:e})")));
    }
    let phi = |u: f64| angle_to(table, p, dir, u);
    for &n in &[16usize, 128, 1024] {
        let h = TAU / n as f64;
        // values at the virtual endpoints: negative just after u0, positive just before u0 + 2pi
        let mut prev = -1.0;
        for j in 1..=n {
            let cur = if j == n { 1.0 } else { phi(u0 + j as f64 * h) };
            if prev < 0.0 && cur >= 0.0 {
                let mut lo = u0 + (j - 1) as f64 * h;
                let mut hi = u0 + j as f64 * h;
                if j == 1 {
                    let mut found = false;
                    for k in 1..60 {
                        let x = u0 + h * 0.5f64.powi(k);
                        if phi(x) < 0.0 {
                            lo = x;
                            found = true;
                            break;
                        }
                        hi = x;
                    }
                    if !found {
                        return Err(KbError::Grazing("chord too short to resolve".into()));
                    }
                }
                if j == n {
                    let mut found = false;
                    for k in 1..60 {
                        let x = u0 + TAU - h * 0.5f64.powi(k);
                        if phi(x) >= 0.0 {
                            hi = x;
                            found = true;
                            break;
                        }
                        lo = x;
                    }
                    if !found {
                        return Err(KbError::Grazing("chord too short to resolve".into()));
                    }
                }
                return polish(table, p, dir, lo, hi);
            }
            prev = cur;
        }
    }
    Err(KbError::NoConvergence("no bracket for chord exit".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::pt;
    use crate::tables::{make_ellipse, make_width_table, WidthFourierSpec};

    #[test]
    fn circle_distance() {
        let (c, _) = make_width_table(&WidthFourierSpec::circle(1.0)).unwrap();
        let d = distance_to_body(pt(2.0, 0.0), &c).unwrap();
        assert!((d.signed_distance - 1.0).abs() < 1e-14);
        assert!((d.foot - pt(1.0, 0.0)).norm() < 1e-14);
        let inside = distance_to_body(pt(0.5, 0.0), &c).unwrap();
        assert!((inside.signed_distance + 0.5).abs() < 1e-14);
        let on = distance_to_body(pt(0.0, 1.0), &c).unwrap();
        assert!(on.signed_distance.abs() < 1e-14);
    }

    #[test]
    fn ellipse_ray() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let u = ray_exit(&e, pt(3f64.sqrt(), 0.0), pt(0.0, 1.0)).unwrap();
        assert!((e.position(u) - pt(3f64.sqrt(), 0.5)).norm() < 1e-13);
        let c = make_ellipse(1.0, 1.0).unwrap();
        let u = ray_exit(&c, pt(0.0, 0.0), pt(1.0, 0.0)).unwrap();
        assert!(u.abs() < 1e-14 || (u - TAU).abs() < 1e-14);
        assert!(ray_exit(&c, pt(2.0, 0.0), pt(1.0, 0.0)).is_err());
    }

    #[test]
    fn chord_from_boundary() {
        let c = make_ellipse(1.0, 1.0).unwrap();
        // from (1,0) straight left hits (-1,0)
        let u = chord_exit(&c, 0.0, pt(-1.0, 0.0)).unwrap();
        assert!((u - std::f64::consts::PI).abs() < 1e-13);
        // shallow chord
        let a: f64 = 1e-3;
        let u = chord_exit(&c, 0.0, pt(-a.sin(), a.cos())).unwrap();
        assert!((u - 2.0 * a).abs() < 1e-12);
        // almost backwards along the tangent
        let u = chord_exit(&c, 0.0, pt(-(std::f64::consts::PI - a).sin(), (std::f64::consts::PI - a).cos())).unwrap();
        assert!((u - (TAU - 2.0 * a)).abs() < 1e-12);
        assert!(chord_exit(&c, 0.0, pt(1.0, 0.0)).is_err());
    }
}
