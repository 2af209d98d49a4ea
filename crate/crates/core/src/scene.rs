//! A table together with a Kepler center, strength and energy.

use std::f64::consts::TAU;

use crate::error::{KbError, KbResult};
use crate::planar::{cross, dot, wrap_2pi, Pt};
use crate::tables::BoundaryTable;

const PROFILE_SAMPLES: usize = 4096;

/// Boundary seen from an interior point in polar form: radius `R(theta)` and
/// boundary parameter `u(theta)`, interpolated by cubic Hermite splines.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    r: Vec<f64>,
    dr: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    min_r: f64,
    min_sin: f64,
}

#[inline]
fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1
}

impl RadialProfile {
    pub fn new(table: &BoundaryTable, c: Pt) -> KbResult<Self> {
        let n = PROFILE_SAMPLES;
        let mut r = Vec::with_capacity(n + 1);
        let mut dr = Vec::with_capacity(n + 1);
        let mut u = Vec::with_capacity(n + 1);
        let mut du = Vec::with_capacity(n + 1);
        let mut min_sin = f64::INFINITY;
        let mut prev_u: Option<f64> = None;
        for j in 0..=n {
            let th = TAU * j as f64 / n as f64;
            let dir = Pt::from_polar(1.0, th);
            let mut uj = crate::tables::ray_exit(table, c, dir)?;
            if let Some(p) = prev_u {
                // lift so that u is increasing in theta
                while uj <= p {
                    uj += TAU;
                }
            }
            prev_u = Some(uj);
            let cp = table.eval(uj);
            let q = cp.pos - c;
            let rr = q.norm();
            let cr = cross(q, cp.vel);
            r.push(rr);
            dr.push(rr * dot(q, cp.vel) / cr);
            u.push(uj);
            du.push(rr * rr / cr);
            min_sin = min_sin.min((cr / (rr * cp.vel.norm())).abs());
        }
        let min_r = r.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self { r, dr, u, du, min_r, min_sin })
    }

    fn locate(&self, theta: f64) -> (usize, f64, f64) {
        let h = TAU / PROFILE_SAMPLES as f64;
        let th = wrap_2pi(theta);
        let j = ((th / h) as usize).min(PROFILE_SAMPLES - 1);
        (j, (th - j as f64 * h) / h, h)
    }

    /// Boundary radius in direction `theta`.
    pub fn radius(&self, theta: f64) -> f64 {
        let (j, t, h) = self.locate(theta);
        hermite(self.r[j], self.r[j + 1], self.dr[j], self.dr[j + 1], h, t)
    }

    /// Boundary parameter in direction `theta`, in `[0, 2pi)`.
    pub fn param(&self, theta: f64) -> f64 {
        let (j, t, h) = self.locate(theta);
        wrap_2pi(hermite(self.u[j], self.u[j + 1], self.du[j], self.du[j + 1], h, t))
    }

    /// Smallest distance from the center to the boundary.
    pub fn min_radius(&self) -> f64 {
        self.min_r
    }

    /// Lower bound for the sine of the angle between radius and tangent.
    pub fn min_sine(&self) -> f64 {
        self.min_sin
    }
}

/// Table, attraction center `c`, strength `mu` and energy `h`.
#[derive(Debug, Clone)]
pub struct Scene {
    pub table: BoundaryTable,
    pub c: Pt,
    pub mu: f64,
    pub h: f64,
    profile: RadialProfile,
}

impl Scene {
    pub fn new(table: BoundaryTable, c: Pt, mu: f64, h: f64) -> KbResult<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(KbError::InvalidParameter(format!("mu must be nonnegative, got {mu}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(KbError::InvalidParameter(format!("energy h must be positive, got {h}")));
        }
        if !table.contains(c) {
            return Err(KbError::OutsideTable(format!("center ({}, {}) is not strictly inside the table", c.re, c.im)));
        }
        let profile = RadialProfile::new(&table, c)?;
        Ok(Self { table, c, mu, h, profile })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// Position of the boundary point relative to the center.
    pub fn rel(&self, u: f64) -> Pt {
        self.table.position(u) - self.c
    }

    /// Positive outside the table, negative inside; `z` is relative to `c`.
    /// Approximately the radial distance to the boundary.
    pub fn inside_indicator(&self, z: Pt) -> f64 {
        z.norm() - self.profile.radius(z.arg())
    }

    /// Speed of a particle at the boundary point `u`.
    pub fn speed_at(&self, u: f64) -> f64 {
        (2.0 * (self.h + self.mu / self.rel(u).norm())).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::pt;
    use crate::tables::make_ellipse;

    #[test]
    fn profile_interpolates_ellipse() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let c = pt(0.5, 0.3);
        let s = Scene::new(e.clone(), c, 1.0, 10.0).unwrap();
        for j in 0..997 {
            let th = 0.0063 * j as f64;
            let u = s.profile().param(th);
            let p = e.position(u) - c;
            assert!((p.arg() - crate::planar::wrap_pi(th)).abs() < 1e-9 || (p.arg() - th).abs() < 1e-9);
            assert!((s.profile().radius(th) - p.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_outside_center() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        assert!(Scene::new(e.clone(), pt(2.5, 0.0), 1.0, 1.0).is_err());
        assert!(Scene::new(e, pt(0.0, 0.0), 1.0, -1.0).is_err());
    }
}
