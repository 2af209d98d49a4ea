//! Strictly convex boundary tables.
//!
//! Every table is a closed curve `u -> position(u)` of period `2pi`,
//! oriented counterclockwise. The raw parameter is the natural one for the
//! construction (eccentric angle for ellipses, tangent angle of the width body
//! for Fourier and string tables); arclength is available on demand.

mod fourier;
mod geometry;
mod string;

use std::f64::consts::TAU;

use num_complex::Complex64;

pub use fourier::{FourierCurve, WidthFourierSpec};
pub use geometry::{chord_exit, distance_to_body, ray_exit, BodyDistance};
pub use string::{StringCurve, StringSpec};

use crate::error::{KbError, KbResult};
use crate::planar::{cross, dot, pt, rot90, wrap_pi, Pt};
use crate::quad::gk15;

/// Position and its first two parameter derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub pos: Pt,
    pub vel: Pt,
    pub acc: Pt,
}

impl CurvePoint {
    pub fn speed(&self) -> f64 {
        self.vel.norm()
    }

    pub fn tangent(&self) -> Pt {
        self.vel / self.vel.norm()
    }

    /// Unit normal pointing into the table.
    pub fn inward_normal(&self) -> Pt {
        rot90(self.tangent())
    }

    pub fn curvature(&self) -> f64 {
        cross(self.vel, self.acc) / self.vel.norm().powi(3)
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    Ellipse { a: f64, b: f64 },
    Width(FourierCurve),
    String(StringCurve),
}

const ARC_PANELS: usize = 256;
const CONVEXITY_SAMPLES: usize = 4096;

#[derive(Debug, Clone)]
pub struct BoundaryTable {
    shape: Shape,
    min_curvature: f64,
    max_curvature: f64,
    diameter: f64,
    interior: Pt,
    cumulative: Vec<f64>,
}

impl BoundaryTable {
    fn build(shape: Shape) -> KbResult<Self> {
        let mut t = BoundaryTable {
            shape,
            min_curvature: 0.0,
            max_curvature: 0.0,
            diameter: 0.0,
            interior: Complex64::new(0.0, 0.0),
            cumulative: Vec::new(),
        };
        let n = CONVEXITY_SAMPLES;
        let mut kmin = f64::INFINITY;
        let mut kmax = f64::NEG_INFINITY;
        let mut turning = 0.0;
        let mut centroid = Complex64::new(0.0, 0.0);
        let mut prev_angle = t.eval(0.0).vel.arg();
        let mut pts = Vec::with_capacity(n);
        for j in 0..n {
            let u = TAU * j as f64 / n as f64;
            let cp = t.eval(u);
            if !(cp.pos.re.is_finite() && cp.pos.im.is_finite()) {
                return Err(KbError::Construction(format!("non-finite position at u = {u}")));
            }
            let k = cp.curvature();
            kmin = kmin.min(k);
            kmax = kmax.max(k);
            centroid += cp.pos;
            pts.push(cp.pos);
            let ang = cp.vel.arg();
            if j > 0 {
                turning += wrap_pi(ang - prev_angle);
            }
            prev_angle = ang;
        }
        turning += wrap_pi(t.eval(TAU).vel.arg() - prev_angle);
        if !(kmin > 1e-10) {
            return Err(KbError::NotConvex(format!("minimum sampled curvature {kmin:e}")));
        }
        if (turning - TAU).abs() > 1e-6 {
            return Err(KbError::NotConvex(format!("total turning {turning} differs from 2pi")));
        }
        let closure = (t.eval(TAU).pos - t.eval(0.0).pos).norm();
        let scale = pts.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1.0);
        if closure > 1e-12 * scale {
            return Err(KbError::Construction(format!("curve does not close (gap {closure:e})")));
        }
        t.min_curvature = kmin;
        t.max_curvature = kmax;
        t.interior = centroid / n as f64;
        let mut diam: f64 = 0.0;
        for i in (0..n).step_by(8) {
            for j in ((i + 8)..n).step_by(8) {
                diam = diam.max((pts[i] - pts[j]).norm());
            }
        }
        t.diameter = diam;
        let mut cum = Vec::with_capacity(ARC_PANELS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for j in 0..ARC_PANELS {
            let a = TAU * j as f64 / ARC_PANELS as f64;
            let b = TAU * (j + 1) as f64 / ARC_PANELS as f64;
            acc += gk15(&|u| t.eval(u).vel.norm(), a, b).0;
            cum.push(acc);
        }
        t.cumulative = cum;
        Ok(t)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn eval(&self, u: f64) -> CurvePoint {
        match &self.shape {
            Shape::Ellipse { a, b } => {
                let (s, c) = u.sin_cos();
                CurvePoint { pos: pt(a * c, b * s), vel: pt(-a * s, b * c), acc: pt(-a * c, -b * s) }
            }
            Shape::Width(f) => {
                let (p, v, a) = f.eval(u);
                CurvePoint { pos: p, vel: v, acc: a }
            }
            Shape::String(s) => {
                let (p, v, a) = s.eval(u);
                CurvePoint { pos: p, vel: v, acc: a }
            }
        }
    }

    pub fn position(&self, u: f64) -> Pt {
        self.eval(u).pos
    }

    pub fn velocity(&self, u: f64) -> Pt {
        self.eval(u).vel
    }

    pub fn acceleration(&self, u: f64) -> Pt {
        self.eval(u).acc
    }

    pub fn curvature(&self, u: f64) -> f64 {
        self.eval(u).curvature()
    }

    pub fn speed(&self, u: f64) -> f64 {
        self.eval(u).speed()
    }

    pub fn min_curvature(&self) -> f64 {
        self.min_curvature
    }

    pub fn max_curvature(&self) -> f64 {
        self.max_curvature
    }

    /// Largest distance between sampled boundary points.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// A point strictly inside the table (mean of boundary samples).
    pub fn interior_point(&self) -> Pt {
        self.interior
    }

    pub fn perimeter(&self) -> f64 {
        self.cumulative[ARC_PANELS]
    }

    /// Arclength from `u = 0`, lifted monotonically to all real `u`.
    pub fn arclength(&self, u: f64) -> f64 {
        let turns = (u / TAU).floor();
        let r = u - turns * TAU;
        let h = TAU / ARC_PANELS as f64;
        let j = ((r / h) as usize).min(ARC_PANELS - 1);
        let a = j as f64 * h;
        let part = if r > a { gk15(&|x| self.eval(x).vel.norm(), a, r).0 } else { 0.0 };
        turns * self.perimeter() + self.cumulative[j] + part
    }

    /// Samples `(u, position, curvature)` at `n` equally spaced parameters.
    pub fn samples(&self, n: usize) -> Vec<(f64, Pt, f64)> {
        (0..n)
            .map(|j| {
                let u = TAU * j as f64 / n as f64;
                let cp = self.eval(u);
                (u, cp.pos, cp.curvature())
            })
            .collect()
    }

    /// Whether `p` lies strictly inside the table.
    pub fn contains(&self, p: Pt) -> bool {
        let o = self.interior;
        let d = p - o;
        if d.norm() < 1e-14 * self.diameter {
            return true;
        }
        match geometry::exit_from_interior(self, o, d / d.norm()) {
            Ok(u) => d.norm() < (self.position(u) - o).norm() * (1.0 - 1e-14),
            Err(_) => false,
        }
    }

    /// Short human readable description.
    pub fn describe(&self) -> String {
        match &self.shape {
            Shape::Ellipse { a, b } => format!("ellipse a={a} b={b}"),
            Shape::Width(f) => format!("constant-width body a0={} modes={:?}", f.spec.a0, f.spec.modes),
            Shape::String(s) => format!(
                "string table a0={} modes={:?} c=({}, {}) l={}",
                s.body.spec.a0, s.body.spec.modes, s.c.re, s.c.im, s.ell
            ),
        }
    }
}

/// Ellipse `(a cos u, b sin u)`.
pub fn make_ellipse(a: f64, b: f64) -> KbResult<BoundaryTable> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(KbError::InvalidParameter(format!("ellipse axes must be positive, got ({a}, {b})")));
    }
    if a < b {
        return Err(KbError::InvalidParameter(format!("ellipse requires a >= b, got ({a}, {b})")));
    }
    BoundaryTable::build(Shape::Ellipse { a, b })
}

/// Caustic of a constant-width body: the evolute of its boundary.
#[derive(Debug, Clone)]
pub struct Caustic {
    curve: FourierCurve,
}

impl Caustic {
    pub fn position(&self, xi: f64) -> Pt {
        self.curve.caustic(xi)
    }
}

/// Constant-width body and its evolute caustic.
pub fn make_width_table(spec: &WidthFourierSpec) -> KbResult<(BoundaryTable, Caustic)> {
    let curve = FourierCurve::new(spec.clone())?;
    let table = BoundaryTable::build(Shape::Width(curve.clone()))?;
    Ok((table, Caustic { curve }))
}

/// Smallest admissible string length: the maximum of `f` over the body and
/// the point `c`. Returns `(threshold, distance from c to the body)`.
pub fn string_threshold(spec: &StringSpec) -> KbResult<(f64, f64)> {
    let (body, _) = make_width_table(&spec.width)?;
    let dc = distance_to_body(spec.c, &body)?;
    if dc.signed_distance <= 0.0 {
        return Err(KbError::InvalidParameter(format!(
            "c = ({}, {}) must lie outside the width body",
            spec.c.re, spec.c.im
        )));
    }
    let mut max_r: f64 = 0.0;
    for (_, p, _) in body.samples(CONVEXITY_SAMPLES) {
        max_r = max_r.max((p - spec.c).norm());
    }
    Ok((max_r.max(dc.signed_distance), dc.signed_distance))
}

/// Table bounded by the level set `|x - c| + d(x, tau) = ell`.
pub fn make_string_table(spec: &StringSpec) -> KbResult<BoundaryTable> {
    let (threshold, _) = string_threshold(spec)?;
    if spec.ell < threshold {
        return Err(KbError::Construction(format!(
            "string length {} is below the validity threshold {threshold}",
            spec.ell
        )));
    }
    let curve = StringCurve::new(spec)?;
    for j in 0..CONVEXITY_SAMPLES {
        let xi = TAU * j as f64 / CONVEXITY_SAMPLES as f64;
        let (s, den) = curve.offset(xi);
        if !(den > 1e-12) || !s.is_finite() {
            return Err(KbError::Construction(format!("offset denominator vanishes near xi = {xi}")));
        }
    }
    BoundaryTable::build(Shape::String(curve))
}

/// Level-set function `|x - c| + d(x, body)`.
pub fn string_level(x: Pt, c: Pt, body: &BoundaryTable) -> KbResult<f64> {
    Ok((x - c).norm() + distance_to_body(x, body)?.signed_distance)
}

/// Orthogonality of a point pair to the tangents at both ends, used to check
/// double normals: returns the larger of the two normalized residuals.
pub fn double_normal_residual(table: &BoundaryTable, u: f64, v: f64) -> f64 {
    let a = table.eval(u);
    let b = table.eval(v);
    let chord = b.pos - a.pos;
    let l = chord.norm();
    (dot(chord, a.tangent()) / l).abs().max((dot(chord, b.tangent()) / l).abs())
}
