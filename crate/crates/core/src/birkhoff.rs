//! Potential-free billiard map on the phase cylinder, its linearization at
//! two-periodic orbits and the invariant graphs of rays through the center.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;

use crate::error::{KbError, KbResult};
use crate::planar::{circ_diff, cross, dot, wrap_2pi, Pt};
use crate::roots::newton_bracketed;
use crate::tables::{chord_exit, BoundaryTable};

/// Point of the phase cylinder: boundary parameter and the angle between the
/// outgoing direction and the positively oriented tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub u: f64,
    pub alpha: f64,
}

impl PhaseState {
    pub fn new(u: f64, alpha: f64) -> KbResult<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(KbError::InvalidParameter(format!("angle {alpha} is outside (0, pi)")));
        }
        Ok(Self { u: wrap_2pi(u), alpha })
    }

    /// Unit direction of motion leaving the boundary.
    pub fn direction(&self, table: &BoundaryTable) -> Pt {
        let cp = table.eval(self.u);
        let t = cp.tangent();
        let n = cp.inward_normal();
        t * self.alpha.cos() + n * self.alpha.sin()
    }
}

/// Angle of an outgoing direction after reflecting the incoming unit
/// direction `dir` at `u`.
pub fn reflected_angle(table: &BoundaryTable, u: f64, dir: Pt) -> f64 {
    let cp = table.eval(u);
    (-dot(dir, cp.inward_normal())).atan2(dot(dir, cp.tangent()))
}

/// One bounce of the classical billiard.
pub fn bmap(table: &BoundaryTable, s: PhaseState) -> KbResult<PhaseState> {
    if !(s.alpha > 0.0 && s.alpha < PI) {
        return Err(KbError::InvalidParameter(format!("angle {} is outside (0, pi)", s.alpha)));
    }
    let dir = s.direction(table);
    let u1 = chord_exit(table, s.u, dir)?;
    let alpha = reflected_angle(table, u1, dir);
    Ok(PhaseState { u: wrap_2pi(u1), alpha })
}

pub fn bmap_n(table: &BoundaryTable, mut s: PhaseState, n: usize) -> KbResult<PhaseState> {
    for _ in 0..n {
        s = bmap(table, s)?;
    }
    Ok(s)
}

/// Central-difference Jacobian of `map` in coordinates `(arclength, alpha)`.
pub fn jacobian_s_alpha<F>(table: &BoundaryTable, map: F, s: PhaseState, step: f64) -> KbResult<[[f64; 2]; 2]>
where
    F: Fn(PhaseState) -> KbResult<PhaseState>,
{
    let base = map(s)?;
    let sp0 = table.speed(s.u);
    let sp1 = table.speed(base.u);
    let mut j = [[0.0; 2]; 2];
    for col in 0..2 {
        let (du, da) = if col == 0 { (step / sp0, 0.0) } else { (0.0, step) };
        let plus = map(PhaseState { u: s.u + du, alpha: s.alpha + da })?;
        let minus = map(PhaseState { u: s.u - du, alpha: s.alpha - da })?;
        j[0][col] = circ_diff(plus.u, minus.u) * sp1 / (2.0 * step);
        j[1][col] = (plus.alpha - minus.alpha) / (2.0 * step);
    }
    Ok(j)
}

/// Converts an `(s, alpha)` Jacobian to coordinates `(s, -cos alpha)`.
pub fn to_s_minus_cos(j: [[f64; 2]; 2], alpha0: f64, alpha1: f64) -> [[f64; 2]; 2] {
    let a = alpha0.sin();
    let b = alpha1.sin();
    [[j[0][0], j[0][1] / a], [b * j[1][0], b * j[1][1] / a]]
}

pub fn det2(m: [[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn matmul2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Real eigenvalues of a 2x2 matrix, if any, in increasing order.
pub fn real_eigenvalues(m: [[f64; 2]; 2]) -> Option<(f64, f64)> {
    let tr = m[0][0] + m[1][1];
    let disc = tr * tr - 4.0 * det2(m);
    if disc < 0.0 {
        return None;
    }
    let r = disc.sqrt();
    let big = 0.5 * (tr + tr.signum() * r);
    let small = if big != 0.0 { det2(m) / big } else { 0.0 };
    Some(if big < small { (big, small) } else { (small, big) })
}

/// Kind of a critical point of the distance `u -> |gamma(u) - c|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialKind {
    Min,
    Max,
    /// Degenerate critical point where the distance does not change monotonicity.
    Inflection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCritical {
    pub u: f64,
    pub r: f64,
    pub kind: RadialKind,
}

/// Critical points of the distance to `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCriticalSet {
    pub points: Vec<RadialCritical>,
    /// The distance is constant (circle centred at `c`).
    pub degenerate: bool,
}

fn radial_g(table: &BoundaryTable, c: Pt, u: f64) -> (f64, f64) {
    let cp = table.eval(u);
    let q = cp.pos - c;
    (dot(q, cp.vel), cp.vel.norm_sqr() + dot(q, cp.acc))
}

fn normalized_g(table: &BoundaryTable, c: Pt, u: f64) -> f64 {
    let cp = table.eval(u);
    let q = cp.pos - c;
    dot(q, cp.vel) / (q.norm() * cp.vel.norm())
}

/// Critical points of `u -> |gamma(u) - c|` by grid scan and bracketed Newton.
pub fn radial_critical_points(table: &BoundaryTable, c: Pt) -> RadialCriticalSet {
    let n = 2048;
    let h = TAU / n as f64;
    let g: Vec<f64> = (0..n).map(|j| normalized_g(table, c, j as f64 * h)).collect();
    if g.iter().all(|x| x.abs() < 1e-10) {
        let points = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]
            .iter()
            .map(|&u| RadialCritical { u, r: (table.position(u) - c).norm(), kind: RadialKind::Min })
            .collect();
        return RadialCriticalSet { points, degenerate: true };
    }
    let mut points: Vec<RadialCritical> = Vec::new();
    for j in 0..n {
        let a = g[j];
        let b = g[(j + 1) % n];
        let lo = j as f64 * h;
        let hi = lo + h;
        if a == 0.0 || a * b < 0.0 {
            let u = if a == 0.0 { lo } else { newton_bracketed(|u| radial_g(table, c, u), lo, hi, 1e-15, 200).unwrap_or(0.5 * (lo + hi)) };
            let (_, dg) = radial_g(table, c, u);
            let scale = table.velocity(u).norm_sqr();
            let kind = if dg > 1e-8 * scale {
                RadialKind::Min
            } else if dg < -1e-8 * scale {
                RadialKind::Max
            } else {
                RadialKind::Inflection
            };
            points.push(RadialCritical { u: wrap_2pi(u), r: (table.position(u) - c).norm(), kind });
            continue;
        }
        // touching zeros without a sign change: local minimum of |g| close to zero
        let prev = g[(j + n - 1) % n];
        if a.abs() < prev.abs() && a.abs() <= b.abs() && a * prev > 0.0 && a * b > 0.0 {
            // refine the minimum of |g| by golden section on [lo - h, hi]
            let f = |u: f64| normalized_g(table, c, u).abs();
            let (mut x0, mut x1) = (lo - h, hi);
            let gr = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let m1 = x1 - gr * (x1 - x0);
                let m2 = x0 + gr * (x1 - x0);
                if f(m1) < f(m2) {
                    x1 = m2;
                } else {
                    x0 = m1;
                }
            }
            let u = 0.5 * (x0 + x1);
            if f(u) < 1e-9 {
                points.push(RadialCritical { u: wrap_2pi(u), r: (table.position(u) - c).norm(), kind: RadialKind::Inflection });
            }
        }
    }
    points.sort_by(|a, b| a.u.total_cmp(&b.u));
    points.dedup_by(|a, b| circ_diff(a.u, b.u).abs() < 1e-9);
    RadialCriticalSet { points, degenerate: false }
}

/// Geometry of a chord through the center that is orthogonal to the
/// boundary at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPeriodicData {
    pub u1: f64,
    pub u2: f64,
    pub d: f64,
    pub k1: f64,
    pub k2: f64,
    pub d1: f64,
    pub d2: f64,
}

impl TwoPeriodicData {
    pub fn from_params(table: &BoundaryTable, c: Pt, u1: f64, u2: f64) -> Self {
        let a = table.eval(u1);
        let b = table.eval(u2);
        TwoPeriodicData {
            u1,
            u2,
            d: (a.pos - b.pos).norm(),
            k1: a.curvature(),
            k2: b.curvature(),
            d1: (a.pos - c).norm(),
            d2: (b.pos - c).norm(),
        }
    }

    pub fn from_raw(d: f64, k1: f64, k2: f64) -> Self {
        TwoPeriodicData { u1: 0.0, u2: 0.0, d, k1, k2, d1: f64::NAN, d2: f64::NAN }
    }

    /// Same chord seen from its other end.
    pub fn swapped(&self) -> Self {
        TwoPeriodicData { u1: self.u2, u2: self.u1, d: self.d, k1: self.k2, k2: self.k1, d1: self.d2, d2: self.d1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalChords {
    pub chords: Vec<TwoPeriodicData>,
    /// Every chord through `c` is orthogonal (circle centred at `c`); only
    /// representatives are listed.
    pub degenerate: bool,
}

/// Chords through `c` meeting the boundary orthogonally at both ends.
pub fn orthogonal_chords_through(table: &BoundaryTable, c: Pt) -> OrthogonalChords {
    let set = radial_critical_points(table, c);
    if set.degenerate {
        let chords = vec![
            TwoPeriodicData::from_params(table, c, 0.0, PI),
            TwoPeriodicData::from_params(table, c, FRAC_PI_2, 3.0 * FRAC_PI_2),
        ];
        return OrthogonalChords { chords, degenerate: true };
    }
    let mut chords = Vec::new();
    let pts = &set.points;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let a = table.position(pts[i].u) - c;
            let b = table.position(pts[j].u) - c;
            let s = cross(a, b) / (a.norm() * b.norm());
            if s.abs() < 1e-8 && dot(a, b) < 0.0 {
                chords.push(TwoPeriodicData::from_params(table, c, pts[i].u, pts[j].u));
            }
        }
    }
    OrthogonalChords { chords, degenerate: false }
}

/// Jacobian of the billiard map at `(u1, pi/2)` in `(arclength, angle)`.
pub fn dt_two_periodic(data: &TwoPeriodicData) -> [[f64; 2]; 2] {
    let TwoPeriodicData { d, k1, k2, .. } = *data;
    [[k1 * d - 1.0, d], [k1 * k2 * d - (k1 + k2), k2 * d - 1.0]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dt2 {
    pub matrix: [[f64; 2]; 2],
    pub trace: f64,
    /// Reduced discriminant `(trace/2)^2 - 1` of the characteristic
    /// polynomial, in the factored form `4d(dk1-1)(dk2-1)(dk1k2-k1-k2)`.
    pub discriminant: f64,
    pub hyperbolic: bool,
}

/// Jacobian of the square of the billiard map at the two-periodic orbit.
pub fn dt2_two_periodic(data: &TwoPeriodicData) -> Dt2 {
    let m = matmul2(dt_two_periodic(&data.swapped()), dt_two_periodic(data));
    let TwoPeriodicData { d, k1, k2, .. } = *data;
    let trace = m[0][0] + m[1][1];
    let discriminant = 4.0 * d * (d * k1 - 1.0) * (d * k2 - 1.0) * (d * k1 * k2 - k1 - k2);
    Dt2 { matrix: m, trace, discriminant, hyperbolic: discriminant > 0.0 }
}

/// Graph of rays leaving `gamma(u)` away from `c` (after reflection of the
/// ray coming from `c`).
pub fn delta_plus(table: &BoundaryTable, c: Pt, u: f64) -> PhaseState {
    let cp = table.eval(u);
    let e = (cp.pos - c) / (cp.pos - c).norm();
    PhaseState { u: wrap_2pi(u), alpha: dot(e, cp.tangent()).clamp(-1.0, 1.0).acos() }
}

/// Graph of rays leaving `gamma(u)` towards `c`.
pub fn delta_minus(table: &BoundaryTable, c: Pt, u: f64) -> PhaseState {
    let cp = table.eval(u);
    let e = (cp.pos - c) / (cp.pos - c).norm();
    PhaseState { u: wrap_2pi(u), alpha: (-dot(e, cp.tangent())).clamp(-1.0, 1.0).acos() }
}

/// One row of an orbit table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitRow {
    pub seed_id: usize,
    pub step: usize,
    pub u: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Portrait {
    pub rows: Vec<OrbitRow>,
    /// Seeds stopped early: `(seed_id, step, reason)`.
    pub failures: Vec<(usize, usize, String)>,
}

/// `n` bounces from each seed; step 0 is the seed itself.
pub fn iterate_portrait(table: &BoundaryTable, seeds: &[PhaseState], n: usize) -> Portrait {
    let per_seed: Vec<(Vec<OrbitRow>, Option<(usize, usize, String)>)> = seeds
        .par_iter()
        .enumerate()
        .map(|(id, &s0)| {
            let mut rows = Vec::with_capacity(n + 1);
            let mut s = s0;
            rows.push(OrbitRow { seed_id: id, step: 0, u: s.u, alpha: s.alpha });
            for step in 1..=n {
                match bmap(table, s) {
                    Ok(next) => {
                        s = next;
                        rows.push(OrbitRow { seed_id: id, step, u: s.u, alpha: s.alpha });
                    }
                    Err(e) => return (rows, Some((id, step, e.to_string()))),
                }
            }
            (rows, None)
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_seed {
        rows.extend(r);
        failures.extend(f);
    }
    Portrait { rows, failures }
}

/// Deterministic spread of seeds over the phase cylinder.
pub fn default_seeds(n: usize) -> Vec<PhaseState> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..n)
        .map(|i| PhaseState {
            u: wrap_2pi(TAU * (i as f64 * golden).fract()),
            alpha: PI * (i as f64 + 0.5) / n as f64,
        })
        .collect()
}
