//! Perimeter function `Psi` of triangles through the center, the focal test
//! on `phi`, first/second-kind classification, topological indices and the
//! rigidity formulas at orthogonal chords.
//!
//! All quantities are relative to the center `c`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::birkhoff::{orthogonal_chords_through, radial_critical_points, RadialCritical, RadialKind, TwoPeriodicData};
use crate::error::{KbError, KbResult};
use crate::planar::{circ_diff, cross, dot, wrap_2pi, wrap_pi, Pt};
use crate::tables::{chord_exit, BoundaryTable};

/// `|gamma(xi) - c| + |gamma(eta) - c| + |gamma(eta) - gamma(xi)|`.
pub fn psi(table: &BoundaryTable, c: Pt, xi: f64, eta: f64) -> KbResult<f64> {
    Ok(psi_value_grad(table, c, PsiBranch::Psi, xi, eta)?.0)
}

/// Gradient of `Psi` with respect to the raw parameters.
pub fn grad_psi(table: &BoundaryTable, c: Pt, xi: f64, eta: f64) -> KbResult<[f64; 2]> {
    Ok(psi_value_grad(table, c, PsiBranch::Psi, xi, eta)?.1)
}

/// Variants of the perimeter function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiBranch {
    /// Full perimeter.
    Psi,
    /// `|gamma(xi)| + |gamma(eta)|`.
    Star,
    /// Perimeter when `det(gamma(xi), gamma(eta)) >= 0`, twice `Star` otherwise.
    A,
    /// Twice `Star` when `det >= 0`, perimeter otherwise.
    C,
}

/// Value and raw-parameter gradient of a perimeter variant.
pub fn psi_value_grad(table: &BoundaryTable, c: Pt, branch: PsiBranch, xi: f64, eta: f64) -> KbResult<(f64, [f64; 2])> {
    let a = table.eval(xi);
    let b = table.eval(eta);
    let p = a.pos - c;
    let q = b.pos - c;
    let (rp, rq) = (p.norm(), q.norm());
    let star = (rp + rq, [dot(p / rp, a.vel), dot(q / rq, b.vel)]);
    let full = || -> KbResult<(f64, [f64; 2])> {
        let ch = q - p;
        let l = ch.norm();
        if l < 1e-14 * table.diameter() || circ_diff(xi, eta) == 0.0 {
            return Err(KbError::InvalidParameter(format!("Psi is not differentiable on the diagonal ({xi}, {eta})")));
        }
        let e = ch / l;
        Ok((rp + rq + l, [dot(p / rp - e, a.vel), dot(q / rq + e, b.vel)]))
    };
    let twice = |s: (f64, [f64; 2])| (2.0 * s.0, [2.0 * s.1[0], 2.0 * s.1[1]]);
    let positive = cross(p, q) >= 0.0;
    match branch {
        PsiBranch::Psi => full(),
        PsiBranch::Star => Ok(star),
        PsiBranch::A => {
            if positive {
                full()
            } else {
                Ok(twice(star))
            }
        }
        PsiBranch::C => {
            if positive {
                Ok(twice(star))
            } else {
                full()
            }
        }
    }
}

/// Gradient of `Psi` with respect to arclength.
pub fn grad_psi_unit(table: &BoundaryTable, c: Pt, xi: f64, eta: f64) -> KbResult<[f64; 2]> {
    let g = grad_psi(table, c, xi, eta)?;
    Ok([g[0] / table.speed(xi), g[1] / table.speed(eta)])
}

/// Parameter hit by the segment `c gamma(xi)` after its reflection at `gamma(xi)`.
pub fn reflect_param(table: &BoundaryTable, c: Pt, xi: f64) -> KbResult<f64> {
    let cp = table.eval(xi);
    let e = (cp.pos - c) / (cp.pos - c).norm();
    let n = cp.inward_normal();
    let en = dot(e, n);
    if en > -1e-12 {
        return Err(KbError::Grazing(format!("ray from the center is tangent to the boundary at xi = {xi}")));
    }
    let out = e - 2.0 * en * n;
    Ok(wrap_2pi(chord_exit(table, xi, out)?))
}

/// `phi(xi) = Psi(xi, xi')`.
pub fn phi(table: &BoundaryTable, c: Pt, xi: f64) -> KbResult<f64> {
    let xp = reflect_param(table, c, xi)?;
    psi(table, c, xi, xp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocalVerdict {
    Focal,
    Inconclusive,
    NotFocal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalReport {
    pub verdict: FocalVerdict,
    /// `max - min` of `phi` over the sample grid.
    pub variation: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl FocalReport {
    pub fn is_focal(&self) -> bool {
        self.verdict == FocalVerdict::Focal
    }
}

pub const FOCAL_TOL: f64 = 1e-6;
pub const FOCAL_DEAD_BAND: f64 = 1e-3;

/// Focal test on 1024 samples with the default tolerances.
pub fn is_focal(table: &BoundaryTable, c: Pt) -> KbResult<FocalReport> {
    is_focal_with(table, c, 1024, FOCAL_TOL)
}

/// `phi` is declared constant when its variation is below `tol * mean`;
/// between `tol` and `1e-3` relative the verdict is inconclusive.
pub fn is_focal_with(table: &BoundaryTable, c: Pt, n: usize, tol: f64) -> KbResult<FocalReport> {
    let vals: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| phi(table, c, TAU * j as f64 / n as f64))
        .collect::<KbResult<Vec<f64>>>()?;
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = vals.iter().sum::<f64>() / n as f64;
    let variation = max - min;
    let rel = variation / mean;
    let verdict = if rel < tol {
        FocalVerdict::Focal
    } else if rel < FOCAL_DEAD_BAND.max(tol) {
        FocalVerdict::Inconclusive
    } else {
        FocalVerdict::NotFocal
    };
    Ok(FocalReport { verdict, variation, mean, min, max })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    First,
    Second,
}

/// Pair of strict extrema of the distance to the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaPair {
    pub i: usize,
    pub j: usize,
    pub kinds: (RadialKind, RadialKind),
    pub antipodal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KindReport {
    pub critical: Vec<RadialCritical>,
    pub pairs: Vec<ExtremaPair>,
    /// Verdict when every pair of strict extrema counts, mixed min/max included.
    pub kind_any_pair: Option<Kind>,
    /// Verdict when only min-min and max-max pairs count.
    pub kind_same_type: Option<Kind>,
    /// Primary verdict (every pair counts); `None` for a circle centred at `c`.
    pub kind: Option<Kind>,
    pub readings_disagree: bool,
    pub degenerate: bool,
    pub focal: FocalReport,
}

/// First/second kind classification of the center.
pub fn classify_kind(table: &BoundaryTable, c: Pt) -> KbResult<KindReport> {
    let set = radial_critical_points(table, c);
    let focal = is_focal(table, c)?;
    if set.degenerate {
        return Ok(KindReport {
            critical: set.points,
            pairs: Vec::new(),
            kind_any_pair: None,
            kind_same_type: None,
            kind: None,
            readings_disagree: false,
            degenerate: true,
            focal,
        });
    }
    let pts = &set.points;
    let mut pairs = Vec::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            if pts[i].kind == RadialKind::Inflection || pts[j].kind == RadialKind::Inflection {
                continue;
            }
            let a = table.position(pts[i].u) - c;
            let b = table.position(pts[j].u) - c;
            let antipodal = (cross(a, b) / (a.norm() * b.norm())).abs() < 1e-8 && dot(a, b) < 0.0;
            pairs.push(ExtremaPair { i, j, kinds: (pts[i].kind, pts[j].kind), antipodal });
        }
    }
    let verdict = |filter: &dyn Fn(&ExtremaPair) -> bool| {
        if pairs.iter().filter(|p| filter(p)).any(|p| !p.antipodal) {
            Kind::First
        } else {
            Kind::Second
        }
    };
    let any = verdict(&|_| true);
    let same = verdict(&|p| p.kinds.0 == p.kinds.1);
    Ok(KindReport {
        critical: set.points.clone(),
        pairs,
        kind_any_pair: Some(any),
        kind_same_type: Some(same),
        kind: Some(any),
        readings_disagree: any != same,
        degenerate: false,
        focal,
    })
}

/// Result of a winding-number evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub index: i32,
    pub radius: f64,
}

fn winding_once<F: Fn(f64, f64) -> [f64; 2]>(field: &F, center: (f64, f64), radius: f64) -> Option<i32> {
    let mut n = 720;
    'refine: for _ in 0..4 {
        let mut total = 0.0;
        let f0 = field(center.0 + radius, center.1);
        if f0[0].hypot(f0[1]) <= 1e-10 {
            return None;
        }
        let mut prev = f0[1].atan2(f0[0]);
        for k in 1..=n {
            let th = TAU * k as f64 / n as f64;
            let f = field(center.0 + radius * th.cos(), center.1 + radius * th.sin());
            if f[0].hypot(f[1]) <= 1e-10 {
                return None;
            }
            let a = f[1].atan2(f[0]);
            let d = wrap_pi(a - prev);
            if d.abs() > 0.5 * PI {
                n *= 4;
                continue 'refine;
            }
            total += d;
            prev = a;
        }
        return Some((total / TAU).round() as i32);
    }
    None
}

/// Winding number of a planar vector field along a circle. The radius is
/// halved (at most three times) when the field vanishes on the circle or the
/// count changes under halving, which signals another zero nearby.
pub fn winding_index<F: Fn(f64, f64) -> [f64; 2]>(field: F, center: (f64, f64), radius: f64) -> KbResult<Winding> {
    let mut r = radius;
    for _ in 0..=3 {
        if let (Some(a), Some(b)) = (winding_once(&field, center, r), winding_once(&field, center, 0.5 * r)) {
            if a == b {
                return Ok(Winding { index: a, radius: r });
            }
        }
        r *= 0.5;
    }
    Err(KbError::Degenerate(format!(
        "field vanishes or index is unstable near ({}, {}) after shrinking to radius {r:e}",
        center.0, center.1
    )))
}

/// Critical point of `Psi` off the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub xi: f64,
    pub eta: f64,
    pub grad_norm: f64,
    pub index: i32,
    /// The triangle degenerates: both vertices are antipodal through `c`.
    pub zero_area: bool,
    pub level: f64,
}

/// Focal case: `Psi` is maximal along the connected curve `(xi, xi')`.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalRidge {
    pub level: f64,
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiCriticalSet {
    pub points: Vec<CriticalPoint>,
    pub ridge: Option<FocalRidge>,
    pub unresolved: Vec<(f64, f64)>,
    pub focal: FocalReport,
}

impl PsiCriticalSet {
    pub fn index_sum(&self) -> i32 {
        self.points.iter().map(|p| p.index).sum()
    }
}

fn unit_grad(table: &BoundaryTable, c: Pt, branch: PsiBranch, x: f64, y: f64) -> Option<[f64; 2]> {
    let g = psi_value_grad(table, c, branch, x, y).ok()?.1;
    Some([g[0] / table.speed(x), g[1] / table.speed(y)])
}

fn newton_psi(table: &BoundaryTable, c: Pt, x0: f64, y0: f64) -> Option<(f64, f64, f64)> {
    let (mut x, mut y) = (x0, y0);
    let h = 1e-6;
    for _ in 0..60 {
        let g = unit_grad(table, c, PsiBranch::Psi, x, y)?;
        let gn = g[0].hypot(g[1]);
        if gn < 1e-13 {
            return Some((wrap_2pi(x), wrap_2pi(y), gn));
        }
        let gxp = unit_grad(table, c, PsiBranch::Psi, x + h, y)?;
        let gxm = unit_grad(table, c, PsiBranch::Psi, x - h, y)?;
        let gyp = unit_grad(table, c, PsiBranch::Psi, x, y + h)?;
        let gym = unit_grad(table, c, PsiBranch::Psi, x, y - h)?;
        let a = (gxp[0] - gxm[0]) / (2.0 * h);
        let b = (gyp[0] - gym[0]) / (2.0 * h);
        let cc = (gxp[1] - gxm[1]) / (2.0 * h);
        let d = (gyp[1] - gym[1]) / (2.0 * h);
        let det = a * d - b * cc;
        if det.abs() < 1e-14 {
            return None;
        }
        let mut dx = (d * g[0] - b * g[1]) / det;
        let mut dy = (-cc * g[0] + a * g[1]) / det;
        let step = dx.hypot(dy);
        if step > 0.2 {
            dx *= 0.2 / step;
            dy *= 0.2 / step;
        }
        x -= dx;
        y -= dy;
        if circ_diff(x, y).abs() < 1e-3 {
            return None;
        }
        if step < 1e-15 {
            break;
        }
    }
    let g = unit_grad(table, c, PsiBranch::Psi, x, y)?;
    let gn = g[0].hypot(g[1]);
    if gn < 1e-9 {
        Some((wrap_2pi(x), wrap_2pi(y), gn))
    } else {
        None
    }
}

/// Whether the gradient is small enough at a grid seed for a zero to lie
/// within one cell, judged against the local second derivatives.
fn may_hide_zero(table: &BoundaryTable, c: Pt, seed: (f64, f64), cell: f64) -> bool {
    let (x, y) = seed;
    let e = 1e-4;
    let (Some(g), Some(gx), Some(gy)) = (
        unit_grad(table, c, PsiBranch::Psi, x, y),
        unit_grad(table, c, PsiBranch::Psi, x + e, y),
        unit_grad(table, c, PsiBranch::Psi, x, y + e),
    ) else {
        return true;
    };
    let hess = ((gx[0] - g[0]).hypot(gx[1] - g[1]) + (gy[0] - g[0]).hypot(gy[1] - g[1])) / e;
    g[0].hypot(g[1]) <= 2.0 * hess * cell
}

fn torus_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    circ_diff(a.0, b.0).hypot(circ_diff(a.1, b.1))
}

/// Critical points of `Psi` off the diagonal, up to the swap symmetry.
pub fn critical_points_psi(table: &BoundaryTable, c: Pt) -> KbResult<PsiCriticalSet> {
    let focal = is_focal(table, c)?;
    if focal.is_focal() {
        let samples = (0..64)
            .map(|j| {
                let xi = TAU * j as f64 / 64.0;
                reflect_param(table, c, xi).map(|xp| (xi, xp))
            })
            .collect::<KbResult<Vec<_>>>()?;
        return Ok(PsiCriticalSet {
            points: Vec::new(),
            ridge: Some(FocalRidge { level: focal.mean, samples }),
            unresolved: Vec::new(),
            focal,
        });
    }
    let n = 128usize;
    let h = TAU / n as f64;
    let near_diag = |i: usize, j: usize| {
        let d = (i as i64 - j as i64).rem_euclid(n as i64);
        d <= 1 || d >= n as i64 - 1
    };
    let grid: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if near_diag(i, j) {
                        f64::INFINITY
                    } else {
                        unit_grad(table, c, PsiBranch::Psi, i as f64 * h, j as f64 * h)
                            .map(|g| g[0] * g[0] + g[1] * g[1])
                            .unwrap_or(f64::INFINITY)
                    }
                })
                .collect()
        })
        .collect();
    let mut seeds = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = grid[i][j];
            if !v.is_finite() || i > j {
                // the swap symmetry makes the lower triangle redundant
                continue;
            }
            let mut is_min = true;
            'nb: for di in [n - 1, 0, 1] {
                for dj in [n - 1, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    if grid[(i + di) % n][(j + dj) % n] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                seeds.push((i as f64 * h, j as f64 * h));
            }
        }
    }
    let results: Vec<(Option<(f64, f64, f64)>, (f64, f64))> = seeds
        .par_iter()
        .map(|&(x, y)| {
            let mut r = newton_psi(table, c, x, y);
            if r.is_none() {
                for (sx, sy) in [(0.25, 0.25), (-0.25, 0.25), (0.25, -0.25), (-0.25, -0.25)] {
                    r = newton_psi(table, c, x + sx * h, y + sy * h);
                    if r.is_some() {
                        break;
                    }
                }
            }
            (r, (x, y))
        })
        .collect();
    let mut found: Vec<(f64, f64, f64)> = Vec::new();
    let mut unresolved = Vec::new();
    for (r, seed) in results {
        match r {
            Some((x, y, gn)) => {
                let (x, y) = if x <= y { (x, y) } else { (y, x) };
                let dup = found
                    .iter()
                    .any(|f| torus_dist((f.0, f.1), (x, y)) < 1e-6 || torus_dist((f.1, f.0), (x, y)) < 1e-6);
                if !dup {
                    found.push((x, y, gn));
                }
            }
            None => {
                if may_hide_zero(table, c, seed, h) {
                    unresolved.push(seed)
                }
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut points = Vec::new();
    for (k, &(x, y, gn)) in found.iter().enumerate() {
        let mut r: f64 = 0.05;
        for (m, other) in found.iter().enumerate() {
            if m != k {
                r = r.min(0.4 * torus_dist((x, y), (other.0, other.1)));
                r = r.min(0.4 * torus_dist((x, y), (other.1, other.0)));
            }
        }
        r = r.min(0.4 * circ_diff(x, y).abs() / 2f64.sqrt());
        let w = winding_index(
            |a, b| unit_grad(table, c, PsiBranch::Psi, a, b).unwrap_or([f64::NAN, f64::NAN]),
            (x, y),
            r,
        )?;
        let p = table.position(x) - c;
        let q = table.position(y) - c;
        let zero_area = (cross(p, q) / (p.norm() * q.norm())).abs() < 1e-8 && dot(p, q) < 0.0;
        points.push(CriticalPoint { xi: x, eta: y, grad_norm: gn, index: w.index, zero_area, level: psi(table, c, x, y)? });
    }
    Ok(PsiCriticalSet { points, ridge: None, unresolved, focal })
}

/// Indices of `Psi`, `Psi*`, `Psi_a`, `Psi_c` at a critical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexAdditivity {
    pub psi: i32,
    pub star: i32,
    pub a: i32,
    pub c: i32,
}

impl IndexAdditivity {
    pub fn holds(&self) -> bool {
        self.psi + self.star == self.a + self.c
    }
}

/// Evaluates the four indices at `(xi, eta)` on circles of the given radius.
pub fn index_additivity(table: &BoundaryTable, c: Pt, xi: f64, eta: f64, radius: f64) -> KbResult<IndexAdditivity> {
    let idx = |b: PsiBranch| -> KbResult<i32> {
        Ok(winding_index(
            |x, y| unit_grad(table, c, b, x, y).unwrap_or([f64::NAN, f64::NAN]),
            (xi, eta),
            radius,
        )?
        .index)
    };
    Ok(IndexAdditivity { psi: idx(PsiBranch::Psi)?, star: idx(PsiBranch::Star)?, a: idx(PsiBranch::A)?, c: idx(PsiBranch::C)? })
}

/// Hessian of `Psi` in arclength at an orthogonal chord through the center,
/// with `d1, d2` the distances from the center to the ends.
pub fn hess_det_chord(d1: f64, d2: f64, k1: f64, k2: f64) -> ([[f64; 2]; 2], f64) {
    let d = d1 + d2;
    let m = [[1.0 / d + 1.0 / d1 - 2.0 * k1, 1.0 / d], [1.0 / d, 1.0 / d + 1.0 / d2 - 2.0 * k2]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    (m, det)
}

/// Central-difference Hessian of `Psi` in arclength coordinates. Valid at
/// critical points, where the reparametrization adds no first-order term.
pub fn hessian_psi_fd(table: &BoundaryTable, c: Pt, xi: f64, eta: f64, step: f64) -> KbResult<[[f64; 2]; 2]> {
    let g = |x: f64, y: f64| grad_psi(table, c, x, y);
    let (sx, sy) = (table.speed(xi), table.speed(eta));
    let gxp = g(xi + step, eta)?;
    let gxm = g(xi - step, eta)?;
    let gyp = g(xi, eta + step)?;
    let gym = g(xi, eta - step)?;
    let hxx = (gxp[0] - gxm[0]) / (2.0 * step) / (sx * sx);
    let hxy = 0.5 * ((gyp[0] - gym[0]) + (gxp[1] - gxm[1])) / (2.0 * step) / (sx * sy);
    let hyy = (gyp[1] - gym[1]) / (2.0 * step) / (sy * sy);
    Ok([[hxx, hxy], [hxy, hyy]])
}

/// `P(t) = 1 - 2 k1 t + (k1 + k2 - 2 d k1 k2) / (d (1 - d k2)) t^2`, whose
/// roots in `(0, d)` locate centers with a degenerate Hessian along the chord.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalPolynomial {
    /// Coefficients of `1, t, t^2`.
    pub coeffs: [f64; 3],
    pub roots: Vec<f64>,
    /// Factored expression `(dk2 - 1)(dk1k2 - k1 - k2)`.
    pub delta: f64,
    /// Discriminant `c1^2 - 4 c0 c2` of the quadratic itself.
    pub discriminant: f64,
}

impl FocalPolynomial {
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs[0] + t * (self.coeffs[1] + t * self.coeffs[2])
    }
}

pub fn focal_polynomial(d: f64, k1: f64, k2: f64) -> KbResult<FocalPolynomial> {
    let lead = 1.0 - d * k2;
    if lead.abs() < 1e-12 {
        return Err(KbError::Degenerate(format!("d k2 = 1 (d = {d}, k2 = {k2}): leading coefficient is singular")));
    }
    let c2 = (k1 + k2 - 2.0 * d * k1 * k2) / (d * lead);
    let c1 = -2.0 * k1;
    let c0 = 1.0;
    let disc = c1 * c1 - 4.0 * c0 * c2;
    let mut roots = Vec::new();
    if c2 == 0.0 {
        roots.push(-c0 / c1);
    } else if disc >= 0.0 {
        let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
        roots.push(q / c2);
        if q != 0.0 {
            roots.push(c0 / q);
        }
    }
    roots.retain(|&t| t > 0.0 && t < d);
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * d);
    Ok(FocalPolynomial { coeffs: [c0, c1, c2], roots, delta: (d * k2 - 1.0) * (d * k1 * k2 - k1 - k2), discriminant: disc })
}

/// Rigidity data for one orthogonal chord through the center.
#[derive(Debug, Clone, PartialEq)]
pub struct ChordRigidity {
    pub chord: TwoPeriodicData,
    pub hess_det: f64,
    pub polynomial: Option<FocalPolynomial>,
}

pub fn chord_rigidity(table: &BoundaryTable, c: Pt) -> Vec<ChordRigidity> {
    orthogonal_chords_through(table, c)
        .chords
        .into_iter()
        .map(|ch| {
            let (_, det) = hess_det_chord(ch.d1, ch.d2, ch.k1, ch.k2);
            ChordRigidity { chord: ch, hess_det: det, polynomial: focal_polynomial(ch.d, ch.k1, ch.k2).ok() }
        })
        .collect()
}
