//! First-return map of the Kepler billiard: conic motion inside the table,
//! elastic reflection at the boundary.
//!
//! Motion is integrated in closed form in Levi-Civita coordinates, where the
//! flow is linear (`w'' = w`) and passes through collisions.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::birkhoff::PhaseState;
use crate::error::{KbError, KbResult};
use crate::kepler_arc::physical_velocity;
use crate::planar::{circ_diff, cross, dot, principal_sqrt, wrap_2pi, Pt};
use crate::scene::Scene;

/// Impacts closer to tangency than this are treated as grazing.
pub const GRAZING_SIN: f64 = 1e-6;
const ON_CURVE_TOL: f64 = 1e-10;
const MAX_TAU: f64 = 60.0;
const MAX_STEPS: usize = 200_000;

/// Boundary point and velocity leaving it into the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilliardState {
    pub u: f64,
    pub v: Pt,
}

impl BilliardState {
    /// State with outgoing angle `alpha` to the tangent and the speed fixed
    /// by the energy.
    pub fn from_angle(scene: &Scene, u: f64, alpha: f64) -> KbResult<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(KbError::InvalidParameter(format!("angle {alpha} is outside (0, pi)")));
        }
        let cp = scene.table.eval(u);
        let v = scene.speed_at(u) * (cp.tangent() * alpha.cos() + cp.inward_normal() * alpha.sin());
        Ok(Self { u: wrap_2pi(u), v })
    }

    pub fn from_phase(scene: &Scene, s: PhaseState) -> KbResult<Self> {
        Self::from_angle(scene, s.u, s.alpha)
    }

    /// Angle between the velocity and the tangent.
    pub fn alpha(&self, scene: &Scene) -> f64 {
        let cp = scene.table.eval(self.u);
        dot(self.v, cp.inward_normal()).atan2(dot(self.v, cp.tangent()))
    }

    /// Tangential velocity component, conjugate to arclength.
    pub fn tangential(&self, scene: &Scene) -> f64 {
        dot(self.v, scene.table.eval(self.u).tangent())
    }

    /// `(1/2)|v|^2 - mu/r - h`, relative to `h`.
    pub fn energy_residual(&self, scene: &Scene) -> f64 {
        energy_residual(scene, scene.rel(self.u), self.v)
    }
}

fn energy_residual(scene: &Scene, z: Pt, v: Pt) -> f64 {
    (0.5 * v.norm_sqr() - scene.mu / z.norm() - scene.h) / scene.h
}

/// Result of flowing to the next impact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub u: f64,
    /// Velocity before reflection; points out of the table.
    pub v: Pt,
    /// Regularized time of flight.
    pub tau: f64,
    /// Smallest distance to the center along the arc.
    pub min_r: f64,
    /// Sine of the arrival angle with the tangent.
    pub sin_alpha: f64,
    /// Distance between the computed impact and the boundary point.
    pub on_curve_residual: f64,
}

/// Conic through a boundary state in regularized time,
/// `w(tau) = a e^tau + b e^-tau`. The exponential form keeps the rounding
/// noise of `w` at the level of `|w|` even when `a` and `b` nearly cancel.
#[derive(Debug, Clone, Copy)]
struct LcFlow {
    a: Pt,
    b: Pt,
    h: f64,
}

impl LcFlow {
    fn new(scene: &Scene, s: &BilliardState) -> Self {
        let w0 = principal_sqrt(scene.rel(s.u));
        let wp0 = s.v * w0.conj() / (2.0 * scene.h).sqrt();
        Self { a: 0.5 * (w0 + wp0), b: 0.5 * (w0 - wp0), h: scene.h }
    }

    fn at(&self, tau: f64) -> (Pt, Pt) {
        let (ep, em) = (tau.exp(), (-tau).exp());
        (self.a * ep + self.b * em, self.a * ep - self.b * em)
    }

    fn z(&self, tau: f64) -> Pt {
        let w = self.at(tau).0;
        w * w
    }

    fn min_r(&self, tau_end: f64) -> f64 {
        let r = |t: f64| self.at(t).0.norm_sqr();
        let mut best = r(0.0).min(r(tau_end));
        if self.a.norm_sqr() > 0.0 && self.b.norm_sqr() > 0.0 {
            let ts = 0.25 * (self.b.norm_sqr() / self.a.norm_sqr()).ln();
            if ts > 0.0 && ts < tau_end {
                best = best.min(r(ts));
            }
        }
        best
    }
}

/// Flows from a boundary state to the next boundary crossing.
pub fn propagate(scene: &Scene, s: &BilliardState) -> KbResult<Arrival> {
    let table = &scene.table;
    let start = table.eval(s.u);
    if dot(s.v, start.inward_normal()) <= 0.0 {
        return Err(KbError::InvalidParameter(format!("velocity at u = {} does not point into the table", s.u)));
    }
    let flow = LcFlow::new(scene, s);
    let g = |tau: f64| scene.inside_indicator(flow.z(tau));
    let floor = 1e-4 * table.diameter();
    let min_sine = scene.profile().min_sine();
    let mut tau = 0.0;
    let mut g_prev: f64 = 0.0;
    let mut bracket = None;
    for _ in 0..MAX_STEPS {
        let (w, wp) = flow.at(tau);
        let zt = (2.0 * w * wp).norm();
        let ds = 0.5 * floor.max(g_prev.abs() * min_sine);
        let dtau = if zt > 0.0 { (ds / zt).min(0.05) } else { 0.05 };
        let next = tau + dtau;
        let g_next = g(next);
        if g_next >= 0.0 && next > 0.0 {
            bracket = Some((tau, next));
            break;
        }
        tau = next;
        g_prev = g_next;
        if tau > MAX_TAU {
            break;
        }
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        KbError::NoConvergence(format!("no boundary crossing found from u = {} within tau = {MAX_TAU}", s.u))
    })?;
    for _ in 0..200 {
        if hi - lo < 1e-9 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    let mut u = scene.profile().param(flow.z(t).arg());
    let scale = table.diameter();
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        let (w, wp) = flow.at(t);
        let cp = table.eval(u);
        let f = w * w + scene.c - cp.pos;
        residual = f.norm();
        if residual < 1e-14 * scale {
            break;
        }
        let zt = 2.0 * w * wp;
        let det = cross(zt, -cp.vel);
        if det.abs() < 1e-300 {
            break;
        }
        // solve [zt, -gamma'] (dt, du)^T = -f
        let dt = cross(-f, -cp.vel) / det;
        let du = cross(zt, -f) / det;
        t += dt;
        u += du;
        if dt.abs() < 1e-16 * t.abs().max(1.0) && du.abs() < 1e-16 {
            let (w, _) = flow.at(t);
            residual = (w * w + scene.c - table.position(u)).norm();
            break;
        }
    }
    if !(residual < ON_CURVE_TOL * scale.max(1.0)) || !(t > 0.0) {
        return Err(KbError::NoConvergence(format!("impact polish stalled at residual {residual:e} from u = {}", s.u)));
    }
    let (w, wp) = flow.at(t);
    let v = physical_velocity(w, wp, flow.h);
    let cp = table.eval(u);
    let sin_alpha = -dot(v, cp.inward_normal()) / v.norm();
    if sin_alpha < GRAZING_SIN {
        return Err(KbError::Grazing(format!("tangential arrival at u = {} (sin alpha = {sin_alpha:e})", wrap_2pi(u))));
    }
    Ok(Arrival { u: wrap_2pi(u), v, tau: t, min_r: flow.min_r(t), sin_alpha, on_curve_residual: residual })
}

/// Elastic reflection of the arrival velocity at `u`.
pub fn reflect(scene: &Scene, u: f64, v: Pt) -> Pt {
    let n = scene.table.eval(u).inward_normal();
    v - 2.0 * dot(v, n) * n
}

/// One bounce of the Kepler billiard.
pub fn kmap(scene: &Scene, s: &BilliardState) -> KbResult<BilliardState> {
    Ok(kmap_full(scene, s)?.0)
}

/// One bounce, also returning the arrival data.
pub fn kmap_full(scene: &Scene, s: &BilliardState) -> KbResult<(BilliardState, Arrival)> {
    let a = propagate(scene, s)?;
    Ok((BilliardState { u: a.u, v: reflect(scene, a.u, a.v) }, a))
}

/// Sufficient condition for the billiard map to be well defined: Kepler
/// hyperbolas staying at distance at least `guard_radius` from the center
/// curve less than the boundary does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellDefined {
    pub ok: bool,
    pub guard_radius: f64,
    /// `min_curvature - mu / (2 h guard_radius^2)`.
    pub margin: f64,
}

pub fn well_defined_check(scene: &Scene) -> WellDefined {
    let guard_radius = 0.5 * scene.profile().min_radius();
    let bound = scene.mu / (2.0 * scene.h * guard_radius * guard_radius);
    let margin = scene.table.min_curvature() - bound;
    WellDefined { ok: margin > 0.0, guard_radius, margin }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerRow {
    pub seed_id: usize,
    pub step: usize,
    pub u: f64,
    pub alpha: f64,
    pub energy_residual: f64,
    /// Closest approach to the center on the arc ending at this impact;
    /// NaN for the seed row.
    pub min_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeplerPortrait {
    pub rows: Vec<KeplerRow>,
    /// Orbits truncated early: `(seed_id, step, reason)`.
    pub failures: Vec<(usize, usize, String)>,
}

impl KeplerPortrait {
    pub fn max_energy_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max)
    }
}

/// Iterates `n` bounces from each seed in parallel; rows are ordered by seed.
pub fn portrait(scene: &Scene, seeds: &[PhaseState], n: usize) -> KeplerPortrait {
    let per_seed: Vec<(Vec<KeplerRow>, Option<(usize, usize, String)>)> = seeds
        .par_iter()
        .enumerate()
        .map(|(id, &p)| {
            let mut rows = Vec::with_capacity(n + 1);
            let mut s = match BilliardState::from_phase(scene, p) {
                Ok(s) => s,
                Err(e) => return (rows, Some((id, 0, e.to_string()))),
            };
            rows.push(KeplerRow {
                seed_id: id,
                step: 0,
                u: s.u,
                alpha: s.alpha(scene),
                energy_residual: s.energy_residual(scene),
                min_r: f64::NAN,
            });
            for step in 1..=n {
                match kmap_full(scene, &s) {
                    Ok((next, arr)) => {
                        s = next;
                        rows.push(KeplerRow {
                            seed_id: id,
                            step,
                            u: s.u,
                            alpha: s.alpha(scene),
                            energy_residual: s.energy_residual(scene),
                            min_r: arr.min_r,
                        });
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
    KeplerPortrait { rows, failures }
}

/// Finite-difference Jacobian of `kmap` in (arclength, tangential velocity).
pub fn symplectic_jacobian(scene: &Scene, s: &BilliardState, step: f64) -> KbResult<[[f64; 2]; 2]> {
    let table = &scene.table;
    let base = kmap(scene, s)?;
    let p0 = s.tangential(scene);
    let sp0 = table.speed(s.u);
    let sp1 = table.speed(base.u);
    let from_sp = |u: f64, p: f64| -> KbResult<BilliardState> {
        let speed = scene.speed_at(u);
        if p.abs() >= speed {
            return Err(KbError::InvalidParameter(format!("tangential velocity {p} exceeds speed {speed}")));
        }
        let cp = table.eval(u);
        let v = cp.tangent() * p + cp.inward_normal() * (speed * speed - p * p).sqrt();
        Ok(BilliardState { u: wrap_2pi(u), v })
    };
    let mut j = [[0.0; 2]; 2];
    for col in 0..2 {
        let (du, dp) = if col == 0 { (step / sp0, 0.0) } else { (0.0, step) };
        let plus = kmap(scene, &from_sp(s.u + du, p0 + dp)?)?;
        let minus = kmap(scene, &from_sp(s.u - du, p0 - dp)?)?;
        j[0][col] = circ_diff(plus.u, minus.u) * sp1 / (2.0 * step);
        j[1][col] = (plus.tangential(scene) - minus.tangential(scene)) / (2.0 * step);
    }
    Ok(j)
}

/// Flows backwards from the impact reached from `s`; returns the distance
/// from the recovered start to `s` in position and velocity.
pub fn reversibility_residual(scene: &Scene, s: &BilliardState) -> KbResult<f64> {
    let a = propagate(scene, s)?;
    let back = propagate(scene, &BilliardState { u: a.u, v: -a.v })?;
    let dpos = (scene.table.position(back.u) - scene.table.position(s.u)).norm();
    let dvel = (back.v + s.v).norm() / s.v.norm();
    Ok(dpos.max(dvel))
}

/// Angular momentum about the center.
pub fn angular_momentum(scene: &Scene, s: &BilliardState) -> f64 {
    cross(scene.rel(s.u), s.v)
}
