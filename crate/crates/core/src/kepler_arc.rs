//! Fixed-energy two-point Kepler arcs through Levi-Civita regularization.
//!
//! Positions are taken relative to the attracting center. With `z = w^2`
//! and `dt = |w|^2 sqrt(2/h) dtau` the Kepler problem at energy `h` becomes
//! the harmonic repulsor `w'' = w` with regularized energy
//! `|w'|^2 / 2 - |w|^2 / 2 = mu / (2h)`, so every arc has the closed form
//! `w(tau) = (w1 sinh(tau) + w0 sinh(T - tau)) / sinh(T)`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{KbError, KbResult};
use crate::planar::{cross, dot, principal_sqrt, wrap_pi, Pt};
use crate::quad;
use crate::scene::Scene;

/// Homotopy class of an arc between two points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcClass {
    /// Homotopic to the segment `p0 p1` in the punctured plane.
    Direct,
    /// Winds around the center on the other side.
    Indirect,
    /// Positive angular momentum.
    Ccw,
    /// Negative angular momentum.
    Cw,
}

impl fmt::Display for ArcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ArcClass::Direct => "direct",
            ArcClass::Indirect => "indirect",
            ArcClass::Ccw => "ccw",
            ArcClass::Cw => "cw",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ArcClass {
    type Err = KbError;

    fn from_str(s: &str) -> KbResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" | "d" => Ok(ArcClass::Direct),
            "indirect" | "i" => Ok(ArcClass::Indirect),
            "ccw" | "a" | "anticlockwise" => Ok(ArcClass::Ccw),
            "cw" | "c" | "clockwise" => Ok(ArcClass::Cw),
            other => Err(KbError::InvalidParameter(format!("unknown arc class '{other}'"))),
        }
    }
}

/// Angular gap between two points seen from the center, in `[0, pi]`.
pub fn arg_gap(p0: Pt, p1: Pt) -> f64 {
    wrap_pi(p1.arg() - p0.arg()).abs()
}

/// Parameters of the admissible endpoint sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcDomain {
    pub delta: f64,
    pub epsilon: f64,
}

impl Default for ArcDomain {
    fn default() -> Self {
        Self { delta: 0.1, epsilon: 1e-3 }
    }
}

impl ArcDomain {
    fn radii_ok(&self, p0: Pt, p1: Pt) -> bool {
        let ok = |p: Pt| p.norm() >= self.delta && p.norm() <= 1.0 / self.delta;
        ok(p0) && ok(p1)
    }

    /// Pairs away from antipodal configurations.
    pub fn in_k(&self, p0: Pt, p1: Pt) -> bool {
        self.radii_ok(p0, p1) && arg_gap(p0, p1) <= std::f64::consts::PI * (1.0 - self.delta)
    }

    /// Pairs close to antipodal configurations.
    pub fn in_k_tilde(&self, p0: Pt, p1: Pt) -> bool {
        self.radii_ok(p0, p1) && arg_gap(p0, p1) >= std::f64::consts::PI * (1.0 - self.delta)
    }

    pub fn admits(&self, class: ArcClass, p0: Pt, p1: Pt) -> bool {
        match class {
            ArcClass::Direct | ArcClass::Indirect => self.in_k(p0, p1),
            ArcClass::Ccw | ArcClass::Cw => self.in_k_tilde(p0, p1),
        }
    }
}

/// Levi-Civita endpoints and regularized energy.
pub fn lc_setup(p0: Pt, p1: Pt, class: ArcClass, h: f64, mu: f64) -> KbResult<(Complex64, Complex64, f64)> {
    if p0.norm() == 0.0 || p1.norm() == 0.0 {
        return Err(KbError::InvalidParameter("arc endpoint at the center".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(KbError::InvalidParameter(format!("energy must be positive, got {h}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(KbError::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    let w0 = principal_sqrt(p0);
    let r1 = principal_sqrt(p1);
    let g = dot(w0, r1);
    let w1 = match class {
        ArcClass::Ccw | ArcClass::Cw => {
            let plus = cross(p0, p1) >= 0.0;
            if plus == (class == ArcClass::Ccw) {
                r1
            } else {
                -r1
            }
        }
        ArcClass::Direct | ArcClass::Indirect => {
            if g.abs() <= 1e-14 * w0.norm() * r1.norm() {
                return Err(KbError::AmbiguousBranch(format!(
                    "antipodal endpoints admit no {class} arc; use ccw or cw"
                )));
            }
            let want_pos = class == ArcClass::Direct;
            if (g > 0.0) == want_pos {
                r1
            } else {
                -r1
            }
        }
    };
    Ok((w0, w1, mu / (2.0 * h)))
}

/// Regularized transit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcTime {
    pub t_reg: f64,
    /// `e^T + e^-T`.
    pub x: f64,
    /// Set when `x` fell below 2 by more than rounding and was clamped.
    pub clamped: bool,
}

pub fn lc_time(w0: Complex64, w1: Complex64, h_reg: f64) -> KbResult<LcTime> {
    if !(h_reg > 0.0) {
        return Err(KbError::InvalidParameter(format!("regularized energy must be positive, got {h_reg}")));
    }
    let g = dot(w0, w1);
    let s = w0.norm_sqr() + w1.norm_sqr();
    let root = (g * g + 2.0 * s * h_reg + 4.0 * h_reg * h_reg).sqrt();
    // the two algebraically equal forms avoid cancellation for either sign of g
    let x = if g >= 0.0 { (2.0 * s + 4.0 * h_reg) / (g + root) } else { (root - g) / h_reg };
    let mut clamped = false;
    let x = if x < 2.0 {
        clamped = x < 2.0 - 1e-9;
        2.0
    } else {
        x
    };
    let half = 0.5 * x;
    let t_reg = (half + ((half - 1.0) * (half + 1.0)).sqrt()).ln();
    Ok(LcTime { t_reg, x, clamped })
}

/// Closed-form regularized path between `w0` and `w1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcPath {
    pub w0: Complex64,
    pub w1: Complex64,
    pub t_reg: f64,
    sinh_t: f64,
}

pub fn lc_path(w0: Complex64, w1: Complex64, t_reg: f64) -> KbResult<LcPath> {
    if !(t_reg > 0.0) {
        return Err(KbError::Degenerate("zero regularized transit (coincident endpoints)".into()));
    }
    Ok(LcPath { w0, w1, t_reg, sinh_t: t_reg.sinh() })
}

impl LcPath {
    /// `w(tau)` and `w'(tau)`.
    pub fn eval(&self, tau: f64) -> (Complex64, Complex64) {
        let a = tau.sinh();
        let b = (self.t_reg - tau).sinh();
        let ca = tau.cosh();
        let cb = (self.t_reg - tau).cosh();
        ((self.w1 * a + self.w0 * b) / self.sinh_t, (self.w1 * ca - self.w0 * cb) / self.sinh_t)
    }

    /// Coefficients of `w = A e^tau + B e^-tau`.
    pub fn coefficients(&self) -> (Complex64, Complex64) {
        let t = self.t_reg;
        let d = 2.0 * self.sinh_t;
        ((self.w1 - self.w0 * (-t).exp()) / d, (self.w0 * t.exp() - self.w1) / d)
    }

    /// Closed form of `w'(T)`.
    pub fn end_derivative(&self) -> Complex64 {
        let t = self.t_reg;
        self.w1 * (t.cosh() / self.sinh_t) - self.w0 / self.sinh_t
    }
}

/// Physical velocity at energy `h` from the regularized state.
#[inline]
pub fn physical_velocity(w: Complex64, wp: Complex64, h: f64) -> Pt {
    (2.0 * h).sqrt() * w * wp / w.norm_sqr()
}

/// A solved arc.
#[derive(Debug, Clone, PartialEq)]
pub struct KeplerArc {
    pub p0: Pt,
    pub p1: Pt,
    pub h: f64,
    pub mu: f64,
    pub class: ArcClass,
    pub w0: Complex64,
    pub w1: Complex64,
    pub h_reg: f64,
    pub t_reg: f64,
    pub length: f64,
    pub v0: Pt,
    pub v1: Pt,
    pub r_min: f64,
    pub clamped: bool,
    pub path: LcPath,
}

pub fn solve_arc(p0: Pt, p1: Pt, class: ArcClass, h: f64, mu: f64) -> KbResult<KeplerArc> {
    solve_arc_with_tol(p0, p1, class, h, mu, 1e-13)
}

/// Same as [`solve_arc`] with an explicit relative tolerance for the length
/// quadrature.
pub fn solve_arc_with_tol(p0: Pt, p1: Pt, class: ArcClass, h: f64, mu: f64, tol: f64) -> KbResult<KeplerArc> {
    let mut arc = solve_arc_geometry(p0, p1, class, h, mu)?;
    arc.length = length_by_quadrature(&arc, tol)?;
    Ok(arc)
}

/// Everything except the length, which is left as `NaN`.
pub fn solve_arc_geometry(p0: Pt, p1: Pt, class: ArcClass, h: f64, mu: f64) -> KbResult<KeplerArc> {
    let (w0, w1, h_reg) = lc_setup(p0, p1, class, h, mu)?;
    let time = lc_time(w0, w1, h_reg)?;
    let path = lc_path(w0, w1, time.t_reg)?;
    let (_, wp0) = path.eval(0.0);
    let wp1 = path.end_derivative();
    let (a, b) = path.coefficients();
    let tau_star = if a.norm() > 0.0 {
        (0.25 * (b.norm_sqr() / a.norm_sqr()).ln()).clamp(0.0, time.t_reg)
    } else {
        time.t_reg
    };
    let r_min = path.eval(tau_star).0.norm_sqr().min(p0.norm()).min(p1.norm());
    Ok(KeplerArc {
        p0,
        p1,
        h,
        mu,
        class,
        w0,
        w1,
        h_reg,
        t_reg: time.t_reg,
        length: f64::NAN,
        v0: physical_velocity(w0, wp0, h),
        v1: physical_velocity(w1, wp1, h),
        r_min,
        clamped: time.clamped,
        path,
    })
}

fn length_by_quadrature(arc: &KeplerArc, tol: f64) -> KbResult<f64> {
    let path = arc.path;
    let two_hreg = 2.0 * arc.h_reg;
    let scale = 2.0 * arc.h.sqrt();
    quad::integrate(|tau| scale * (path.eval(tau).0.norm_sqr() + two_hreg), 0.0, arc.t_reg, tol)
}

/// Jacobi length `int |z'| sqrt(h + mu/|z|) dt` by adaptive quadrature in
/// regularized time.
pub fn jacobi_length(arc: &KeplerArc) -> KbResult<f64> {
    length_by_quadrature(arc, 1e-13)
}

impl KeplerArc {
    /// Jacobi length from the exact antiderivative of `|w|^2`.
    pub fn length_closed_form(&self) -> f64 {
        let (a, b) = self.path.coefficients();
        let t = self.t_reg;
        let re_ab = (a * b.conj()).re;
        let int_w2 = 0.5 * a.norm_sqr() * (2.0 * t).exp_m1() - 0.5 * b.norm_sqr() * (-2.0 * t).exp_m1() + 2.0 * re_ab * t;
        2.0 * self.h.sqrt() * (int_w2 + 2.0 * self.h_reg * t)
    }

    /// Physical position and velocity at regularized time `tau`.
    pub fn state_at(&self, tau: f64) -> (Pt, Pt) {
        let (w, wp) = self.path.eval(tau);
        (w * w, physical_velocity(w, wp, self.h))
    }

    /// Largest deviation of the physical energy from `h` over `n` samples.
    pub fn energy_residual(&self, n: usize) -> f64 {
        (0..=n)
            .map(|j| {
                let tau = self.t_reg * j as f64 / n as f64;
                let (z, v) = self.state_at(tau);
                (0.5 * v.norm_sqr() - self.mu / z.norm() - self.h).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest of `|E - h| / (h + mu/|z|)` over `n` samples, evaluated as
    /// `(|w'|^2 - |w|^2 - 2 h_reg) / (|w|^2 + 2 h_reg)`, which stays finite
    /// through a collision.
    pub fn energy_residual_regularized(&self, n: usize) -> f64 {
        (0..=n)
            .map(|j| {
                let tau = self.t_reg * j as f64 / n as f64;
                let (w, wp) = self.path.eval(tau);
                let w2 = w.norm_sqr();
                ((wp.norm_sqr() - w2 - 2.0 * self.h_reg) / (w2 + 2.0 * self.h_reg)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest of `|z(0) - p0|` and `|z(T) - p1|`.
    pub fn endpoint_residual(&self) -> f64 {
        let (z0, _) = self.state_at(0.0);
        let (z1, _) = self.state_at(self.t_reg);
        (z0 - self.p0).norm().max((z1 - self.p1).norm())
    }

    /// Total change of `arg z` along the arc.
    pub fn winding(&self, n: usize) -> f64 {
        let mut total = 0.0;
        let mut prev = self.p0.arg();
        for j in 1..=n {
            let (z, _) = self.state_at(self.t_reg * j as f64 / n as f64);
            let a = z.arg();
            total += wrap_pi(a - prev);
            prev = a;
        }
        total
    }

    /// Sign of the (conserved) angular momentum.
    pub fn angular_momentum_sign(&self) -> f64 {
        let (w, wp) = self.path.eval(0.0);
        cross(w, wp).signum()
    }
}

/// `(grad_{p0} L, grad_{p1} L)` from the endpoint velocities.
pub fn length_gradient(arc: &KeplerArc) -> (Pt, Pt) {
    let f0 = (arc.h + arc.mu / arc.p0.norm()).sqrt();
    let f1 = (arc.h + arc.mu / arc.p1.norm()).sqrt();
    (-f0 * arc.v0 / arc.v0.norm(), f1 * arc.v1 / arc.v1.norm())
}

/// Same gradient written through the regularized endpoint derivatives.
pub fn length_gradient_lc(arc: &KeplerArc) -> (Pt, Pt) {
    let sh = arc.h.sqrt();
    let (_, wp0) = arc.path.eval(0.0);
    let wp1 = arc.path.end_derivative();
    (-sh * arc.w0 * wp0 / arc.w0.norm_sqr(), sh * arc.w1 * wp1 / arc.w1.norm_sqr())
}

/// Limit of `L / sqrt(h)` for arcs near antipodal pairs.
pub fn f_a(p0: Pt, p1: Pt) -> f64 {
    if cross(p0, p1) >= 0.0 {
        (p0 - p1).norm()
    } else {
        p0.norm() + p1.norm()
    }
}

pub fn f_c(p0: Pt, p1: Pt) -> f64 {
    if cross(p0, p1) >= 0.0 {
        p0.norm() + p1.norm()
    } else {
        (p0 - p1).norm()
    }
}

/// Gradient of [`f_a`] with respect to `p1`.
pub fn grad_p1_f_a(p0: Pt, p1: Pt) -> Pt {
    if cross(p0, p1) >= 0.0 {
        (p1 - p0) / (p1 - p0).norm()
    } else {
        p1 / p1.norm()
    }
}

/// Generating function value and its partial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingValue {
    pub s: f64,
    /// Partials with respect to the raw table parameters.
    pub d1: f64,
    pub d2: f64,
    /// Partials with respect to arclength.
    pub d1_unit: f64,
    pub d2_unit: f64,
    pub arc: KeplerArc,
}

/// Generating function `S(xi, eta)`: Jacobi length of the arc of the given
/// class joining `gamma(xi)` to `gamma(eta)`.
pub fn generating_s(scene: &Scene, xi: f64, eta: f64, class: ArcClass, domain: &ArcDomain) -> KbResult<GeneratingValue> {
    let mut g = generating_partials(scene, xi, eta, class, domain)?;
    g.arc.length = jacobi_length(&g.arc)?;
    g.s = g.arc.length;
    Ok(g)
}

/// As [`generating_s`] but without the length quadrature (`s` is `NaN`).
pub fn generating_partials(
    scene: &Scene,
    xi: f64,
    eta: f64,
    class: ArcClass,
    domain: &ArcDomain,
) -> KbResult<GeneratingValue> {
    let a = scene.table.eval(xi);
    let b = scene.table.eval(eta);
    let p0 = a.pos - scene.c;
    let p1 = b.pos - scene.c;
    if !domain.admits(class, p0, p1) {
        return Err(KbError::NotApplicable(format!(
            "pair ({xi}, {eta}) is outside the admissible set of {class} arcs"
        )));
    }
    if class == ArcClass::Direct && crate::planar::circ_diff(xi, eta).abs() < domain.epsilon {
        return Err(KbError::NotApplicable(format!("direct arc endpoints ({xi}, {eta}) are too close")));
    }
    let arc = solve_arc_geometry(p0, p1, class, scene.h, scene.mu)?;
    let (g0, g1) = length_gradient(&arc);
    let d1 = dot(g0, a.vel);
    let d2 = dot(g1, b.vel);
    Ok(GeneratingValue { s: f64::NAN, d1, d2, d1_unit: d1 / a.speed(), d2_unit: d2 / b.speed(), arc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::pt;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    #[test]
    fn setup_examples() {
        let (w0, w1, hr) = lc_setup(pt(1.0, 0.0), pt(0.0, 1.0), ArcClass::Direct, 10.0, 1.0).unwrap();
        assert_eq!(w0, Complex64::new(1.0, 0.0));
        assert!((w1 - Complex64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
        assert!((dot(w0, w1) - SQRT_2 / 2.0).abs() < 1e-15);
        assert!((hr - 0.05).abs() < 1e-16);
        let (_, w1, _) = lc_setup(pt(1.0, 0.0), pt(0.0, 1.0), ArcClass::Indirect, 10.0, 1.0).unwrap();
        assert!((w1 + Complex64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
        let (_, w1, _) = lc_setup(pt(1.0, 0.0), pt(-1.0, 0.0), ArcClass::Ccw, 10.0, 1.0).unwrap();
        assert!((w1 - Complex64::i()).norm() < 1e-15);
        let (_, w1, _) = lc_setup(pt(1.0, 0.0), pt(-1.0, -0.0), ArcClass::Cw, 10.0, 1.0).unwrap();
        assert!((w1 + Complex64::i()).norm() < 1e-15);
        assert!(matches!(
            lc_setup(pt(1.0, 0.0), pt(-1.0, 0.0), ArcClass::Direct, 10.0, 1.0),
            Err(KbError::AmbiguousBranch(_))
        ));
        assert!(lc_setup(pt(0.0, 0.0), pt(1.0, 0.0), ArcClass::Direct, 10.0, 1.0).is_err());
    }

    #[test]
    fn time_plug_in() {
        let t = lc_time(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), 1.0).unwrap();
        assert!((t.x - 8f64.sqrt()).abs() < 1e-14);
        assert!((t.t_reg - SQRT_2.acosh()).abs() < 1e-14);
        assert!(!t.clamped);
    }

    #[test]
    fn time_bound_small_regularized_energy() {
        let w0 = Complex64::new(1.0, 0.0);
        for w1 in [Complex64::from_polar(1.2, 2.5), Complex64::from_polar(0.8, 3.0), Complex64::from_polar(1.0, 2.0)] {
            let s = w0.norm_sqr() + w1.norm_sqr();
            for &hr in &[1e-4, 1e-6] {
                let y = 1.0 / lc_time(w0, w1, hr).unwrap().x;
                assert!(y <= hr.sqrt() / (2.0 * s));
            }
        }
        // near-orthogonal endpoints only satisfy the weaker sqrt(h'/(2s)) bound
        let w1 = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 + 1e-9);
        for &hr in &[1e-4, 1e-6] {
            let y = 1.0 / lc_time(w0, w1, hr).unwrap().x;
            assert!(y <= (hr / 4.0).sqrt());
            assert!(y > hr.sqrt() / 4.0);
        }
    }

    #[test]
    fn path_boundary_values_and_energy() {
        let (w0, w1, hr) = lc_setup(pt(1.0, 0.2), pt(-0.3, 1.1), ArcClass::Indirect, 50.0, 2.0).unwrap();
        let t = lc_time(w0, w1, hr).unwrap();
        let p = lc_path(w0, w1, t.t_reg).unwrap();
        assert!((p.eval(0.0).0 - w0).norm() < 1e-12);
        assert!((p.eval(t.t_reg).0 - w1).norm() < 1e-12);
        assert!((p.eval(t.t_reg).1 - p.end_derivative()).norm() < 1e-12);
        for tau in [0.0, t.t_reg] {
            let (w, wp) = p.eval(tau);
            assert!((0.5 * wp.norm_sqr() - 0.5 * w.norm_sqr() - hr).abs() < 1e-10);
        }
        let (a, b) = p.coefficients();
        for j in 0..10 {
            let tau = t.t_reg * j as f64 / 9.0;
            let w = a * tau.exp() + b * (-tau).exp();
            assert!((w - p.eval(tau).0).norm() < 1e-12);
        }
        assert!(lc_path(w0, w1, 0.0).is_err());
    }

    #[test]
    fn radial_arc_matches_one_dimensional_integral() {
        let (h, mu, lam) = (7.0, 3.0, 2.5);
        let arc = solve_arc(pt(1.0, 0.0), pt(lam, 0.0), ArcClass::Direct, h, mu).unwrap();
        let oracle = quad::integrate(|r| (h + mu / r).sqrt(), 1.0, lam, 1e-14).unwrap();
        assert!((arc.length - oracle).abs() < 1e-11 * oracle);
        assert!((arc.r_min - 1.0).abs() < 1e-12);
        let (g0, g1) = length_gradient(&arc);
        assert!(g0.im.abs() < 1e-12 && g1.im.abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_examples() {
        let d = solve_arc(pt(1.0, 0.0), pt(0.0, 1.0), ArcClass::Direct, 100.0, 1.0).unwrap();
        assert!((d.length - 10.0 * SQRT_2).abs() < 0.1);
        assert!(d.r_min > 0.5);
        let i = solve_arc(pt(1.0, 0.0), pt(0.0, 1.0), ArcClass::Indirect, 100.0, 1.0).unwrap();
        assert!(i.r_min < 0.1);
        assert!(i.length > 19.0);
        // sampled minimum agrees with the closed form
        let sampled = (0..=20000)
            .map(|j| i.state_at(i.t_reg * j as f64 / 20000.0).0.norm())
            .fold(f64::INFINITY, f64::min);
        assert!((sampled - i.r_min).abs() < 1e-6);
    }

    #[test]
    fn closed_form_length_matches_quadrature() {
        for (cls, p1) in [(ArcClass::Direct, pt(-0.2, 0.9)), (ArcClass::Indirect, pt(0.4, -1.3)), (ArcClass::Ccw, pt(-1.0, 0.05))] {
            let a = solve_arc(pt(1.1, 0.1), p1, cls, 300.0, 1.5).unwrap();
            assert!((a.length - a.length_closed_form()).abs() < 1e-11 * a.length);
        }
    }

    #[test]
    fn gradient_forms_agree() {
        let a = solve_arc(pt(0.7, -0.4), pt(-0.5, 0.9), ArcClass::Indirect, 40.0, 2.0).unwrap();
        let (g0, g1) = length_gradient(&a);
        let (l0, l1) = length_gradient_lc(&a);
        assert!((g0 - l0).norm() < 1e-9 && (g1 - l1).norm() < 1e-9);
    }

    #[test]
    fn potential_free_limit() {
        let a = solve_arc(pt(1.0, 0.3), pt(-0.4, 0.8), ArcClass::Direct, 9.0, 1e-12).unwrap();
        let expect = 3.0 * (pt(1.0, 0.3) - pt(-0.4, 0.8)).norm();
        assert!((a.length - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn ccw_has_positive_angular_momentum() {
        let a = solve_arc(pt(1.0, 0.0), pt(-1.0, -0.1), ArcClass::Ccw, 20.0, 1.0).unwrap();
        assert_eq!(a.angular_momentum_sign(), 1.0);
        let c = solve_arc(pt(1.0, 0.0), pt(-1.0, -0.1), ArcClass::Cw, 20.0, 1.0).unwrap();
        assert_eq!(c.angular_momentum_sign(), -1.0);
        assert!(a.winding(2000) > 0.0 && c.winding(2000) < 0.0);
    }
}
