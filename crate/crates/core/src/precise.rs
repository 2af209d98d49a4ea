//! Extended-precision (128-bit) evaluation of the boundary, two-point arcs
//! and the billiard map, used to audit orbits whose linearization grows
//! faster than double precision can follow.
//!
//! Double-precision results serve as starting guesses and branch choices;
//! every quantity reported from here is then polished in extended precision.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::error::{KbError, KbResult};
use crate::kepler_arc::{lc_setup, ArcClass};
use crate::kepler_billiard::{propagate, BilliardState};
use crate::planar::{pt, Pt};
use crate::scene::Scene;
use crate::tables::{BoundaryTable, Shape};

/// Mantissa bits.
pub const PREC: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

/// Extended-precision real.
#[derive(Debug, Clone)]
pub struct R(BigFloat);

impl R {
    pub fn from_f64(x: f64) -> Self {
        R(BigFloat::from_f64(x, PREC))
    }

    /// Nearest double.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        format!("{}", self.0).parse().unwrap_or(f64::NAN)
    }

    pub fn sqrt(&self) -> Self {
        R(self.0.sqrt(PREC, RM))
    }

    pub fn exp(&self) -> Self {
        CONSTS.with(|c| R(self.0.exp(PREC, RM, &mut c.borrow_mut())))
    }

    pub fn sin(&self) -> Self {
        CONSTS.with(|c| R(self.0.sin(PREC, RM, &mut c.borrow_mut())))
    }

    pub fn cos(&self) -> Self {
        CONSTS.with(|c| R(self.0.cos(PREC, RM, &mut c.borrow_mut())))
    }

    pub fn pi() -> Self {
        CONSTS.with(|c| R(c.borrow_mut().pi(PREC, RM)))
    }

    pub fn abs(&self) -> Self {
        R(self.0.abs())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn recip(&self) -> Self {
        R(self.0.reciprocal(PREC, RM))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&R> for &R {
            type Output = R;
            fn $m(self, o: &R) -> R {
                R(self.0.$f(&o.0, PREC, RM))
            }
        }
        impl $tr<R> for R {
            type Output = R;
            fn $m(self, o: R) -> R {
                R(self.0.$f(&o.0, PREC, RM))
            }
        }
        impl $tr<&R> for R {
            type Output = R;
            fn $m(self, o: &R) -> R {
                R(self.0.$f(&o.0, PREC, RM))
            }
        }
        impl $tr<R> for &R {
            type Output = R;
            fn $m(self, o: R) -> R {
                R(self.0.$f(&o.0, PREC, RM))
            }
        }
        impl $tr<f64> for &R {
            type Output = R;
            fn $m(self, o: f64) -> R {
                R(self.0.$f(&BigFloat::from_f64(o, PREC), PREC, RM))
            }
        }
        impl $tr<f64> for R {
            type Output = R;
            fn $m(self, o: f64) -> R {
                R(self.0.$f(&BigFloat::from_f64(o, PREC), PREC, RM))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for R {
    type Output = R;
    fn neg(self) -> R {
        R(self.0.neg())
    }
}

impl Neg for &R {
    type Output = R;
    fn neg(self) -> R {
        R(self.0.clone().neg())
    }
}

/// Extended-precision complex number.
#[derive(Debug, Clone)]
pub struct C {
    pub re: R,
    pub im: R,
}

impl C {
    pub fn new(re: R, im: R) -> Self {
        Self { re, im }
    }

    pub fn from_pt(p: Pt) -> Self {
        Self::new(R::from_f64(p.re), R::from_f64(p.im))
    }

    pub fn to_pt(&self) -> Pt {
        pt(self.re.to_f64(), self.im.to_f64())
    }

    pub fn zero() -> Self {
        Self::new(R::from_f64(0.0), R::from_f64(0.0))
    }

    /// `e^{i x}`
    pub fn cis(x: &R) -> Self {
        Self::new(x.cos(), x.sin())
    }

    pub fn add(&self, o: &C) -> C {
        C::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &C) -> C {
        C::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &C) -> C {
        C::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }

    pub fn scale(&self, s: &R) -> C {
        C::new(&self.re * s, &self.im * s)
    }

    pub fn conj(&self) -> C {
        C::new(self.re.clone(), -&self.im)
    }

    /// Multiplication by `i`.
    pub fn rot90(&self) -> C {
        C::new(-&self.im, self.re.clone())
    }

    pub fn norm_sqr(&self) -> R {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn norm(&self) -> R {
        self.norm_sqr().sqrt()
    }

    pub fn dot(&self, o: &C) -> R {
        &self.re * &o.re + &self.im * &o.im
    }

    pub fn cross(&self, o: &C) -> R {
        &self.re * &o.im - &self.im * &o.re
    }

    /// Square root with the sign closest to `reference`.
    pub fn sqrt_near(&self, reference: Pt) -> C {
        let r = self.norm();
        let re = ((&r + &self.re) * 0.5).sqrt();
        let mut im = ((&r - &self.re) * 0.5).sqrt();
        if self.im.is_negative() {
            im = -im;
        }
        let w = C::new(re, im);
        if w.dot(&C::from_pt(reference)).is_negative() {
            C::new(-&w.re, -&w.im)
        } else {
            w
        }
    }
}

/// Position and velocity of the boundary in extended precision.
pub fn curve(table: &BoundaryTable, u: &R) -> (C, C) {
    match table.shape() {
        Shape::Ellipse { a, b } => {
            let (s, c) = (u.sin(), u.cos());
            (C::new(&c * *a, &s * *b), C::new(-(&s * *a), &c * *b))
        }
        Shape::Width(f) => fourier(&f.spec.full_modes(), u),
        Shape::String(sc) => {
            let (t, t1) = fourier(&sc.body.spec.full_modes(), u);
            let e = C::cis(u);
            let n = e.rot90();
            let n1 = C::new(-&e.re, -&e.im);
            let q = t.sub(&C::from_pt(sc.c));
            let num = R::from_f64(sc.ell * sc.ell) - q.norm_sqr();
            let num1 = q.dot(&t1) * -2.0;
            let den = R::from_f64(sc.ell) - q.dot(&n);
            let den1 = -(t1.dot(&n) + q.dot(&n1));
            let s = &num / &den * 0.5;
            let s1 = (&num1 * &den - &num * &den1) / (&den * &den) * 0.5;
            let g = t.sub(&n.scale(&s));
            let g1 = t1.sub(&n.scale(&s1)).sub(&n1.scale(&s));
            (g, g1)
        }
    }
}

fn fourier(modes: &[(i32, num_complex::Complex64)], u: &R) -> (C, C) {
    let mut t = C::zero();
    let mut t1 = C::zero();
    for &(k, a) in modes {
        let m = (k + 1) as f64;
        let e = C::from_pt(a).mul(&C::cis(&(u * m)));
        // -i e / m
        t = t.add(&C::new(&e.im / m, -(&e.re / m)));
        t1 = t1.add(&e);
    }
    (t, t1)
}

/// Departure and arrival velocities of a two-point arc.
#[derive(Debug, Clone)]
pub struct PreciseArc {
    pub v0: C,
    pub v1: C,
}

/// Two-point arc between boundary parameters, on the branch selected in
/// double precision.
pub fn arc(scene: &Scene, u0: &R, u1: &R, class: ArcClass) -> KbResult<PreciseArc> {
    let c = C::from_pt(scene.c);
    let p0 = curve(&scene.table, u0).0.sub(&c);
    let p1 = curve(&scene.table, u1).0.sub(&c);
    let (w0f, w1f, _) = lc_setup(p0.to_pt(), p1.to_pt(), class, scene.h, scene.mu)?;
    let w0 = p0.sqrt_near(w0f);
    let w1 = p1.sqrt_near(w1f);
    let hr = R::from_f64(scene.mu) / R::from_f64(2.0 * scene.h);
    let g = w0.dot(&w1);
    let s = w0.norm_sqr() + w1.norm_sqr();
    let root = (&g * &g + &s * &hr * 2.0 + &hr * &hr * 4.0).sqrt();
    let x = if g.is_negative() { (&root - &g) / &hr } else { (&s * 2.0 + &hr * 4.0) / (&g + &root) };
    let ch = &x * 0.5;
    let sh = (&ch * &ch - 1.0).sqrt();
    if sh.to_f64() <= 0.0 {
        return Err(KbError::Degenerate("zero regularized transit".into()));
    }
    let wp0 = w1.sub(&w0.scale(&ch)).scale(&sh.recip());
    let wp1 = w1.scale(&ch).sub(&w0).scale(&sh.recip());
    let k = R::from_f64(2.0 * scene.h).sqrt();
    let v0 = w0.mul(&wp0).scale(&(&k / w0.norm_sqr()));
    let v1 = w1.mul(&wp1).scale(&(&k / w1.norm_sqr()));
    Ok(PreciseArc { v0, v1 })
}

/// Raw-parameter gradient of the closed concatenation `u_0 -> u_1 -> ...`
/// and the arcs used.
pub fn concatenation_gradient(scene: &Scene, u: &[R], classes: &[ArcClass]) -> KbResult<(Vec<R>, Vec<PreciseArc>)> {
    let n = u.len();
    let mut grad: Vec<R> = (0..n).map(|_| R::from_f64(0.0)).collect();
    let mut arcs = Vec::with_capacity(n);
    let s2 = R::from_f64(2.0).sqrt();
    for k in 0..n {
        let j = (k + 1) % n;
        let a = arc(scene, &u[k], &u[j], classes[k])?;
        let t0 = curve(&scene.table, &u[k]).1;
        let t1 = curve(&scene.table, &u[j]).1;
        grad[k] = &grad[k] - a.v0.dot(&t0) / &s2;
        grad[j] = &grad[j] + a.v1.dot(&t1) / &s2;
        arcs.push(a);
    }
    Ok((grad, arcs))
}

/// Billiard state in extended precision.
#[derive(Debug, Clone)]
pub struct PreciseState {
    pub u: R,
    pub v: C,
}

/// One bounce: the impact is located in double precision and polished by
/// Newton's method on the exact conic in extended precision.
pub fn kmap(scene: &Scene, s: &PreciseState) -> KbResult<PreciseState> {
    let rough = propagate(scene, &BilliardState { u: s.u.to_f64(), v: s.v.to_pt() })?;
    let c = C::from_pt(scene.c);
    let p0 = curve(&scene.table, &s.u).0.sub(&c);
    let w0 = p0.sqrt_near(crate::planar::principal_sqrt(p0.to_pt()));
    let k = R::from_f64(2.0 * scene.h).sqrt();
    let wp0 = s.v.mul(&w0.conj()).scale(&k.recip());
    let half = R::from_f64(0.5);
    let a = w0.add(&wp0).scale(&half);
    let b = w0.sub(&wp0).scale(&half);
    let mut tau = R::from_f64(rough.tau);
    // continue the parameter on the same sheet as the start
    let mut u = &s.u + crate::planar::circ_diff(rough.u, s.u.to_f64()).rem_euclid(std::f64::consts::TAU);
    let tol = 1e-33 * scene.table.diameter();
    let mut last = f64::INFINITY;
    for _ in 0..40 {
        let ep = tau.exp();
        let em = ep.recip();
        let w = a.scale(&ep).add(&b.scale(&em));
        let wp = a.scale(&ep).sub(&b.scale(&em));
        let (g, g1) = curve(&scene.table, &u);
        let f = w.mul(&w).add(&c).sub(&g);
        last = f.norm().to_f64();
        if last < tol {
            break;
        }
        let zt = w.mul(&wp).scale(&R::from_f64(2.0));
        let mg1 = C::new(-&g1.re, -&g1.im);
        let det = zt.cross(&mg1);
        let mf = C::new(-&f.re, -&f.im);
        let dt = mf.cross(&mg1) / &det;
        let du = zt.cross(&mf) / &det;
        tau = tau + dt;
        u = u + du;
    }
    if !(last < 1e-25 * scene.table.diameter()) {
        return Err(KbError::NoConvergence(format!("extended-precision impact polish stalled at {last:e}")));
    }
    let ep = tau.exp();
    let em = ep.recip();
    let w = a.scale(&ep).add(&b.scale(&em));
    let wp = a.scale(&ep).sub(&b.scale(&em));
    let v = w.mul(&wp).scale(&(&k / w.norm_sqr()));
    let g1 = curve(&scene.table, &u).1;
    let n = g1.rot90().scale(&g1.norm().recip());
    let vn = v.dot(&n) * 2.0;
    Ok(PreciseState { u, v: v.sub(&n.scale(&vn)) })
}

/// Periodic orbit polished in extended precision.
#[derive(Debug, Clone)]
pub struct PreciseOrbit {
    pub u: Vec<R>,
    pub classes: Vec<ArcClass>,
    pub arcs: Vec<PreciseArc>,
    /// Max-norm of the raw length gradient after polishing.
    pub gradient: f64,
    /// Largest parameter change made by the polish.
    pub shift: f64,
}

fn gradient_max(g: &[R]) -> f64 {
    g.iter().fold(0.0f64, |m, x| m.max(x.to_f64().abs()))
}

/// Newton polish of a double-precision periodic orbit with a finite
/// difference Hessian of the extended-precision gradient.
pub fn refine(scene: &Scene, u: &[f64], classes: &[ArcClass]) -> KbResult<PreciseOrbit> {
    let n = u.len();
    let start: Vec<R> = u.iter().map(|&x| R::from_f64(x)).collect();
    let mut x = start.clone();
    let (mut g, mut arcs) = concatenation_gradient(scene, &x, classes)?;
    let step = 1e-12;
    for _ in 0..8 {
        if gradient_max(&g) < 1e-32 {
            break;
        }
        let mut hess = nalgebra::DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            xp[j] = &xp[j] + step;
            let (gp, _) = concatenation_gradient(scene, &xp, classes)?;
            for i in 0..n {
                hess[(i, j)] = ((&gp[i] - &g[i]) * (1.0 / step)).to_f64();
            }
        }
        let rhs = nalgebra::DVector::from_iterator(n, g.iter().map(|v| v.to_f64()));
        let dx = hess.lu().solve(&rhs).ok_or_else(|| KbError::Degenerate("singular Hessian in polish".into()))?;
        for i in 0..n {
            x[i] = &x[i] - dx[i];
        }
        (g, arcs) = concatenation_gradient(scene, &x, classes)?;
    }
    let shift = x.iter().zip(&start).fold(0.0f64, |m, (a, b)| m.max((a - b).to_f64().abs()));
    Ok(PreciseOrbit { gradient: gradient_max(&g), u: x, classes: classes.to_vec(), arcs, shift })
}

fn circ(a: &R, b: &R) -> R {
    let two_pi = R::pi() * 2.0;
    let d = a - b;
    let k = (d.to_f64() / std::f64::consts::TAU).round();
    d - two_pi * k
}

/// Largest impact deviation over one continuous extended-precision cycle
/// of the billiard map, in arclength and relative velocity.
pub fn replay(scene: &Scene, orbit: &PreciseOrbit) -> KbResult<f64> {
    let n = orbit.u.len();
    let mut s = PreciseState { u: orbit.u[0].clone(), v: orbit.arcs[0].v0.clone() };
    let mut dev = 0.0f64;
    for k in 1..=n {
        let j = k % n;
        s = kmap(scene, &s)?;
        let speed = curve(&scene.table, &orbit.u[j]).1.norm();
        let du = (circ(&s.u, &orbit.u[j]) * &speed).to_f64().abs();
        let v = &orbit.arcs[j].v0;
        let dv = (s.v.sub(v).norm() / v.norm()).to_f64();
        dev = dev.max(du).max(dv);
    }
    Ok(dev)
}
