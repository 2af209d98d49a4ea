//! Constant-width bodies given by the Fourier coefficients of their radius of
//! curvature, parametrized by the tangent angle.

use num_complex::Complex64;

use crate::error::{KbError, KbResult};
use crate::planar::Pt;

/// Coefficients `a_k` of the radius of curvature `rho(xi) = sum a_k e^{ik xi}`.
///
/// Only `a_0` and the positive odd modes are stored; `a_{-k}` is the complex
/// conjugate of `a_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthFourierSpec {
    pub a0: f64,
    pub modes: Vec<(u32, Complex64)>,
}

impl WidthFourierSpec {
    pub fn circle(radius: f64) -> Self {
        Self { a0: radius, modes: Vec::new() }
    }

    pub fn new(a0: f64, modes: Vec<(u32, Complex64)>) -> Self {
        Self { a0, modes }
    }

    /// Real symmetric single mode, `a_k = a_{-k} = ak`.
    pub fn single_mode(a0: f64, k: u32, ak: f64) -> Self {
        Self { a0, modes: vec![(k, Complex64::new(ak, 0.0))] }
    }

    pub fn validate(&self) -> KbResult<()> {
        if !(self.a0.is_finite() && self.a0 > 0.0) {
            return Err(KbError::InvalidParameter(format!("a0 must be positive, got {}", self.a0)));
        }
        for &(k, a) in &self.modes {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(KbError::InvalidParameter(format!("a{k} is not finite")));
            }
            if k == 0 {
                return Err(KbError::InvalidParameter("a0 must be given through the a0 field".into()));
            }
            if k == 1 {
                return Err(KbError::InvalidParameter("a1 must vanish, the curve would not close".into()));
            }
            if k % 2 == 0 {
                return Err(KbError::InvalidParameter(format!(
                    "even mode a{k} must vanish for a body of constant width"
                )));
            }
        }
        let n = 4096;
        let mut min_rho = f64::INFINITY;
        for j in 0..n {
            let xi = std::f64::consts::TAU * j as f64 / n as f64;
            min_rho = min_rho.min(self.rho(xi));
        }
        if min_rho <= 1e-10 {
            return Err(KbError::InvalidParameter(format!(
                "radius of curvature is not positive (min {min_rho:e})"
            )));
        }
        Ok(())
    }

    /// Full list of `(k, a_k)` over negative and positive indices.
    pub fn full_modes(&self) -> Vec<(i32, Complex64)> {
        let mut out = vec![(0, Complex64::new(self.a0, 0.0))];
        for &(k, a) in &self.modes {
            if a != Complex64::new(0.0, 0.0) {
                out.push((k as i32, a));
                out.push((-(k as i32), a.conj()));
            }
        }
        out
    }

    pub fn rho(&self, xi: f64) -> f64 {
        let mut r = self.a0;
        for &(k, a) in &self.modes {
            r += 2.0 * (a * Complex64::from_polar(1.0, k as f64 * xi)).re;
        }
        r
    }

    pub fn width(&self) -> f64 {
        2.0 * self.a0
    }
}

/// The curve `T` of a constant-width body, centred so that its mean over the
/// tangent angle is the origin.
#[derive(Debug, Clone)]
pub struct FourierCurve {
    pub spec: WidthFourierSpec,
    // (k + 1, a_k) for every nonzero coefficient
    terms: Vec<(f64, Complex64)>,
}

impl FourierCurve {
    pub fn new(spec: WidthFourierSpec) -> KbResult<Self> {
        spec.validate()?;
        let terms = spec.full_modes().into_iter().map(|(k, a)| ((k + 1) as f64, a)).collect();
        Ok(Self { spec, terms })
    }

    /// Returns `T`, `T'`, `T''`.
    pub fn eval(&self, xi: f64) -> (Pt, Pt, Pt) {
        let i = Complex64::i();
        let mut t = Complex64::new(0.0, 0.0);
        let mut t1 = t;
        let mut t2 = t;
        for &(m, a) in &self.terms {
            let e = a * Complex64::from_polar(1.0, m * xi);
            t += -i * e / m;
            t1 += e;
            t2 += i * m * e;
        }
        (t, t1, t2)
    }

    /// Centre of curvature, which traces the evolute caustic.
    pub fn caustic(&self, xi: f64) -> Pt {
        let i = Complex64::i();
        let t0 = self.eval(0.0).0;
        let mut s = Complex64::new(0.0, 0.0);
        for &(m, a) in &self.terms {
            let k = m - 1.0;
            s += a / m * (k * Complex64::from_polar(1.0, m * xi) + 1.0);
        }
        t0 + i * s
    }
}
