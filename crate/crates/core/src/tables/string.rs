//! Generalized string construction around a constant-width body.
//!
//! The boundary is the level set `|x - c| + d(x, tau) = ell` where `tau` is a
//! body of constant width. It is parametrized by the tangent angle of `tau`:
//! `gamma(xi) = T(xi) - s(xi) i e^{i xi}`.

use num_complex::Complex64;

use super::fourier::{FourierCurve, WidthFourierSpec};
use crate::error::{KbError, KbResult};
use crate::planar::{dot, Pt};

#[derive(Debug, Clone, PartialEq)]
pub struct StringSpec {
    pub width: WidthFourierSpec,
    pub c: Pt,
    pub ell: f64,
}

#[derive(Debug, Clone)]
pub struct StringCurve {
    pub body: FourierCurve,
    pub c: Pt,
    pub ell: f64,
}

impl StringCurve {
    pub fn new(spec: &StringSpec) -> KbResult<Self> {
        let body = FourierCurve::new(spec.width.clone())?;
        if !(spec.ell.is_finite() && spec.ell > 0.0) {
            return Err(KbError::InvalidParameter(format!("string length must be positive, got {}", spec.ell)));
        }
        Ok(Self { body, c: spec.c, ell: spec.ell })
    }

    /// Offset `s` and the denominator of its closed form.
    pub fn offset(&self, xi: f64) -> (f64, f64) {
        let (t, _, _) = self.body.eval(xi);
        let n = Complex64::i() * Complex64::from_polar(1.0, xi);
        let q = t - self.c;
        let num = self.ell * self.ell - q.norm_sqr();
        let den = self.ell - dot(q, n);
        (0.5 * num / den, den)
    }

    /// Returns `gamma`, `gamma'`, `gamma''`.
    pub fn eval(&self, xi: f64) -> (Pt, Pt, Pt) {
        let (t, t1, t2) = self.body.eval(xi);
        let e = Complex64::from_polar(1.0, xi);
        let i = Complex64::i();
        let n = i * e;
        let n1 = -e;
        let n2 = -i * e;
        let q = t - self.c;

        let num = self.ell * self.ell - q.norm_sqr();
        let num1 = -2.0 * dot(q, t1);
        let num2 = -2.0 * (t1.norm_sqr() + dot(q, t2));
        let den = self.ell - dot(q, n);
        let den1 = -dot(t1, n) - dot(q, n1);
        let den2 = -dot(t2, n) - 2.0 * dot(t1, n1) - dot(q, n2);

        let s = 0.5 * num / den;
        let u = num1 * den - num * den1;
        let s1 = 0.5 * u / (den * den);
        let s2 = 0.5 * (num2 * den - num * den2) / (den * den) - u * den1 / (den * den * den);

        let g = t - s * n;
        let g1 = t1 - s1 * n - s * n1;
        let g2 = t2 - s2 * n - 2.0 * s1 * n1 - s * n2;
        (g, g1, g2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::pt;

    fn fig9() -> StringCurve {
        StringCurve::new(&StringSpec {
            width: WidthFourierSpec::single_mode(1.0, 3, 1.0 / 3.0),
            c: pt(3.0, 0.0),
            ell: 6.0,
        })
        .unwrap()
    }

    #[test]
    fn derivatives_match_differences() {
        let c = fig9();
        let h = 1e-6;
        for j in 0..40 {
            let x = 0.157 * j as f64;
            let (_, g1, g2) = c.eval(x);
            let (gp, g1p, _) = c.eval(x + h);
            let (gm, g1m, _) = c.eval(x - h);
            assert!(((gp - gm) / (2.0 * h) - g1).norm() < 1e-7 * (1.0 + g1.norm()));
            assert!(((g1p - g1m) / (2.0 * h) - g2).norm() < 1e-6 * (1.0 + g2.norm()));
        }
    }

    #[test]
    fn offset_positive_for_valid_length() {
        let c = fig9();
        for j in 0..100 {
            let (s, den) = c.offset(0.0628 * j as f64);
            assert!(s > 0.0 && den > 0.0);
        }
    }
}
