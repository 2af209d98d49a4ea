//! Small helpers for treating `Complex64` as a point in the plane.

use num_complex::Complex64;

pub type Pt = Complex64;

#[inline]
pub fn pt(x: f64, y: f64) -> Pt {
    // adding 0.0 turns a negative zero into a positive one, so that the
    // principal square root of a point on the negative real axis is +i
    Complex64::new(x + 0.0, y + 0.0)
}

#[inline]
pub fn dot(a: Pt, b: Pt) -> f64 {
    a.re * b.re + a.im * b.im
}

#[inline]
pub fn cross(a: Pt, b: Pt) -> f64 {
    a.re * b.im - a.im * b.re
}

#[inline]
pub fn unit(a: Pt) -> Pt {
    a / a.norm()
}

/// Rotation by a quarter turn counterclockwise.
#[inline]
pub fn rot90(a: Pt) -> Pt {
    Complex64::new(-a.im, a.re)
}

/// Principal square root with the branch cut on the negative real axis and
/// `sqrt(-1) = +i`.
#[inline]
pub fn principal_sqrt(z: Pt) -> Pt {
    pt(z.re, z.im).sqrt()
}

/// Wrap an angle into `[0, 2pi)`.
#[inline]
pub fn wrap_2pi(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = x.rem_euclid(t);
    if r >= t {
        0.0
    } else {
        r
    }
}

/// Wrap an angle into `(-pi, pi]`.
#[inline]
pub fn wrap_pi(x: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let r = wrap_2pi(x + pi) - pi;
    if r <= -pi {
        r + std::f64::consts::TAU
    } else {
        r
    }
}

/// Signed distance between two parameters on the circle, in `(-pi, pi]`.
#[inline]
pub fn circ_diff(a: f64, b: f64) -> f64 {
    wrap_pi(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_branch_on_negative_axis() {
        let r = principal_sqrt(pt(-1.0, -0.0));
        assert!((r - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn wraps() {
        assert!((wrap_pi(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!(wrap_2pi(-0.5) > 0.0);
        assert!((circ_diff(0.1, 6.2) - (0.1 - 6.2 + std::f64::consts::TAU)).abs() < 1e-12);
    }

    #[test]
    fn cross_and_dot() {
        let a = pt(1.0, 0.0);
        let b = pt(0.0, 2.0);
        assert_eq!(cross(a, b), 2.0);
        assert_eq!(dot(a, b), 0.0);
        assert_eq!(rot90(a), b / 2.0);
    }
}
