//! Bracketed scalar root finding.

use crate::error::{KbError, KbResult};

/// Newton iteration safeguarded by bisection on a sign-changing bracket.
///
/// `fdf` returns the value and derivative. The bracket must satisfy
/// `f(lo) * f(hi) <= 0`.
pub fn newton_bracketed<F: Fn(f64) -> (f64, f64)>(
    fdf: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> KbResult<f64> {
    let (flo, _) = fdf(lo);
    let (fhi, _) = fdf(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(KbError::NoConvergence(format!(
            "bracket [{lo}, {hi}] has no sign change"
        )));
    }
    // orient so that f(lo) < 0
    if flo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut f, mut df) = fdf(x);
    for _ in 0..max_iter {
        let newton_ok = df != 0.0 && {
            let xn = x - f / df;
            (xn - lo) * (xn - hi) < 0.0 && (2.0 * f).abs() <= (dx_old * df).abs()
        };
        dx_old = dx;
        if newton_ok {
            dx = f / df;
            x -= dx;
        } else {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        }
        if dx.abs() < xtol {
            return Ok(x);
        }
        let r = fdf(x);
        f = r.0;
        df = r.1;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    if (hi - lo).abs() < 1e3 * xtol {
        Ok(x)
    } else {
        Err(KbError::NoConvergence(format!(
            "bracketed Newton did not converge, bracket width {:e}",
            (hi - lo).abs()
        )))
    }
}

/// Plain bisection on a predicate that is false at `lo` and true at `hi`.
pub fn bisect_predicate<P: Fn(f64) -> bool>(pred: P, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    for _ in 0..iters {
        let m = 0.5 * (lo + hi);
        if pred(m) {
            hi = m;
        } else {
            lo = m;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = newton_bracketed(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 3.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn flat_derivative_falls_back_to_bisection() {
        let r = newton_bracketed(|x: f64| ((x - 1.0).powi(3), 3.0 * (x - 1.0).powi(2)), -5.0, 4.0, 1e-12, 500)
            .unwrap();
        assert!((r - 1.0).abs() < 1e-4);
    }

    #[test]
    fn no_sign_change() {
        assert!(newton_bracketed(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12, 50).is_err());
    }
}
