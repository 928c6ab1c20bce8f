//! Bracketing bisection.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Bisect `f` on `[lo, hi]` until the bracket is narrower than `xtol` (or
/// stops shrinking in floating point). `f(lo)` and `f(hi)` must have
/// opposite signs; a zero endpoint is returned directly.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<Bisection> {
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(Bisection { root: lo, lo, hi: lo, iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(Bisection { root: hi, lo: hi, hi, iterations: 0 });
    }
    if !(flo.signum() != fhi.signum()) || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    let mut iterations = 0;
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        iterations += 1;
        if fm == 0.0 {
            return Ok(Bisection { root: mid, lo: mid, hi: mid, iterations });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(Bisection {
        root: 0.5 * (lo + hi),
        lo,
        hi,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let b = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((b.root - 2f64.sqrt()).abs() < 1e-14);
        assert!(b.iterations > 40);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12), Err(Error::Bracket(_))));
    }

    #[test]
    fn decreasing_function() {
        let b = bisect(|x| 1.0 - x, 0.0, 3.0, 1e-13).unwrap();
        assert!((b.root - 1.0).abs() < 1e-13);
    }
}
