//! Reference routines for the integration tests. They share no code with
//! the library so agreement is meaningful.
#![allow(dead_code)]

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Plain bisection to an absolute width of `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Brownian threshold polynomial for the maximum, divided through so that
/// only powers of `K` appear.
pub fn bm_max_equation(alpha: f64, phi: f64, k: f64) -> f64 {
    k.powf(alpha - phi) + (2.0 * phi - 3.0 * alpha) / alpha * k.powf(alpha)
        + 2.0 * alpha / (alpha + phi) * k.powf(alpha + phi)
        - 2.0 * phi * phi / (alpha * (alpha + phi))
}

/// Brownian threshold equation for the minimum, `α ≠ Φ̂`.
pub fn bm_min_equation(alpha: f64, phi: f64, k: f64) -> f64 {
    k.powf(phi + alpha) - (3.0 * alpha + 2.0 * phi) / alpha * k.powf(alpha)
        + 2.0 * alpha / (alpha - phi) * k.powf(alpha - phi)
        - 2.0 * phi * phi / (alpha * (alpha - phi))
}

/// Brownian threshold equation for the minimum at `α = Φ̂`.
pub fn bm_min_log_equation(alpha: f64, k: f64) -> f64 {
    k.powf(2.0 * alpha) - 5.0 * k.powf(alpha) + 2.0 * alpha * k.ln() + 4.0
}

/// Root of the Brownian threshold equation on the admissible side of the
/// bound `2^{∓1/Φ}`.
pub fn bm_threshold(max: bool, alpha: f64, phi: f64) -> f64 {
    if max {
        let hi = 2f64.powf(-1.0 / phi);
        let mut lo = hi / 2.0;
        while bm_max_equation(alpha, phi, lo) * bm_max_equation(alpha, phi, hi) > 0.0 {
            lo /= 2.0;
        }
        bisect(|k| bm_max_equation(alpha, phi, k), lo, hi, 1e-15)
    } else {
        let g = |k: f64| {
            if (alpha - phi).abs() < 1e-9 {
                bm_min_log_equation(alpha, k)
            } else {
                bm_min_equation(alpha, phi, k)
            }
        };
        let lo = 2f64.powf(1.0 / phi);
        let mut hi = 2.0 * lo;
        while g(lo) * g(hi) > 0.0 {
            hi *= 2.0;
        }
        bisect(g, lo, hi, 1e-14 * hi)
    }
}

use proptest::prelude::*;
use pssmp::{classify, Direction, LevyModel, PredictionProblem};

/// Problems that pass the class gate, from both families and directions.
pub fn admissible_problem() -> impl Strategy<Value = PredictionProblem> {
    let bm = (0.4f64..2.0, 0.2f64..2.0, 0.0f64..1.0, 0.05f64..1.0, any::<bool>()).prop_map(
        |(sigma, mu, q, frac, max)| {
            let model = LevyModel::brownian(sigma, mu, q).unwrap();
            let phi0 = 2.0 * mu / (sigma * sigma);
            // for the maximum keep α below the root of ψ
            let alpha = if max { frac * phi0.max(0.05) } else { 0.1 + 2.5 * frac };
            let dir = if max { Direction::Max } else { Direction::Min };
            PredictionProblem::new(model, alpha, dir).unwrap()
        },
    );
    let cl = (0.5f64..3.0, 0.3f64..2.0, 0.5f64..3.0, 0.0f64..2.0, 0.05f64..0.95, any::<bool>()).prop_map(
        |(d, lambda, rho, q, frac, max)| {
            let model = LevyModel::cramer_lundberg(d, lambda, rho, q).unwrap();
            let (alpha, dir) = if max {
                (0.05 + 3.0 * frac, Direction::Max)
            } else {
                (frac * rho, Direction::Min)
            };
            PredictionProblem::new(model, alpha, dir).unwrap()
        },
    );
    prop_oneof![bm, cl].prop_filter("class gate", |p| classify(p).is_ok())
}
