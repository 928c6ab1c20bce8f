//! Optimal log-scale threshold `k*` and its image `K*` / `K̂*`.
//!
//! Everything is phrased for the reflected one-dimensional problem with
//! tilt `β` (`α` for the maximum, `−α` for the minimum). The threshold
//! solves
//!
//! ```text
//! h(k) = ∫₀ᵏ f(z) e^{−βz}(W'(z) − βW(z)) dz − W(0) = 0,   f(z) = 1 − 2e^{−Φ(q)z},
//! ```
//!
//! where `W = W^(q)` belongs to the unkilled model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::{classify, Direction, Family, PredictionProblem};
use crate::quad::{integrate, Tolerance};
use crate::root::bisect;
use crate::scale::ScaleFunction;

/// Cached ingredients of the reduced problem. Construction does not gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedProblem {
    pub problem: PredictionProblem,
    pub phi_q: f64,
    pub beta: f64,
    pub scale: ScaleFunction,
}

impl ReducedProblem {
    pub fn new(problem: &PredictionProblem) -> Result<Self> {
        Ok(Self {
            problem: *problem,
            phi_q: problem.model.right_inverse_phi(problem.q())?,
            beta: problem.beta(),
            scale: ScaleFunction::killed(&problem.model)?,
        })
    }

    /// `f(z) = 1 − 2e^{−Φ(q)z}`.
    pub fn f(&self, z: f64) -> f64 {
        1.0 - 2.0 * (-self.phi_q * z).exp()
    }

    /// Zero of `f`: `log 2 / Φ(q)`.
    pub fn k0(&self) -> f64 {
        std::f64::consts::LN_2 / self.phi_q
    }

    /// `W(0+)`.
    pub fn w0(&self) -> f64 {
        self.scale.value_at_origin()
    }

    /// Tilted scale function `e^{−βu}W(u)`, zero for `u < 0`.
    pub fn tilted_w(&self, u: f64) -> f64 {
        if u < 0.0 {
            0.0
        } else {
            (-self.beta * u).exp() * self.scale.closed_value(u)
        }
    }

    /// Its derivative `e^{−βu}(W'(u) − βW(u))`, right limit at `u = 0`.
    pub fn tilted_w_prime(&self, u: f64) -> f64 {
        let u = u.max(0.0);
        (-self.beta * u).exp() * (self.scale.closed_derivative(u) - self.beta * self.scale.closed_value(u))
    }

    /// `h(k)`.
    pub fn h(&self, k: f64) -> Result<f64> {
        if !(k >= 0.0) {
            return Err(Error::Domain { value: k, bound: 0.0 });
        }
        let q = integrate(|z| self.f(z) * self.tilted_w_prime(z), 0.0, k, Tolerance::default())?;
        Ok(q.value - self.w0())
    }
}

/// `f(z)` of the problem (log scale).
pub fn payoff_f(problem: &PredictionProblem, z: f64) -> Result<f64> {
    Ok(ReducedProblem::new(problem)?.f(z))
}

/// `F(y) = 1 − 2y^{−Φ(q)}` on the ratio scale `y ≥ 1`.
pub fn payoff_ratio(problem: &PredictionProblem, y: f64) -> Result<f64> {
    let phi = problem.model.right_inverse_phi(problem.q())?;
    Ok(1.0 - 2.0 * y.powf(-phi))
}

/// `h(k)` for `k > 0`.
pub fn h_function(problem: &PredictionProblem, k: f64) -> Result<f64> {
    ReducedProblem::new(problem)?.h(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ClosedFormBm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub iterations: usize,
    /// `|h(k*)|` (normalized) or the polynomial residual.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSolution {
    pub direction: Direction,
    pub k_star: f64,
    /// `e^{−k*}` (max) or `e^{k*}` (min).
    #[serde(rename = "K_star")]
    pub big_k: f64,
    pub k0: f64,
    pub phi_q: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl ThresholdSolution {
    fn from_k(direction: Direction, k_star: f64, phi_q: f64, method: Method, diagnostics: Diagnostics) -> Self {
        let big_k = match direction {
            Direction::Max => (-k_star).exp(),
            Direction::Min => k_star.exp(),
        };
        Self {
            direction,
            k_star,
            big_k,
            k0: std::f64::consts::LN_2 / phi_q,
            phi_q,
            method,
            diagnostics,
        }
    }

    /// Strict bound `K* < 2^{−1/Φ(q)}` (max) or `K̂* > 2^{1/Φ(q)}` (min).
    pub fn bound(&self) -> f64 {
        match self.direction {
            Direction::Max => 2f64.powf(-1.0 / self.phi_q),
            Direction::Min => 2f64.powf(1.0 / self.phi_q),
        }
    }

    pub fn respects_bound(&self) -> bool {
        match self.direction {
            Direction::Max => self.big_k > 0.0 && self.big_k < self.bound(),
            Direction::Min => self.big_k > self.bound(),
        }
    }
}

const RESIDUAL_LIMIT: f64 = 1e-10;

/// Solve `h(k*) = 0` by doubling a bracket from `[k₀, 2k₀]` and bisecting.
pub fn solve_kstar(problem: &PredictionProblem) -> Result<ThresholdSolution> {
    classify(problem)?;
    let reduced = ReducedProblem::new(problem)?;
    solve_reduced(&reduced)
}

/// As [`solve_kstar`] without the class gate.
pub fn solve_reduced(reduced: &ReducedProblem) -> Result<ThresholdSolution> {
    let k0 = reduced.k0();
    let mut lo = k0;
    let mut hi = 2.0 * k0;
    let mut doublings = 0;
    while reduced.h(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Bracket(format!("h stays nonpositive up to k = {hi}")));
        }
    }
    let mut failure = None;
    let b = bisect(
        |k| match reduced.h(k) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-13,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let b = b?;
    let k_star = b.root;
    let scale = reduced.h(2.0 * k_star)?.abs().max(1.0);
    let residual = reduced.h(k_star)?.abs() / scale;
    if residual >= RESIDUAL_LIMIT {
        return Err(Error::Bracket(format!(
            "normalized residual {residual:e} at k* = {k_star} exceeds {RESIDUAL_LIMIT:e}"
        )));
    }
    Ok(ThresholdSolution::from_k(
        reduced.problem.direction,
        k_star,
        reduced.phi_q,
        Method::Quadrature,
        Diagnostics {
            bracket_lo: lo,
            bracket_hi: hi,
            iterations: b.iterations + doublings,
            residual,
        },
    ))
}

/// Coincidence tolerance between `α` and `Φ̂(0)` for the logarithmic branch.
pub const LOG_CASE_TOLERANCE: f64 = 1e-9;

/// Brownian-drift `μ` and `Φ(0) = 2μ/σ²` for the closed forms (`q = 0`, `μ > 0`).
pub(crate) fn bm_parameters(problem: &PredictionProblem) -> Result<(f64, f64)> {
    let Family::BrownianDrift { sigma, mu } = problem.model.family() else {
        return Err(Error::InvalidParameter {
            name: "family",
            value: f64::NAN,
            reason: "closed forms exist only for Brownian drift",
        });
    };
    if problem.q() != 0.0 {
        return Err(Error::InvalidParameter {
            name: "q",
            value: problem.q(),
            reason: "closed forms require q = 0",
        });
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            reason: "closed forms require mu > 0",
        });
    }
    let phi = 2.0 * mu / (sigma * sigma);
    if problem.direction == Direction::Max && !(problem.alpha < phi) {
        return Err(Error::Gate(format!(
            "alpha = {} must be < 2 mu / sigma^2 = {phi}",
            problem.alpha
        )));
    }
    Ok((mu, phi))
}

/// Scalar equation whose root in `K` is the optimal ratio for Brownian drift.
pub fn bm_threshold_equation(direction: Direction, alpha: f64, phi: f64, big_k: f64) -> f64 {
    let a = alpha;
    let k = big_k;
    match direction {
        Direction::Max => {
            k.powf(a - phi) + (2.0 * phi - 3.0 * a) / a * k.powf(a) + 2.0 * a / (a + phi) * k.powf(a + phi)
                - 2.0 * phi * phi / (a * (a + phi))
        }
        Direction::Min if (a - phi).abs() < LOG_CASE_TOLERANCE => {
            k.powf(2.0 * a) - 5.0 * k.powf(a) + 2.0 * a * k.ln() + 4.0
        }
        Direction::Min => {
            k.powf(phi + a) - (3.0 * a + 2.0 * phi) / a * k.powf(a) + 2.0 * a / (a - phi) * k.powf(a - phi)
                - 2.0 * phi * phi / (a * (a - phi))
        }
    }
}

/// `K*` / `K̂*` for Brownian drift without killing from the explicit scalar
/// equation. `K = 1` is always a root, so the search starts at the bound
/// `2^{∓1/Φ(0)}`.
pub fn kstar_closed_form_bm(problem: &PredictionProblem) -> Result<ThresholdSolution> {
    let (_, phi) = bm_parameters(problem)?;
    let (a, dir) = (problem.alpha, problem.direction);
    let g = |k: f64| bm_threshold_equation(dir, a, phi, k);
    let (lo, hi) = match dir {
        Direction::Max => {
            let hi = 2f64.powf(-1.0 / phi);
            let mut lo = 0.5 * hi;
            while g(lo) <= 0.0 {
                lo *= 0.5;
                if lo < 1e-300 {
                    return Err(Error::Bracket("no root of the threshold equation in (0, 1)".into()));
                }
            }
            (lo, hi)
        }
        Direction::Min => {
            let lo = 2f64.powf(1.0 / phi);
            let mut hi = 2.0 * lo;
            while g(hi) <= 0.0 {
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(Error::Bracket("no root of the threshold equation in (1, inf)".into()));
                }
            }
            (lo, hi)
        }
    };
    let b = bisect(g, lo, hi, 1e-13)?;
    let big_k = b.root;
    let k_star = match dir {
        Direction::Max => -big_k.ln(),
        Direction::Min => big_k.ln(),
    };
    let mut sol = ThresholdSolution::from_k(
        dir,
        k_star,
        phi,
        Method::ClosedFormBm,
        Diagnostics {
            bracket_lo: lo,
            bracket_hi: hi,
            iterations: b.iterations,
            residual: g(big_k).abs(),
        },
    );
    sol.big_k = big_k;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyModel;
    use approx::assert_relative_eq;

    fn problem(sigma: f64, mu: f64, q: f64, alpha: f64, dir: Direction) -> PredictionProblem {
        PredictionProblem::new(LevyModel::brownian(sigma, mu, q).unwrap(), alpha, dir).unwrap()
    }

    #[test]
    fn payoff_values() {
        let p = problem(1.0, 1.0, 0.0, 1.0, Direction::Max);
        assert_eq!(payoff_f(&p, 0.0).unwrap(), -1.0);
        assert!(payoff_f(&p, std::f64::consts::LN_2 / 2.0).unwrap().abs() < 1e-15);
        assert_eq!(payoff_ratio(&p, 1.0).unwrap(), -1.0);
    }

    #[test]
    fn golden_ratio() {
        let p = problem(1.0, 0.5, 0.0, 2.0, Direction::Min);
        let golden = (3.0 + 5f64.sqrt()) / 2.0;
        let s = solve_kstar(&p).unwrap();
        assert!((s.big_k - golden).abs() < 1e-9, "{s:?}");
        let c = kstar_closed_form_bm(&p).unwrap();
        assert!((c.big_k - golden).abs() < 1e-12);
    }

    #[test]
    fn brownian_max_threshold() {
        let p = problem(1.0, 1.0, 0.0, 1.0, Direction::Max);
        let s = solve_kstar(&p).unwrap();
        // root of K^-1 + K + (2/3)K^3 - 8/3 on (0, 2^{-1/2})
        let oracle = {
            let (mut lo, mut hi) = (0.1f64, 0.5f64.sqrt());
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if 1.0 / m + m + 2.0 / 3.0 * m * m * m - 8.0 / 3.0 > 0.0 {
                    lo = m
                } else {
                    hi = m
                }
            }
            0.5 * (lo + hi)
        };
        assert!((s.big_k - oracle).abs() < 1e-8);
        assert_relative_eq!(s.big_k, 0.4700675138359197, epsilon = 1e-9);
        assert!(s.respects_bound());
        assert!(s.k_star > s.k0);
    }

    #[test]
    fn logarithmic_min_case() {
        let p = problem(1.0, 0.5, 0.0, 1.0, Direction::Min);
        let c = kstar_closed_form_bm(&p).unwrap();
        assert_relative_eq!(c.big_k, 2.873109164103983, epsilon = 1e-10);
        let s = solve_kstar(&p).unwrap();
        assert!((s.big_k - c.big_k).abs() < 1e-8);
    }

    #[test]
    fn h_sign_change_in_first_brackets() {
        let r = ReducedProblem::new(&problem(1.0, 1.0, 0.0, 1.0, Direction::Max)).unwrap();
        let k0 = r.k0();
        assert!(r.h(k0).unwrap() < 0.0);
        assert!(r.h(3.0 * k0).unwrap() > 0.0);
    }

    #[test]
    fn cramer_lundberg_continuous_fit() {
        let m = LevyModel::cramer_lundberg(2.0, 1.0, 1.0, 2.0).unwrap();
        let p = PredictionProblem::new(m, 1.0, Direction::Max).unwrap();
        let s = solve_kstar(&p).unwrap();
        let r = ReducedProblem::new(&p).unwrap();
        assert_eq!(r.w0(), 0.5);
        assert!(r.h(s.k_star).unwrap().abs() < 1e-10);
        assert!(s.respects_bound());
    }

    #[test]
    fn closed_form_preconditions() {
        let p = problem(1.0, 1.0, 0.0, 2.0, Direction::Max);
        assert!(matches!(kstar_closed_form_bm(&p), Err(Error::Gate(_))));
        let p = problem(1.0, 1.0, 0.1, 1.0, Direction::Max);
        assert!(kstar_closed_form_bm(&p).is_err());
        let cl = LevyModel::cramer_lundberg(2.0, 1.0, 1.0, 2.0).unwrap();
        let p = PredictionProblem::new(cl, 1.0, Direction::Max).unwrap();
        assert!(kstar_closed_form_bm(&p).is_err());
    }

    #[test]
    fn gate_rejection_propagates() {
        let p = problem(1.0, 1.0, 0.0, 2.0, Direction::Max);
        assert!(matches!(solve_kstar(&p), Err(Error::Gate(_))));
    }
}
