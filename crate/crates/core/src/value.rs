//! Value functions of the prediction problem.
//!
//! The one-dimensional values live on the reflected coordinate `y ≥ 0`;
//! the two-dimensional ones are recovered through `v(x, s) = x^α V*(log(s/x))`
//! and `v̂(x, i) = x^α V*(log(x/i))`. The direct integrals in `z` are kept as
//! an independent parameterization for cross-checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::{classify, Direction, PredictionProblem};
use crate::quad::{integrate, Tolerance};
use crate::threshold::{bm_parameters, kstar_closed_form_bm, solve_reduced, ReducedProblem, ThresholdSolution, LOG_CASE_TOLERANCE};

/// A point of the two-dimensional state space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueQuery {
    pub direction: Direction,
    pub x: f64,
    /// Running maximum `s ≥ x` (max) or running minimum `i ∈ (0, x]` (min).
    pub extremum: f64,
}

impl ValueQuery {
    pub fn new(direction: Direction, x: f64, extremum: f64) -> Result<Self> {
        let ok = x.is_finite()
            && x > 0.0
            && extremum.is_finite()
            && match direction {
                Direction::Max => extremum >= x,
                Direction::Min => extremum > 0.0 && extremum <= x,
            };
        if !ok {
            return Err(Error::InvalidParameter {
                name: "extremum",
                value: extremum,
                reason: "need 0 < x <= s (max) or 0 < i <= x (min)",
            });
        }
        Ok(Self {
            direction,
            x,
            extremum,
        })
    }

    /// Reflected coordinate `log(s/x)` or `log(x/i)`.
    pub fn y(&self) -> f64 {
        match self.direction {
            Direction::Max => (self.extremum / self.x).ln(),
            Direction::Min => (self.x / self.extremum).ln(),
        }
    }
}

/// A gated problem together with its optimal threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueFunction {
    reduced: ReducedProblem,
    solution: ThresholdSolution,
}

fn tol() -> Tolerance {
    Tolerance::default()
}

impl ValueFunction {
    pub fn new(problem: &PredictionProblem) -> Result<Self> {
        classify(problem)?;
        let reduced = ReducedProblem::new(problem)?;
        let solution = solve_reduced(&reduced)?;
        Ok(Self { reduced, solution })
    }

    pub fn problem(&self) -> &PredictionProblem {
        &self.reduced.problem
    }

    pub fn reduced(&self) -> &ReducedProblem {
        &self.reduced
    }

    pub fn solution(&self) -> &ThresholdSolution {
        &self.solution
    }

    pub fn k_star(&self) -> f64 {
        self.solution.k_star
    }

    /// `V*(y) = −∫_y^{k*} f(z) e^{−β(z−y)} W(z−y) dz`.
    pub fn v_star_1d(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        let k = self.solution.k_star;
        if y >= k {
            return Ok(0.0);
        }
        let r = &self.reduced;
        let q = integrate(|u| r.f(u + y) * r.tilted_w(u), 0.0, k - y, tol())?;
        Ok(-q.value)
    }

    /// `V_k(y)` for an arbitrary threshold `k > 0`: the expected discounted
    /// payoff of stopping when the reflected process first reaches `k`.
    pub fn v_k_1d(&self, k: f64, y: f64) -> Result<f64> {
        check_y(y)?;
        if !(k > 0.0) {
            return Err(Error::Domain { value: k, bound: 0.0 });
        }
        if y >= k {
            return Ok(0.0);
        }
        let r = &self.reduced;
        let inner = integrate(|u| r.f(u + y) * r.tilted_w(u), 0.0, k - y, tol())?.value;
        Ok(-inner + r.tilted_w(k - y) / r.tilted_w_prime(k) * r.h(k)?)
    }

    /// `V_k'(y)` for `y ∈ [0, k)`, evaluated from the differentiated formula.
    pub fn v_k_1d_derivative(&self, k: f64, y: f64) -> Result<f64> {
        check_y(y)?;
        if !(k > 0.0 && y < k) {
            return Err(Error::Domain { value: y, bound: k });
        }
        let r = &self.reduced;
        let inner = integrate(|u| r.f(u + y) * r.tilted_w_prime(u), 0.0, k - y, tol())?.value;
        Ok(r.f(y) * r.w0() + inner - r.tilted_w_prime(k - y) / r.tilted_w_prime(k) * r.h(k)?)
    }

    /// `v(x, s) = x^α V*(log(s/x))`.
    pub fn v_max(&self, x: f64, s: f64) -> Result<f64> {
        self.expect(Direction::Max)?;
        let q = ValueQuery::new(Direction::Max, x, s)?;
        Ok(x.powf(self.problem().alpha) * self.v_star_1d(q.y())?)
    }

    /// `v̂(x, i) = x^α V*(log(x/i))`.
    pub fn v_min(&self, x: f64, i: f64) -> Result<f64> {
        self.expect(Direction::Min)?;
        let q = ValueQuery::new(Direction::Min, x, i)?;
        Ok(x.powf(self.problem().alpha) * self.v_star_1d(q.y())?)
    }

    /// `−∫_{K*s}^x z^{α−1}(1 − 2(z/s)^{Φ(q)}) W(log(x/z)) dz`.
    pub fn v_max_direct(&self, x: f64, s: f64) -> Result<f64> {
        self.expect(Direction::Max)?;
        ValueQuery::new(Direction::Max, x, s)?;
        let lo = self.solution.big_k * s;
        if x <= lo {
            return Ok(0.0);
        }
        let (a, phi) = (self.problem().alpha, self.reduced.phi_q);
        let w = &self.reduced.scale;
        let q = integrate(
            |z| z.powf(a - 1.0) * (1.0 - 2.0 * (z / s).powf(phi)) * w.closed_value((x / z).ln().max(0.0)),
            lo,
            x,
            tol(),
        )?;
        Ok(-q.value)
    }

    /// `−∫_x^{K̂*i} z^{α−1}(1 − 2(i/z)^{Φ(q)}) W(log(z/x)) dz`.
    pub fn v_min_direct(&self, x: f64, i: f64) -> Result<f64> {
        self.expect(Direction::Min)?;
        ValueQuery::new(Direction::Min, x, i)?;
        let hi = self.solution.big_k * i;
        if x >= hi {
            return Ok(0.0);
        }
        let (a, phi) = (self.problem().alpha, self.reduced.phi_q);
        let w = &self.reduced.scale;
        let q = integrate(
            |z| z.powf(a - 1.0) * (1.0 - 2.0 * (i / z).powf(phi)) * w.closed_value((z / x).ln().max(0.0)),
            x,
            hi,
            tol(),
        )?;
        Ok(-q.value)
    }

    /// Two-dimensional value at a query point.
    pub fn value(&self, q: &ValueQuery) -> Result<f64> {
        match q.direction {
            Direction::Max => self.v_max(q.x, q.extremum),
            Direction::Min => self.v_min(q.x, q.extremum),
        }
    }

    fn expect(&self, direction: Direction) -> Result<()> {
        if self.problem().direction == direction {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "direction",
                value: f64::NAN,
                reason: "value requested for the other direction",
            })
        }
    }
}

fn check_y(y: f64) -> Result<()> {
    if y.is_finite() && y >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { value: y, bound: 0.0 })
    }
}

/// `V*(y)`.
pub fn v_star_1d(problem: &PredictionProblem, y: f64) -> Result<f64> {
    ValueFunction::new(problem)?.v_star_1d(y)
}

/// `V_k(y)`.
pub fn v_k_1d(problem: &PredictionProblem, k: f64, y: f64) -> Result<f64> {
    ValueFunction::new(problem)?.v_k_1d(k, y)
}

/// `v(x, s)`.
pub fn v_max(problem: &PredictionProblem, x: f64, s: f64) -> Result<f64> {
    ValueFunction::new(problem)?.v_max(x, s)
}

/// `v̂(x, i)`.
pub fn v_min(problem: &PredictionProblem, x: f64, i: f64) -> Result<f64> {
    ValueFunction::new(problem)?.v_min(x, i)
}

/// Explicit value for Brownian drift without killing, using `K` from the
/// closed-form threshold equation. Zero in the stopping region.
pub fn v_bm_closed_form(problem: &PredictionProblem, x: f64, s_or_i: f64) -> Result<f64> {
    let (mu, phi) = bm_parameters(problem)?;
    let q = ValueQuery::new(problem.direction, x, s_or_i)?;
    let k = kstar_closed_form_bm(problem)?.big_k;
    Ok(bm_closed_form_with(problem.direction, problem.alpha, mu, phi, k, q.x, q.extremum))
}

/// Same as [`v_bm_closed_form`] for a given ratio `k`.
pub fn bm_closed_form_with(direction: Direction, alpha: f64, mu: f64, phi: f64, k: f64, x: f64, e: f64) -> f64 {
    let a = alpha;
    let xa = x.powf(a);
    match direction {
        Direction::Max => {
            let s = e;
            let r = k * s / x;
            if r >= 1.0 {
                return 0.0;
            }
            (xa * (1.0 - r.powf(a)) * (1.0 / a + 2.0 / a * (x / s).powf(phi))
                - xa / (a - phi) * (1.0 - r.powf(a - phi))
                + 2.0 * s.powf(a) * k.powf(a + phi) / (a + phi) * (1.0 - r.powf(-phi - a)))
                / mu
        }
        Direction::Min => {
            let i = e;
            let r = k * i / x;
            if r <= 1.0 {
                return 0.0;
            }
            if (a - phi).abs() < LOG_CASE_TOLERANCE {
                (xa * (1.0 / a + 2.0 / a * (i / x).powf(a)) * (r.powf(a) - 1.0)
                    - xa / (2.0 * a) * (r.powf(2.0 * a) - 1.0)
                    - 2.0 * i.powf(a) * r.ln())
                    / mu
            } else {
                (xa * (r.powf(a) - 1.0) * (1.0 / a + 2.0 / a * (i / x).powf(phi))
                    - xa / (a + phi) * (r.powf(a + phi) - 1.0)
                    - 2.0 * i.powf(a) * k.powf(a - phi) / (phi - a) * (r.powf(phi - a) - 1.0))
                    / mu
            }
        }
    }
}
