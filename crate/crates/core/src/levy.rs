//! Spectrally negative Lévy families with closed-form Laplace exponents.
//!
//! Two families are supported: Brownian motion with drift
//! `ξ_t = σW_t − μt` (unbounded variation) and the Cramér–Lundberg process
//! `ξ_t = d·t − Σ J_i` with exponentially distributed jumps (bounded
//! variation, atomless Lévy measure). Both may be killed at rate `q`.
//!
//! Sign convention: [`LevyModel::laplace_exponent`] returns the exponent of
//! the *killed* process, `ψ(θ) = φ(θ) − q`, while
//! [`LevyModel::laplace_exponent_unkilled`] returns `φ(θ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of an implemented family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// `σW_t − μt`; `mu > 0` drifts to −∞.
    BrownianDrift { sigma: f64, mu: f64 },
    /// `d·t` minus a compound Poisson process of rate `jump_rate` with
    /// `Exp(jump_mean_inv)` jump sizes.
    CramerLundberg {
        d: f64,
        jump_rate: f64,
        jump_mean_inv: f64,
    },
}

/// A (possibly killed) spectrally negative Lévy process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    family: Family,
    q: f64,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

fn nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

impl LevyModel {
    pub fn brownian(sigma: f64, mu: f64, q: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        if !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
                reason: "must be finite",
            });
        }
        nonnegative("q", q)?;
        Ok(Self {
            family: Family::BrownianDrift { sigma, mu },
            q,
        })
    }

    pub fn cramer_lundberg(d: f64, jump_rate: f64, jump_mean_inv: f64, q: f64) -> Result<Self> {
        positive("d", d)?;
        nonnegative("lambda", jump_rate)?;
        positive("rho", jump_mean_inv)?;
        nonnegative("q", q)?;
        Ok(Self {
            family: Family::CramerLundberg {
                d,
                jump_rate,
                jump_mean_inv,
            },
            q,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn killing_rate(&self) -> f64 {
        self.q
    }

    /// Same Lévy triplet, no killing.
    pub fn unkilled(&self) -> Self {
        Self { q: 0.0, ..*self }
    }

    pub fn with_killing(&self, q: f64) -> Result<Self> {
        nonnegative("q", q)?;
        Ok(Self { q, ..*self })
    }

    pub fn is_bounded_variation(&self) -> bool {
        matches!(self.family, Family::CramerLundberg { .. })
    }

    /// Lower end of the open interval on which `E[e^{θξ_1}] < ∞`.
    pub fn domain_lower(&self) -> f64 {
        match self.family {
            Family::BrownianDrift { .. } => f64::NEG_INFINITY,
            Family::CramerLundberg { jump_mean_inv, .. } => -jump_mean_inv,
        }
    }

    fn check_domain(&self, theta: f64) -> Result<()> {
        let bound = self.domain_lower();
        if theta.is_nan() || theta <= bound {
            Err(Error::Domain {
                value: theta,
                bound,
            })
        } else {
            Ok(())
        }
    }

    /// `ψ(θ)` of the killed process.
    pub fn laplace_exponent(&self, theta: f64) -> Result<f64> {
        Ok(self.laplace_exponent_unkilled(theta)? - self.q)
    }

    /// `φ(θ) = q + ψ(θ)`.
    pub fn laplace_exponent_unkilled(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(match self.family {
            Family::BrownianDrift { sigma, mu } => 0.5 * sigma * sigma * theta * theta - mu * theta,
            Family::CramerLundberg {
                d,
                jump_rate,
                jump_mean_inv,
            } => d * theta - jump_rate * theta / (jump_mean_inv + theta),
        })
    }

    /// `φ'(θ)`.
    pub fn exponent_derivative(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(match self.family {
            Family::BrownianDrift { sigma, mu } => sigma * sigma * theta - mu,
            Family::CramerLundberg {
                d,
                jump_rate,
                jump_mean_inv,
            } => {
                let r = jump_mean_inv + theta;
                d - jump_rate * jump_mean_inv / (r * r)
            }
        })
    }

    /// Mean of `ξ_1` for the unkilled process, `φ'(0+)`.
    pub fn mean_drift(&self) -> f64 {
        self.exponent_derivative(0.0).expect("0 is always in the domain")
    }

    /// `φ` continued to the complex plane (used by the Laplace inversion oracle).
    pub fn laplace_exponent_complex(&self, s: Complex64) -> Complex64 {
        match self.family {
            Family::BrownianDrift { sigma, mu } => 0.5 * sigma * sigma * s * s - mu * s,
            Family::CramerLundberg {
                d,
                jump_rate,
                jump_mean_inv,
            } => d * s - jump_rate * s / (s + jump_mean_inv),
        }
    }

    /// Largest stationary point of `φ`; `φ` is increasing to the right of it.
    pub fn last_stationary_point(&self) -> f64 {
        match self.family {
            Family::BrownianDrift { sigma, mu } => mu / (sigma * sigma),
            Family::CramerLundberg {
                d,
                jump_rate,
                jump_mean_inv,
            } => (jump_rate * jump_mean_inv / d).sqrt() - jump_mean_inv,
        }
    }

    /// `Φ(λ) = sup{θ ≥ 0 : φ(θ) = λ}` by bracketing and bisection on the
    /// increasing branch of `φ`, finished with a safeguarded Newton step.
    pub fn right_inverse_phi(&self, lambda: f64) -> Result<f64> {
        nonnegative("lambda", lambda)?;
        let phi = |t: f64| self.laplace_exponent_unkilled(t).expect("theta >= 0 is in domain");
        let mut lo = self.last_stationary_point().max(0.0);
        let mut hi = (2.0 * lo).max(1.0);
        while phi(hi) <= lambda {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Bracket(format!("phi stays below {lambda}")));
            }
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid) > lambda {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut root = 0.5 * (lo + hi);
        for _ in 0..3 {
            let slope = self.exponent_derivative(root)?;
            if slope <= 0.0 {
                break;
            }
            let next = root - (phi(root) - lambda) / slope;
            if next < lo || next > hi || !next.is_finite() {
                break;
            }
            root = next;
        }
        Ok(root)
    }

    /// Both real roots `(hi, lo)` of `φ(θ) = η`, or `None` when they are
    /// complex. For `η ≥ 0` they always exist and `hi = Φ(η)`.
    pub fn exponent_level_roots(&self, eta: f64) -> Option<(f64, f64)> {
        // a θ² + b θ + c = 0
        let (a, b, c) = match self.family {
            Family::BrownianDrift { sigma, mu } => (0.5 * sigma * sigma, -mu, -eta),
            Family::CramerLundberg {
                d,
                jump_rate,
                jump_mean_inv,
            } => (d, d * jump_mean_inv - jump_rate - eta, -eta * jump_mean_inv),
        };
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 || !disc.is_finite() {
            return None;
        }
        let sq = disc.sqrt();
        let (r1, r2) = if b == 0.0 && c == 0.0 {
            (0.0, 0.0)
        } else {
            let w = -0.5 * (b + b.signum() * sq);
            if b == 0.0 {
                (sq / (2.0 * a), -sq / (2.0 * a))
            } else if w == 0.0 {
                (0.0, -b / a)
            } else {
                (w / a, c / w)
            }
        };
        Some((r1.max(r2), r1.min(r2)))
    }

    /// Model of `ξ` under the exponential change of measure with parameter
    /// `v`: exponent `θ ↦ ψ(v+θ) − ψ(v)` and no killing.
    pub fn esscher_tilt(&self, v: f64) -> Result<LevyModel> {
        self.check_domain(v)?;
        let family = match self.family {
            Family::BrownianDrift { sigma, mu } => Family::BrownianDrift {
                sigma,
                mu: mu - sigma * sigma * v,
            },
            Family::CramerLundberg {
                d,
                jump_rate,
                jump_mean_inv,
            } => Family::CramerLundberg {
                d,
                jump_rate: jump_rate * jump_mean_inv / (jump_mean_inv + v),
                jump_mean_inv: jump_mean_inv + v,
            },
        };
        Ok(LevyModel { family, q: 0.0 })
    }
}

/// Which extremum is being predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Max => f.write_str("max"),
            Direction::Min => f.write_str("min"),
        }
    }
}

/// A prediction problem for a pssMp given through a spectrally negative
/// Lévy model.
///
/// For [`Direction::Max`] the model is the Lamperti representation `ξ` of
/// `X`. For [`Direction::Min`] it is the dual `ξ̂ = −ξ`, which is the
/// spectrally negative one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionProblem {
    pub model: LevyModel,
    pub alpha: f64,
    pub direction: Direction,
}

impl PredictionProblem {
    pub fn new(model: LevyModel, alpha: f64, direction: Direction) -> Result<Self> {
        positive("alpha", alpha)?;
        Ok(Self {
            model,
            alpha,
            direction,
        })
    }

    /// Tilt parameter of the reduced problem: `α` (max) or `−α` (min).
    pub fn beta(&self) -> f64 {
        match self.direction {
            Direction::Max => self.alpha,
            Direction::Min => -self.alpha,
        }
    }

    pub fn q(&self) -> f64 {
        self.model.killing_rate()
    }

    /// `Φ(q)` of the (dual) model.
    pub fn phi_q(&self) -> f64 {
        self.model
            .right_inverse_phi(self.q())
            .expect("q is validated nonnegative")
    }

    /// Superscript of the tilted scale function, `q − φ(β)`.
    pub fn tilted_eta(&self) -> Result<f64> {
        Ok(self.q() - self.model.laplace_exponent_unkilled(self.beta())?)
    }
}

/// Finiteness of the mean of the extremum time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanFiniteness {
    Finite,
    Infinite,
    /// `q > 0` min case: the criterion is only sufficient.
    SufficientlyFinite,
    Undetermined,
}

/// Outcome of [`classify`] / [`assess`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub direction: Direction,
    /// Membership in the restricted class for which the threshold rule is optimal.
    pub member: bool,
    pub mean_extremum_time: MeanFiniteness,
    /// `(q, β)` lies in the admissible set of the reduced problem.
    pub admissible: bool,
    /// `ψ(α)` (max) or `ψ̂(α)` (min): the finite-mean criterion.
    pub psi_alpha: f64,
    /// `ψ(β)` when `β` lies in the domain.
    pub psi_beta: Option<f64>,
    pub phi_q: f64,
    /// Human-readable reasons for every failed condition.
    pub reasons: Vec<String>,
}

/// Evaluate every class condition without rejecting.
pub fn assess(problem: &PredictionProblem) -> ClassReport {
    let model = &problem.model;
    let q = model.killing_rate();
    let beta = problem.beta();
    let alpha = problem.alpha;
    let mut reasons = Vec::new();

    if let Family::CramerLundberg { jump_rate, .. } = model.family() {
        if jump_rate <= 0.0 {
            reasons.push("lambda = 0 gives monotone paths; jumps are required".to_string());
        }
    }
    let drift = model.mean_drift();
    if q == 0.0 && drift >= 0.0 {
        reasons.push(format!(
            "without killing the spectrally negative process must drift to -infinity, but psi'(0+) = {drift}"
        ));
    }

    let psi_alpha = model
        .laplace_exponent(alpha)
        .expect("alpha > 0 is in the domain");
    let psi_beta = model.laplace_exponent(beta).ok();
    let phi_q = problem.phi_q();

    let mut admissible = false;
    match problem.direction {
        Direction::Max => {
            if psi_alpha >= 0.0 {
                let mut msg = format!("psi(alpha) = {psi_alpha} is not < 0");
                if let Family::BrownianDrift { sigma, mu } = model.family() {
                    msg.push_str(&format!(
                        " (Brownian drift requires alpha < 2 mu / sigma^2 = {})",
                        2.0 * mu / (sigma * sigma)
                    ));
                }
                reasons.push(msg);
            } else {
                admissible = true;
            }
        }
        Direction::Min => match psi_beta {
            None => reasons.push(format!(
                "psi is not defined at -alpha = {beta} (needs alpha < {})",
                -model.domain_lower()
            )),
            Some(p) => {
                if q > 0.0 && p >= 0.0 {
                    reasons.push(format!("q > 0 requires psi(-alpha) < 0, got {p}"));
                } else {
                    admissible = true;
                }
            }
        },
    }
    let member = reasons.is_empty();

    let mean_extremum_time = match (problem.direction, q > 0.0) {
        (Direction::Max, _) | (Direction::Min, false) => {
            if psi_alpha < 0.0 {
                MeanFiniteness::Finite
            } else {
                MeanFiniteness::Infinite
            }
        }
        (Direction::Min, true) => {
            if psi_alpha < 0.0 {
                MeanFiniteness::SufficientlyFinite
            } else {
                MeanFiniteness::Undetermined
            }
        }
    };

    ClassReport {
        direction: problem.direction,
        member,
        mean_extremum_time,
        admissible,
        psi_alpha,
        psi_beta,
        phi_q,
        reasons,
    }
}

/// Gate a problem: `Err(Error::Gate)` with the failed conditions unless the
/// process belongs to the restricted class.
pub fn classify(problem: &PredictionProblem) -> Result<ClassReport> {
    let report = assess(problem);
    if report.member {
        Ok(report)
    } else {
        Err(Error::Gate(report.reasons.join("; ")))
    }
}
