//! Stored single paths: `Ξ`, its Lamperti image and the extremum time.
//! The streaming estimators in this module's siblings never store paths;
//! these functions exist for inspection and testing.

use rand::Rng;
use rand_distr::Exp1;

use super::dynamics::{exp_linear_integral, Dynamics};
use super::PathConfig;
use crate::error::{Error, Result};
use crate::levy::{Direction, LevyModel};

/// A sampled path of `Ξ`. A jump at time `t` is stored as two points with
/// the same time, before and after the jump; between points the path is
/// taken to be linear.
#[derive(Debug, Clone, PartialEq)]
pub struct XiPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Killing time, `+∞` without killing.
    pub lifetime: f64,
    /// Time up to which the path was generated.
    pub horizon: f64,
}

impl XiPath {
    /// A synthetic path from points, unkilled.
    pub fn from_points(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::Config("times and values must be non-empty and of equal length".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) || times[0] != 0.0 {
            return Err(Error::Config("times must start at 0 and be nondecreasing".into()));
        }
        let horizon = *times.last().expect("non-empty");
        Ok(Self {
            times,
            values,
            lifetime: f64::INFINITY,
            horizon,
        })
    }

    pub fn is_killed(&self) -> bool {
        self.lifetime.is_finite()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("paths are never empty")
    }
}

/// Sample `Ξ` on `[0, horizon ∧ lifetime]`. Brownian increments are exact
/// Gaussian steps of length `dt`; Cramér–Lundberg paths are exact with
/// jump epochs recorded. The killing time is an independent `Exp(q)`.
pub fn simulate_xi<R: Rng + ?Sized>(model: &LevyModel, config: &PathConfig, rng: &mut R) -> XiPath {
    let dyns = Dynamics::of(model);
    let horizon = config.horizon_for(model);
    let q = model.killing_rate();
    let lifetime = if q > 0.0 {
        rng.sample::<f64, _>(Exp1) / q
    } else {
        f64::INFINITY
    };
    let stop = horizon.min(lifetime);
    let mut times = vec![0.0];
    let mut values = vec![0.0];
    let (mut t, mut x) = (0.0, 0.0);
    while t < stop {
        let seg = dyns.next_segment(rng, x, stop - t, config.dt);
        t = if stop - t <= seg.duration { stop } else { t + seg.duration };
        x = seg.end;
        times.push(t);
        values.push(x);
        if seg.jump > 0.0 {
            x -= seg.jump;
            times.push(t);
            values.push(x);
        }
    }
    XiPath {
        times,
        values,
        lifetime,
        horizon,
    }
}

/// How the lifetime of `X` was determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Absorption {
    /// `Ξ` was killed: `X` jumps to zero.
    Killed,
    /// `Ξ` drifts to `−∞` and `X` creeps to zero; `ζ` is the clock at the horizon.
    Limit,
    /// No absorption observed.
    None,
}

/// `X` on its own clock.
#[derive(Debug, Clone, PartialEq)]
pub struct LampertiPath {
    /// Times of `X`: `u = x0^α I_t`.
    pub u: Vec<f64>,
    /// `X_u = x0 e^{Ξ_t}`.
    pub x: Vec<f64>,
    pub zeta: Option<f64>,
    pub absorption: Absorption,
}

/// Clock `I` at every point of the path, integrated exactly along the
/// linear pieces.
pub(crate) fn clock(path: &XiPath, beta: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(path.times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..path.times.len() {
        let dt = path.times[i] - path.times[i - 1];
        if dt > 0.0 {
            acc += exp_linear_integral(beta, path.values[i - 1], path.values[i], dt);
        }
        if !acc.is_finite() {
            return Err(Error::Domain {
                value: path.values[i],
                bound: f64::MAX.ln() / beta.abs(),
            });
        }
        out.push(acc);
    }
    Ok(out)
}

/// Lamperti image of `Ξ` with clock exponent `beta` (`α` for the process
/// itself, `−α` when `Ξ` is the dual).
pub fn lamperti_build(path: &XiPath, beta: f64, x0: f64) -> Result<LampertiPath> {
    let alpha = beta.abs();
    let scale = x0.powf(alpha);
    let sign = beta.signum();
    let i = clock(path, beta)?;
    let u: Vec<f64> = i.iter().map(|v| scale * v).collect();
    let x: Vec<f64> = path.values.iter().map(|v| x0 * (sign * v).exp()).collect();
    let last = *u.last().expect("paths are never empty");
    let (zeta, absorption) = if path.is_killed() && path.lifetime <= path.end_time() {
        (Some(last), Absorption::Killed)
    } else if beta > 0.0 && path.values.last().is_some_and(|v| *v < 0.0) {
        (Some(last), Absorption::Limit)
    } else {
        (None, Absorption::None)
    };
    Ok(LampertiPath { u, x, zeta, absorption })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaLocation {
    /// Time of `Ξ` at its last visit to the running supremum.
    pub g: f64,
    /// `x0^α I_G`.
    pub theta: f64,
    /// The supremum was last updated in the final 5% of the horizon.
    pub truncated: bool,
}

/// Time of the ultimate extremum of `X` on a stored path of `Ξ`. Ties go to
/// the latest visit.
pub fn locate_theta(path: &XiPath, direction: Direction, alpha: f64, x0: f64) -> Result<ThetaLocation> {
    let beta = match direction {
        Direction::Max => alpha,
        Direction::Min => -alpha,
    };
    let i = clock(path, beta)?;
    let mut best = 0;
    for (k, v) in path.values.iter().enumerate() {
        if *v >= path.values[best] {
            best = k;
        }
    }
    let g = path.times[best];
    Ok(ThetaLocation {
        g,
        theta: x0.powf(alpha) * i[best],
        truncated: g > 0.95 * path.horizon.min(path.end_time()),
    })
}
