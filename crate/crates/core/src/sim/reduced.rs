//! Monte Carlo for the one-dimensional reflected problem.
//!
//! Under the Esscher transform by `β`, `Y_u = (y ∨ Ξ̄_u) − Ξ_u` is simulated
//! until `τ_k = inf{u : Y_u ≥ k}` and `∫₀^{τ_k} e^{−(q − φ(β))u} f(Y_u) du` is
//! integrated exactly along the piecewise-linear path.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dynamics::{exprel, peak_fraction, Dynamics};
use super::{run_blocks, Estimate, PathConfig, TRUNCATION_LIMIT};
use crate::error::{Error, Result};
use crate::levy::{classify, PredictionProblem};

/// Running payoff of the reduced problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Payoff {
    /// `f(z) = 1 − 2e^{−Φ(q)z}`.
    Prediction,
    /// A constant rate, for bound checks.
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McVkReport {
    pub estimate: Estimate,
    /// Paths that reached the horizon before `τ_k`.
    pub truncated: usize,
    pub truncation_rate: f64,
    /// `q − φ(β)`.
    pub discount: f64,
    /// Largest possible effect of stopping paths at the horizon:
    /// `sup|g| e^{−rH}/r` for a positive discount rate `r`, else `∞`.
    pub truncation_bias_bound: f64,
}

/// Truncation bound below which paths reaching the horizon are harmless and
/// the truncation-rate limit is not applied.
pub const NEGLIGIBLE_TRUNCATION_BIAS: f64 = 1e-8;

/// `∫₀^L e^{−r(u₀+s)} (a − b e^{−Φ(Y₀ + v s)}) ds` with `disc = e^{−r u₀}`.
#[inline]
fn piece(disc: f64, r: f64, len: f64, a: f64, b: f64, phi: f64, y0: f64, slope: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let base = a * len * exprel(-r * len);
    let decay = if b == 0.0 {
        0.0
    } else {
        b * (-phi * y0).exp() * len * exprel(-(r + phi * slope) * len)
    };
    disc * (base - decay)
}

/// Estimate `V_k(y)` with the prediction payoff.
pub fn mc_vk(problem: &PredictionProblem, k: f64, y: f64, config: &PathConfig) -> Result<McVkReport> {
    mc_vk_with(problem, k, y, Payoff::Prediction, config)
}

/// Estimate `E^β_y[∫₀^{τ_k} e^{−(q−φ(β))u} g(Y_u) du]` for a payoff `g`.
pub fn mc_vk_with(
    problem: &PredictionProblem,
    k: f64,
    y: f64,
    payoff: Payoff,
    config: &PathConfig,
) -> Result<McVkReport> {
    config.validate()?;
    let report = classify(problem)?;
    if !(k > 0.0) || !(y >= 0.0) {
        return Err(Error::Domain { value: y.min(k), bound: 0.0 });
    }
    let model = &problem.model;
    let beta = problem.beta();
    let discount = problem.q() - model.laplace_exponent_unkilled(beta)?;
    if y >= k {
        return Ok(McVkReport {
            estimate: Estimate {
                mean: 0.0,
                stderr: 0.0,
                n: config.n_paths,
            },
            truncated: 0,
            truncation_rate: 0.0,
            discount,
            truncation_bias_bound: 0.0,
        });
    }
    let tilted = Dynamics::of(&model.esscher_tilt(beta)?);
    let horizon = config.horizon_for(model);
    let (a, b, phi) = match payoff {
        Payoff::Prediction => (1.0, 2.0, report.phi_q),
        Payoff::Constant(c) => (c, 0.0, 0.0),
    };
    let r = discount;
    let dt = config.dt;
    let sup_payoff = match payoff {
        Payoff::Prediction => 1.0,
        Payoff::Constant(c) => c.abs(),
    };
    let truncation_bias_bound = if r > 0.0 {
        sup_payoff * (-r * horizon).exp() / r
    } else {
        f64::INFINITY
    };

    let run = |rng: &mut ChaCha8Rng| -> (f64, bool) {
        let (mut u, mut yy, mut disc, mut acc) = (0.0f64, y, 1.0f64, 0.0f64);
        loop {
            if u >= horizon {
                return (acc, true);
            }
            let seg = tilted.next_segment(rng, 0.0, horizon - u, dt);
            let rise = seg.end;
            let len = seg.duration;
            if seg.peak > yy {
                // Ξ sets a new supremum: Y falls to 0, then rises to peak − rise
                let hit = len * peak_fraction(&seg, 0.0) * (yy / seg.peak);
                let after = seg.peak - rise;
                acc += piece(disc, r, hit, a, b, phi, yy, -yy / hit);
                let disc_hit = disc * (-r * hit).exp();
                acc += piece(disc_hit, r, len - hit, a, b, phi, 0.0, after / (len - hit));
                yy = after;
            } else {
                acc += piece(disc, r, len, a, b, phi, yy, -rise / len);
                yy -= rise;
            }
            disc *= (-r * len).exp();
            u += len;
            yy += seg.jump;
            if yy >= k {
                return (acc, false);
            }
        }
    };

    let blocks = run_blocks(config, |rng, count| {
        let mut vals = Vec::with_capacity(count);
        let mut truncated = 0usize;
        for _ in 0..count {
            let (v, t) = run(rng);
            vals.push(v);
            truncated += t as usize;
        }
        (vals, truncated)
    })?;
    let mut values = Vec::with_capacity(config.n_paths);
    let mut truncated = 0;
    for (v, t) in blocks {
        values.extend(v);
        truncated += t;
    }
    let truncation_rate = truncated as f64 / config.n_paths as f64;
    if truncation_rate > TRUNCATION_LIMIT && truncation_bias_bound > NEGLIGIBLE_TRUNCATION_BIAS {
        return Err(Error::Truncation {
            rate: truncation_rate,
            limit: TRUNCATION_LIMIT,
        });
    }
    Ok(McVkReport {
        estimate: Estimate::from_samples(&values),
        truncated,
        truncation_rate,
        discount,
        truncation_bias_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{Direction, LevyModel};

    fn cfg(n: usize) -> PathConfig {
        PathConfig {
            dt: 1e-3,
            n_paths: n,
            seed: 11,
            threads: Some(1),
            ..PathConfig::default()
        }
    }

    #[test]
    fn start_beyond_threshold_is_zero() {
        let p = PredictionProblem::new(LevyModel::brownian(1.0, 1.0, 0.0).unwrap(), 1.0, Direction::Max).unwrap();
        let r = mc_vk(&p, 0.5, 0.7, &cfg(10)).unwrap();
        assert_eq!(r.estimate.mean, 0.0);
    }

    #[test]
    fn constant_payoff_respects_discount_bound() {
        let p = PredictionProblem::new(LevyModel::brownian(1.0, 1.0, 0.0).unwrap(), 1.0, Direction::Max).unwrap();
        let r = mc_vk_with(&p, 0.8, 0.0, Payoff::Constant(1.0), &cfg(4000)).unwrap();
        assert!((r.discount - 0.5).abs() < 1e-15);
        assert!(r.estimate.mean > 0.0);
        assert!(r.estimate.mean <= 1.0 / r.discount);
    }

    #[test]
    fn piece_matches_quadrature() {
        let (disc, r, len, phi, y0, slope) = (0.9, 0.4, 0.7, 1.5, 0.3, -0.2);
        let exact = piece(disc, r, len, 1.0, 2.0, phi, y0, slope);
        let n = 200_000;
        let h = len / n as f64;
        let mid: f64 = (0..n)
            .map(|i| {
                let s = (i as f64 + 0.5) * h;
                disc * (-r * s).exp() * (1.0 - 2.0 * (-phi * (y0 + slope * s)).exp())
            })
            .sum::<f64>()
            * h;
        assert!((exact - mid).abs() < 1e-10);
    }
}
