//! Monte Carlo estimates of `E_x[|Θ − τ_K| − Θ]` for threshold rules.
//!
//! All thresholds of a sweep are evaluated on the same paths. With
//! drawdown `Y = Ξ̄ − Ξ`, the rule `τ_K` stops at the first grid time where
//! `Y ≥ |log K|`.
//!
//! The loss equals `τ − 2 min(Θ, τ)`, so once every rule has stopped only
//! one question remains: does `Ξ` ever exceed its current supremum again?
//! For a spectrally negative process at drawdown `y` this happens with
//! probability `e^{−Φ(q)y}`, and a single uniform draw settles it. With
//! `resolve_theta` the path is then continued: under the Esscher transform
//! by `Φ(q)` (the law conditioned to return) until it regains the
//! supremum, and under the original law afterwards, with a fresh decision
//! whenever the drawdown reaches `1/Φ(q)`.

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use super::dynamics::{exprel, peak_fraction, Dynamics};
use super::{run_blocks, Estimate, PathConfig, TRUNCATION_LIMIT};
use crate::error::{Error, Result};
use crate::levy::{assess, Direction, PredictionProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "K")]
    pub big_k: f64,
    /// `|log K|`.
    pub k: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub truncation_rate: f64,
}

/// Per-path record (pssMp time units).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecord {
    pub path_id: usize,
    /// `None` when the path was only followed until `Θ > max τ` was known.
    pub theta: Option<f64>,
    pub taus: Vec<f64>,
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub direction: Direction,
    pub alpha: f64,
    /// `false` when the class gate was bypassed.
    pub gated: bool,
    /// `"ungated, biased"` for bypassed gates.
    pub label: Option<String>,
    pub seed: u64,
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub rows: Vec<SweepRow>,
    /// Mean extremum time, only with `resolve_theta`.
    pub theta: Option<Estimate>,
    pub truncated: usize,
    pub truncation_rate: f64,
    /// Rules that had not fired at absorption and were capped at `ζ`.
    pub capped: usize,
    /// Paths aborted because the clock overflowed (counted as truncated).
    pub overflow: usize,
    #[serde(skip)]
    pub losses: Vec<Vec<f64>>,
    #[serde(skip)]
    pub paths: Vec<PathRecord>,
}

impl SimulationReport {
    /// Row with the smallest mean.
    pub fn argmin(&self) -> usize {
        (0..self.rows.len())
            .min_by(|&a, &b| self.rows[a].mean.total_cmp(&self.rows[b].mean))
            .expect("reports have at least one row")
    }

    /// Paired estimate of `loss_i − loss_j` over common paths.
    pub fn contrast(&self, i: usize, j: usize) -> Estimate {
        let d: Vec<f64> = self.losses[i].iter().zip(&self.losses[j]).map(|(a, b)| a - b).collect();
        Estimate::from_samples(&d)
    }

    pub fn estimate(&self, i: usize) -> Estimate {
        let r = &self.rows[i];
        Estimate {
            mean: r.mean,
            stderr: r.stderr,
            n: r.n,
        }
    }
}

struct Rules {
    /// Thresholds on `Y`, ascending.
    k: Vec<f64>,
    /// Position of each sorted rule in the caller's grid.
    order: Vec<usize>,
}

struct Engine {
    normal: Dynamics,
    returning: Dynamics,
    beta: f64,
    q: f64,
    phi_q: f64,
    horizon: f64,
    dt: f64,
    resolve: bool,
}

#[derive(Default)]
struct Outcome {
    /// Clock values of the sorted rules.
    taus: Vec<f64>,
    /// `None`: `Θ` exceeds every `τ`.
    theta: Option<f64>,
    truncated: bool,
    capped: usize,
    overflow: bool,
}

impl Engine {
    fn run<R: Rng + ?Sized>(&self, rng: &mut R, rules: &Rules) -> Outcome {
        let n = rules.k.len();
        let mut taus = vec![f64::NAN; n];
        let (mut t, mut x, mut m) = (0.0f64, 0.0f64, 0.0f64);
        let mut clock = 0.0f64;
        let mut weight = 1.0f64; // e^{βx}
        let mut g_clock = 0.0f64;
        let mut g_time = 0.0f64;
        let mut next = 0usize;
        let fresh_kill = |rng: &mut R| {
            if self.q > 0.0 {
                rng.sample::<f64, _>(Exp1) / self.q
            } else {
                f64::INFINITY
            }
        };
        let mut kill_left = fresh_kill(rng);
        let mut returning: Option<f64> = None;
        let mut decided = false;
        let recheck = if self.phi_q > 0.0 { 1.0 / self.phi_q } else { f64::INFINITY };
        let mut out = Outcome::default();
        let mut killed = false;

        loop {
            let y = m - x;
            while next < n && y >= rules.k[next] {
                taus[next] = clock;
                next += 1;
            }
            if next == n && returning.is_none() && (!decided || y >= recheck) {
                decided = true;
                let back = rng.random::<f64>() < (-self.phi_q * y).exp();
                if !back {
                    out.theta = Some(g_clock);
                    break;
                }
                if !self.resolve {
                    out.theta = None;
                    break;
                }
                returning = Some(m);
                kill_left = f64::INFINITY;
            }
            if t >= self.horizon {
                out.truncated = true;
                break;
            }
            let dynamics = if returning.is_some() { &self.returning } else { &self.normal };
            let mut cap = (self.horizon - t).min(kill_left);
            if let (Some(target), Some(speed)) = (returning, dynamics.creep_speed()) {
                cap = cap.min(((target - x) / speed).max(0.0));
            }
            let seg = dynamics.next_segment(rng, x, cap, self.dt);
            let z = self.beta * (seg.end - x);
            let r = exprel(z);
            let step = seg.duration * weight * r;
            let top = x + seg.peak;
            if top >= m {
                let frac = peak_fraction(&seg, x);
                m = top;
                g_clock = clock + frac * step;
                g_time = t + frac * seg.duration;
            }
            clock += step;
            weight *= 1.0 + z * r;
            t += seg.duration;
            kill_left -= seg.duration;
            x = seg.end;
            if let Some(target) = returning {
                if top >= target - 1e-12 {
                    returning = None;
                    kill_left = fresh_kill(rng);
                }
            }
            if seg.jump > 0.0 {
                x -= seg.jump;
                weight = (self.beta * x).exp();
            }
            if !clock.is_finite() || !weight.is_finite() {
                out.overflow = true;
                out.truncated = true;
                break;
            }
            if kill_left <= 0.0 {
                killed = true;
                break;
            }
        }

        if killed || out.truncated {
            out.theta = Some(g_clock);
            for tau in taus.iter_mut().skip(next) {
                *tau = clock;
                if killed {
                    out.capped += 1;
                }
            }
        }
        if g_time > 0.95 * self.horizon {
            out.truncated = true;
        }
        out.taus = taus;
        out
    }
}

struct BlockOut {
    losses: Vec<Vec<f64>>,
    thetas: Vec<f64>,
    truncated: usize,
    capped: usize,
    overflow: usize,
    records: Vec<PathRecord>,
}

/// Threshold `|log K|`, checking that `K` lies on the valid side of 1.
fn log_threshold(direction: Direction, big_k: f64) -> Result<f64> {
    let ok = match direction {
        Direction::Max => big_k > 0.0 && big_k <= 1.0,
        Direction::Min => big_k >= 1.0 && big_k.is_finite(),
    };
    if !ok {
        return Err(Error::InvalidParameter {
            name: "K",
            value: big_k,
            reason: "need 0 < K <= 1 (max) or K >= 1 (min)",
        });
    }
    Ok(big_k.ln().abs())
}

/// Estimate the objective for every `K` in `grid` on common paths.
pub fn sweep_k(problem: &PredictionProblem, grid: &[f64], config: &PathConfig) -> Result<SimulationReport> {
    config.validate()?;
    if grid.is_empty() {
        return Err(Error::Config("empty K grid".into()));
    }
    let report = assess(problem);
    if !report.member && !config.ungated {
        return Err(Error::Gate(report.reasons.join("; ")));
    }
    let mut ks: Vec<(f64, usize)> = grid
        .iter()
        .enumerate()
        .map(|(i, &kk)| log_threshold(problem.direction, kk).map(|k| (k, i)))
        .collect::<Result<_>>()?;
    ks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rules = Rules {
        k: ks.iter().map(|p| p.0).collect(),
        order: ks.iter().map(|p| p.1).collect(),
    };

    let model = &problem.model;
    let phi_q = report.phi_q;
    let engine = Engine {
        normal: Dynamics::of(model),
        returning: Dynamics::of(&model.esscher_tilt(phi_q)?),
        beta: problem.beta(),
        q: model.killing_rate(),
        phi_q,
        horizon: config.horizon_for(model),
        dt: config.dt,
        resolve: config.resolve_theta,
    };
    let scale = config.x0.powf(problem.alpha);
    let n_rules = grid.len();

    let blocks = run_blocks(config, |rng, count| {
        let mut out = BlockOut {
            losses: vec![Vec::with_capacity(count); n_rules],
            thetas: Vec::new(),
            truncated: 0,
            capped: 0,
            overflow: 0,
            records: Vec::new(),
        };
        for _ in 0..count {
            let o = engine.run(rng, &rules);
            out.truncated += o.truncated as usize;
            out.overflow += o.overflow as usize;
            out.capped += o.capped;
            if o.overflow {
                continue;
            }
            let theta = o.theta.map(|v| scale * v);
            let mut taus = vec![0.0; n_rules];
            let mut losses = vec![0.0; n_rules];
            for (sorted, &slot) in rules.order.iter().enumerate() {
                let tau = scale * o.taus[sorted];
                let loss = match theta {
                    Some(th) => (th - tau).abs() - th,
                    None => -tau,
                };
                taus[slot] = tau;
                losses[slot] = loss;
                out.losses[slot].push(loss);
            }
            if config.resolve_theta {
                if let Some(th) = theta {
                    out.thetas.push(th);
                }
            }
            if config.keep_paths {
                out.records.push(PathRecord {
                    path_id: 0,
                    theta,
                    taus,
                    losses,
                });
            }
        }
        out
    })?;

    let mut losses = vec![Vec::with_capacity(config.n_paths); n_rules];
    let mut thetas = Vec::new();
    let mut paths = Vec::new();
    let (mut truncated, mut capped, mut overflow) = (0, 0, 0);
    for b in blocks {
        for (all, part) in losses.iter_mut().zip(b.losses) {
            all.extend(part);
        }
        thetas.extend(b.thetas);
        paths.extend(b.records);
        truncated += b.truncated;
        capped += b.capped;
        overflow += b.overflow;
    }
    for (id, p) in paths.iter_mut().enumerate() {
        p.path_id = id;
    }
    let truncation_rate = truncated as f64 / config.n_paths as f64;
    if truncation_rate > TRUNCATION_LIMIT && report.member {
        return Err(Error::Truncation {
            rate: truncation_rate,
            limit: TRUNCATION_LIMIT,
        });
    }
    let rows = grid
        .iter()
        .zip(&losses)
        .map(|(&big_k, l)| {
            let e = Estimate::from_samples(l);
            SweepRow {
                big_k,
                k: big_k.ln().abs(),
                mean: e.mean,
                stderr: e.stderr,
                n: e.n,
                truncation_rate,
            }
        })
        .collect();
    Ok(SimulationReport {
        direction: problem.direction,
        alpha: problem.alpha,
        gated: report.member,
        label: (!report.member).then(|| "ungated, biased".to_string()),
        seed: config.seed,
        n_paths: config.n_paths,
        dt: config.dt,
        horizon: engine.horizon,
        rows,
        theta: config.resolve_theta.then(|| Estimate::from_samples(&thetas)),
        truncated,
        truncation_rate,
        capped,
        overflow,
        losses,
        paths,
    })
}

/// Objective at a single `K`.
pub fn objective_estimate(problem: &PredictionProblem, big_k: f64, config: &PathConfig) -> Result<Estimate> {
    let r = sweep_k(problem, &[big_k], config)?;
    Ok(r.estimate(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyModel;

    fn bm_max() -> PredictionProblem {
        PredictionProblem::new(LevyModel::brownian(1.0, 1.0, 0.0).unwrap(), 1.0, Direction::Max).unwrap()
    }

    fn small(n: usize, seed: u64) -> PathConfig {
        PathConfig {
            dt: 1e-3,
            n_paths: n,
            seed,
            threads: Some(1),
            ..PathConfig::default()
        }
    }

    #[test]
    fn immediate_stopping_costs_nothing() {
        let r = sweep_k(&bm_max(), &[1.0], &small(2000, 1)).unwrap();
        assert_eq!(r.rows[0].mean, 0.0);
    }

    #[test]
    fn singleton_grid_matches_objective() {
        let cfg = small(3000, 2);
        let a = objective_estimate(&bm_max(), 0.5, &cfg).unwrap();
        let r = sweep_k(&bm_max(), &[0.5], &cfg).unwrap();
        assert_eq!(a, r.estimate(0));
    }

    #[test]
    fn grid_order_does_not_matter() {
        let cfg = small(2000, 3);
        let a = sweep_k(&bm_max(), &[0.3, 0.6, 0.45], &cfg).unwrap();
        let b = sweep_k(&bm_max(), &[0.45, 0.3, 0.6], &cfg).unwrap();
        assert_eq!(a.rows[0].mean, b.rows[1].mean);
        assert_eq!(a.rows[2].mean, b.rows[0].mean);
    }

    #[test]
    fn killed_model_caps_at_absorption() {
        let m = LevyModel::cramer_lundberg(2.0, 1.0, 1.0, 2.0).unwrap();
        let p = PredictionProblem::new(m, 1.0, Direction::Max).unwrap();
        let r = sweep_k(&p, &[0.1, 0.5], &small(4000, 4)).unwrap();
        assert!(r.capped > 0);
        assert_eq!(r.truncated, 0);
    }

    #[test]
    fn invalid_thresholds_and_gates() {
        assert!(sweep_k(&bm_max(), &[1.5], &small(100, 0)).is_err());
        let bad = PredictionProblem::new(LevyModel::brownian(1.0, 1.0, 0.0).unwrap(), 2.0, Direction::Max).unwrap();
        assert!(matches!(sweep_k(&bad, &[0.5], &small(100, 0)), Err(Error::Gate(_))));
        let mut cfg = small(200, 0);
        cfg.ungated = true;
        cfg.horizon = Some(5.0);
        let r = sweep_k(&bad, &[0.5], &cfg).unwrap();
        assert_eq!(r.label.as_deref(), Some("ungated, biased"));
    }

    #[test]
    fn resolved_theta_is_reported_and_records_kept() {
        let mut cfg = small(1000, 5);
        cfg.resolve_theta = true;
        cfg.keep_paths = true;
        let r = sweep_k(&bm_max(), &[0.5], &cfg).unwrap();
        let th = r.theta.unwrap();
        assert!(th.mean > 0.0 && th.mean.is_finite());
        assert_eq!(r.paths.len(), 1000);
        assert!(r.paths.iter().all(|p| p.theta.is_some()));
        assert_eq!(r.paths[999].path_id, 999);
    }
}
