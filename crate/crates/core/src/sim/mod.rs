//! Monte Carlo engine built on the Lamperti representation.
//!
//! Paths of the spectrally negative model `Ξ` are simulated in their own
//! time; the process `X` is only ever observed through the clock
//! `I_t = ∫₀ᵗ e^{βΞ_s} ds`. For the maximum `Ξ = ξ` and `β = α`; for the
//! minimum `Ξ = ξ̂ = −ξ` and `β = −α`, so in both cases the extremum of `X`
//! is the supremum of `Ξ` and the threshold rules fire on drawdowns of `Ξ`.
//!
//! Paths are generated in fixed-size blocks. Block `b` draws from a ChaCha8
//! stream `(seed, b)`, so results do not depend on the number of workers.

mod dynamics;
mod objective;
mod path;
mod reduced;

pub use objective::{objective_estimate, sweep_k, PathRecord, SimulationReport, SweepRow};
pub use path::{lamperti_build, locate_theta, simulate_xi, LampertiPath, ThetaLocation, XiPath};
pub use reduced::{mc_vk, mc_vk_with, McVkReport, Payoff, NEGLIGIBLE_TRUNCATION_BIAS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::LevyModel;

/// Paths per RNG stream.
pub const BLOCK_SIZE: usize = 512;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "PSSMP_THREADS";

/// Largest tolerated fraction of truncated paths.
pub const TRUNCATION_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathConfig {
    /// Euler step for the Brownian component, in the time of `Ξ`.
    pub dt: f64,
    /// Time horizon of `Ξ`; `None` uses [`PathConfig::default_horizon`].
    pub horizon: Option<f64>,
    pub n_paths: usize,
    pub seed: u64,
    /// Starting point of `X`.
    pub x0: f64,
    /// Follow every path until the time of the ultimate extremum is known,
    /// not just until it is known relative to the stopping times.
    pub resolve_theta: bool,
    /// Keep per-path records in the report.
    pub keep_paths: bool,
    /// Run problems that fail the class gate; results are flagged.
    pub ungated: bool,
    /// Worker count; `None` reads [`THREADS_ENV`] or uses all cores.
    pub threads: Option<usize>,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            horizon: None,
            n_paths: 100_000,
            seed: 0,
            x0: 1.0,
            resolve_theta: false,
            keep_paths: false,
            ungated: false,
            threads: None,
        }
    }
}

impl PathConfig {
    /// `40/|ψ'(0+)|`, falling back to `40/q` for a driftless killed model.
    pub fn default_horizon(model: &LevyModel) -> f64 {
        let drift = model.mean_drift().abs();
        let scale = if drift > 0.0 { drift } else { model.killing_rate() };
        if scale > 0.0 {
            40.0 / scale
        } else {
            f64::INFINITY
        }
    }

    pub fn horizon_for(&self, model: &LevyModel) -> f64 {
        self.horizon.unwrap_or_else(|| Self::default_horizon(model))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", self.dt, "must be finite and > 0");
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) || h.is_nan() {
                return bad("horizon", h, "must be > 0");
            }
        }
        if self.n_paths < 2 {
            return bad("n_paths", self.n_paths as f64, "need at least 2 paths");
        }
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return bad("x0", self.x0, "must be finite and > 0");
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                n,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            f64::NAN
        };
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }

    /// `sqrt(se₁² + se₂²)`, the standard error of a difference of
    /// independent estimates.
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// RNG of path `index` for the single-path API.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    stream_rng(seed, index)
}

fn worker_count(config: &PathConfig) -> Option<usize> {
    config.threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
    })
}

/// Run `work(rng, paths_in_block)` on every block and return the results in
/// block order.
pub(crate) fn run_blocks<T, F>(config: &PathConfig, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let blocks = config.n_paths.div_ceil(BLOCK_SIZE);
    let job = |b: usize| {
        let mut rng = stream_rng(config.seed, b as u64);
        let count = BLOCK_SIZE.min(config.n_paths - b * BLOCK_SIZE);
        work(&mut rng, count)
    };
    match worker_count(config) {
        Some(1) => Ok((0..blocks).map(job).collect()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(|| (0..blocks).into_par_iter().map(job).collect()))
        }
        None => Ok((0..blocks).into_par_iter().map(job).collect()),
    }
}
