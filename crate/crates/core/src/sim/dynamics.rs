//! Segment-wise sampling of the two families.
//!
//! A segment is a piece of duration `duration` ending at `end`, followed by a
//! downward jump of size `jump` (zero for Brownian steps). `peak` is the
//! largest value reached on the piece, measured from its start: for Brownian
//! steps it is drawn from the exact law of the bridge maximum, so running
//! suprema carry no discrete-monitoring bias.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::levy::{Family, LevyModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Dynamics {
    Brownian { drift: f64, sigma: f64 },
    Cramer { d: f64, rate: f64, jump_mean_inv: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Segment {
    pub duration: f64,
    pub end: f64,
    pub jump: f64,
    pub peak: f64,
}

impl Dynamics {
    pub fn of(model: &LevyModel) -> Self {
        match model.family() {
            Family::BrownianDrift { sigma, mu } => Dynamics::Brownian { drift: -mu, sigma },
            Family::CramerLundberg {
                d,
                jump_rate,
                jump_mean_inv,
            } => Dynamics::Cramer {
                d,
                rate: jump_rate,
                jump_mean_inv,
            },
        }
    }

    /// Upward drift of the straight pieces for bounded variation.
    pub fn creep_speed(&self) -> Option<f64> {
        match *self {
            Dynamics::Cramer { d, .. } => Some(d),
            Dynamics::Brownian { .. } => None,
        }
    }

    /// Next segment from `start`, no longer than `cap`. Brownian steps are
    /// exact Gaussian increments of length `min(dt, cap)`; Cramér–Lundberg
    /// pieces run to the next jump epoch unless `cap` comes first.
    #[inline]
    pub fn next_segment<R: Rng + ?Sized>(&self, rng: &mut R, start: f64, cap: f64, dt: f64) -> Segment {
        match *self {
            Dynamics::Brownian { drift, sigma } => {
                let h = dt.min(cap);
                let z: f64 = rng.sample(StandardNormal);
                let rise = drift * h + sigma * h.sqrt() * z;
                // 1 − U lies in (0, 1], keeping the logarithm finite
                let u = 1.0 - rng.random::<f64>();
                let peak = 0.5 * (rise + (rise * rise - 2.0 * sigma * sigma * h * u.ln()).sqrt());
                Segment {
                    duration: h,
                    end: start + rise,
                    jump: 0.0,
                    peak,
                }
            }
            Dynamics::Cramer {
                d,
                rate,
                jump_mean_inv,
            } => {
                let wait = if rate > 0.0 {
                    rng.sample::<f64, _>(Exp1) / rate
                } else {
                    f64::INFINITY
                };
                if wait < cap {
                    Segment {
                        duration: wait,
                        end: start + d * wait,
                        jump: rng.sample::<f64, _>(Exp1) / jump_mean_inv,
                        peak: d * wait,
                    }
                } else {
                    Segment {
                        duration: cap,
                        end: start + d * cap,
                        jump: 0.0,
                        peak: d * cap,
                    }
                }
            }
        }
    }
}

/// `(e^z − 1)/z`, continuous at 0.
#[inline]
pub(crate) fn exprel(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        z.exp_m1() / z
    }
}

/// `∫₀^Δ e^{β(a + (b−a)s/Δ)} ds`.
/// Fraction of a segment elapsed when its peak is reached, taking the path
/// as straight up to the peak and straight down after it at equal speed.
#[inline]
pub(crate) fn peak_fraction(seg: &Segment, start: f64) -> f64 {
    let up = seg.peak;
    let down = seg.peak - (seg.end - start);
    if up + down > 0.0 {
        up / (up + down)
    } else {
        1.0
    }
}

#[inline]
pub(crate) fn exp_linear_integral(beta: f64, a: f64, b: f64, duration: f64) -> f64 {
    duration * (beta * a).exp() * exprel(beta * (b - a))
}
