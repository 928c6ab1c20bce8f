//! Checks run by `validate`. Each returns whether it passed and a short
//! detail string for the scorecard.

use pssmp::quad::{integrate, Tolerance};
use pssmp::sim::{mc_vk, sweep_k};
use pssmp::threshold::h_function;
use pssmp::value::v_bm_closed_form;
use pssmp::{
    classify, kstar_closed_form_bm, solve_kstar, Direction, Family, PathConfig, PredictionProblem, ScaleFunction,
    ValueFunction, ValueQuery,
};
use serde::Serialize;

use crate::commands::{has_closed_form, relative_gap};
use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub problem: String,
    pub name: &'static str,
    pub status: &'static str,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct Scorecard {
    pub checks: Vec<Check>,
}

impl Scorecard {
    fn push(&mut self, problem: &str, name: &'static str, status: &'static str, detail: String) {
        println!("{status} {problem:<10} {name:<22} {detail}");
        self.checks.push(Check {
            problem: problem.to_string(),
            name,
            status,
            detail,
        });
    }

    fn record(&mut self, problem: &str, name: &'static str, outcome: CliResult<(bool, String)>) {
        match outcome {
            Ok((ok, d)) => self.push(problem, name, if ok { "PASS" } else { "FAIL" }, d),
            Err(e) => self.push(problem, name, "FAIL", e.to_string()),
        }
    }
}

type Outcome = CliResult<(bool, String)>;

pub fn run(name: &str, p: &PredictionProblem, cfg: &PathConfig, fast: bool, card: &mut Scorecard) {
    if let Err(e) = classify(p) {
        card.push(name, "gate", "FAIL", e.to_string());
        return;
    }
    card.push(name, "gate", "PASS", "member of the class".into());
    card.record(name, "laplace-identity", laplace_identity(p));
    card.record(name, "tilt-identity", tilt_identity(p));
    card.record(name, "threshold-unique", uniqueness(p));
    card.record(name, "threshold-bounds", bounds(p));
    card.record(name, "fit-condition", fit(p));
    card.record(name, "homogeneity", homogeneity(p));
    if has_closed_form(p) {
        card.record(name, "closed-form", closed_form(p));
    }
    if fast {
        card.push(name, "mc-reduced", "SKIP", "--fast".into());
        card.push(name, "mc-optimality", "SKIP", "--fast".into());
    } else {
        card.record(name, "mc-reduced", mc_reduced(p, cfg));
        card.record(name, "mc-optimality", mc_optimality(p, cfg));
    }
}

/// `∫₀^∞ e^{−θx} W^{(q)}(x) dx = 1/ψ(θ)` for `θ > Φ(q)`, with `ψ` killed at rate `q`.
fn laplace_identity(p: &PredictionProblem) -> Outcome {
    let sf = ScaleFunction::killed(&p.model)?;
    let phi = p.phi_q();
    let mut worst = 0.0f64;
    for offset in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let theta = phi + offset;
        // the integrand decays like e^{−(θ−Φ)x}
        let upper = 40.0 / offset;
        let lhs = integrate(|x| (-theta * x).exp() * sf.value(x).unwrap_or(f64::NAN), 0.0, upper, Tolerance::with_abs(1e-13))?.value;
        let rhs = 1.0 / p.model.laplace_exponent(theta)?;
        worst = worst.max(relative_gap(lhs, rhs));
    }
    Ok((worst < 1e-6, format!("max relative gap {worst:.2e}")))
}

fn tilt_identity(p: &PredictionProblem) -> Outcome {
    let m = &p.model;
    let lo = m.domain_lower().max(-3.0);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let v = lo + 0.1 + (4.0 - lo) * i as f64 / 10.0;
        let tilted = m.esscher_tilt(v)?;
        for j in 0..10 {
            let theta = tilted.domain_lower().max(-3.0) + 0.1 + 0.4 * j as f64;
            let lhs = tilted.laplace_exponent(theta)?;
            let rhs = m.laplace_exponent_unkilled(v + theta)? - m.laplace_exponent_unkilled(v)?;
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    Ok((worst < 1e-12, format!("max gap {worst:.2e} over 100 points")))
}

fn uniqueness(p: &PredictionProblem) -> Outcome {
    let s = solve_kstar(p)?;
    let step = s.k0 / 100.0;
    let mut k = s.k0 + step;
    let mut prev = h_function(p, k)? > 0.0;
    let mut changes = 0;
    while k < 3.0 * s.k_star {
        k += step;
        let now = h_function(p, k)? > 0.0;
        changes += usize::from(now != prev);
        prev = now;
    }
    Ok((changes == 1, format!("{changes} sign change(s) on (k0, 3k*]")))
}

fn bounds(p: &PredictionProblem) -> Outcome {
    let s = solve_kstar(p)?;
    let ok = s.respects_bound() && s.k_star > s.k0 && s.diagnostics.residual < 1e-10;
    Ok((
        ok,
        format!(
            "K = {:.10}, bound {:.10}, residual {:.1e}",
            s.big_k,
            s.bound(),
            s.diagnostics.residual
        ),
    ))
}

fn fit(p: &PredictionProblem) -> Outcome {
    let v = ValueFunction::new(p)?;
    let ks = v.k_star();
    match p.model.family() {
        Family::BrownianDrift { .. } => {
            let h = 1e-7;
            let slope = (v.v_star_1d(ks)? - v.v_star_1d(ks - h)?) / h;
            Ok((slope.abs() < 1e-6, format!("smooth fit: V'(k*-) = {slope:.2e}")))
        }
        Family::CramerLundberg { .. } => {
            let r = v.reduced();
            let left = v.v_star_1d(ks * (1.0 - 1e-12))?;
            let integral = integrate(|z| r.f(z) * r.tilted_w_prime(z), 0.0, ks, Tolerance::default())?.value;
            let gap = (integral - r.w0()).abs();
            Ok((
                left.abs() < 1e-8 && gap < 1e-8,
                format!("continuous fit: V(k*-) = {left:.2e}, identity gap {gap:.2e}"),
            ))
        }
    }
}

fn grid(p: &PredictionProblem, k_star: f64) -> Vec<(f64, f64)> {
    let sign = match p.direction {
        Direction::Max => 1.0,
        Direction::Min => -1.0,
    };
    (0..10)
        .map(|j| {
            let x = 0.5 + 0.25 * j as f64;
            (x, x * (sign * k_star * j as f64 / 10.0).exp())
        })
        .collect()
}

fn homogeneity(p: &PredictionProblem) -> Outcome {
    let v = ValueFunction::new(p)?;
    let mut worst = 0.0f64;
    for (x, e) in grid(p, v.k_star()) {
        let base = v.value(&ValueQuery::new(p.direction, x, e)?)?;
        for c in [0.5, 2.0, 10.0] {
            let scaled = v.value(&ValueQuery::new(p.direction, c * x, c * e)?)?;
            worst = worst.max(relative_gap(scaled, c.powf(p.alpha) * base));
        }
    }
    Ok((worst < 1e-10, format!("max relative gap {worst:.2e}")))
}

fn closed_form(p: &PredictionProblem) -> Outcome {
    let quad = solve_kstar(p)?;
    let closed = kstar_closed_form_bm(p)?;
    let k_gap = (quad.big_k - closed.big_k).abs();
    let v = ValueFunction::new(p)?;
    let mut worst = 0.0f64;
    for (x, e) in grid(p, v.k_star()) {
        let a = v.value(&ValueQuery::new(p.direction, x, e)?)?;
        worst = worst.max(relative_gap(a, v_bm_closed_form(p, x, e)?));
    }
    Ok((
        k_gap < 1e-8 && worst < 1e-9,
        format!("|dK| = {k_gap:.2e}, max relative value gap {worst:.2e}"),
    ))
}

fn mc_reduced(p: &PredictionProblem, cfg: &PathConfig) -> Outcome {
    let v = ValueFunction::new(p)?;
    let mc = mc_vk(p, v.k_star(), 0.0, cfg)?;
    let want = v.v_star_1d(0.0)?;
    let e = mc.estimate;
    let z = (e.mean - want) / e.stderr;
    Ok((
        z.abs() < 3.0,
        format!("{:.5} ± {:.5} vs {want:.5} ({z:+.2} se)", e.mean, e.stderr),
    ))
}

fn mc_optimality(p: &PredictionProblem, cfg: &PathConfig) -> Outcome {
    let s = solve_kstar(p)?;
    let clamp = |k: f64| match p.direction {
        Direction::Max => k.min(1.0),
        Direction::Min => k.max(1.0),
    };
    let grid = [clamp(0.7 * s.big_k), s.big_k, clamp(1.3 * s.big_k)];
    let r = sweep_k(p, &grid, cfg)?;
    // paired over common paths: the estimates share almost all their noise
    let margins: Vec<f64> = [0, 2]
        .iter()
        .map(|&i| {
            let c = r.contrast(i, 1);
            c.mean / c.stderr
        })
        .collect();
    let ok = margins.iter().all(|m| *m > 2.0);
    Ok((
        ok,
        format!(
            "margins {:.1} and {:.1} paired se, truncation {:.4}",
            margins[0], margins[1], r.truncation_rate
        ),
    ))
}
