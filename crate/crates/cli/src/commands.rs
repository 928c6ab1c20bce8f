use std::path::PathBuf;

use pssmp::sim::sweep_k;
use pssmp::threshold::{Method, ThresholdSolution};
use pssmp::value::v_bm_closed_form;
use pssmp::{kstar_closed_form_bm, solve_kstar, Direction, Family, PathConfig, PredictionProblem, ValueFunction, ValueQuery};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{write_rows, Meta};
use crate::suite::{self, Scorecard};

/// Everything a subcommand needs, after flags were merged into the config.
pub struct Context {
    pub config: RunConfig,
    pub problem: Option<PredictionProblem>,
    pub fast: bool,
}

impl Context {
    fn problem(&self) -> CliResult<&PredictionProblem> {
        self.problem
            .as_ref()
            .ok_or_else(|| CliError::Config("no problem: pass --preset or a config with a [problem] table".into()))
    }

    fn out(&self) -> Option<PathBuf> {
        self.config.output.path.clone()
    }

    fn format(&self) -> Format {
        self.config.output.format
    }

    fn meta(&self, command: &'static str, seed: Option<u64>) -> Meta {
        Meta::new(command, seed, self.config.digest())
    }
}

fn extremum_symbol(direction: Direction) -> &'static str {
    match direction {
        Direction::Max => "K*",
        Direction::Min => "K̂*",
    }
}

/// Closed forms exist for the Brownian family without killing.
pub(crate) fn has_closed_form(p: &PredictionProblem) -> bool {
    matches!(p.model.family(), Family::BrownianDrift { .. }) && p.q() == 0.0
}

pub(crate) fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = b.abs();
    if scale > 0.0 {
        (a - b).abs() / scale
    } else {
        (a - b).abs()
    }
}

#[derive(Serialize)]
struct SolveRow {
    direction: Direction,
    k_star: f64,
    #[serde(rename = "K_star")]
    big_k: f64,
    k0: f64,
    phi_q: f64,
    bound: f64,
    respects_bound: bool,
    residual: f64,
    iterations: usize,
    method: Method,
    closed_form_k: Option<f64>,
    closed_form_gap: Option<f64>,
}

pub fn solve(ctx: &Context) -> CliResult<()> {
    let p = ctx.problem()?;
    let s = solve_kstar(p)?;
    let closed = if has_closed_form(p) {
        Some(kstar_closed_form_bm(p)?)
    } else {
        None
    };
    print_solution(p, &s, closed.as_ref());
    if let Some(path) = ctx.out() {
        let row = SolveRow {
            direction: s.direction,
            k_star: s.k_star,
            big_k: s.big_k,
            k0: s.k0,
            phi_q: s.phi_q,
            bound: s.bound(),
            respects_bound: s.respects_bound(),
            residual: s.diagnostics.residual,
            iterations: s.diagnostics.iterations,
            method: s.method,
            closed_form_k: closed.as_ref().map(|c| c.big_k),
            closed_form_gap: closed.as_ref().map(|c| (c.big_k - s.big_k).abs()),
        };
        write_rows(Some(&path), ctx.format(), &ctx.meta("solve", None), &[row])?;
    }
    Ok(())
}

fn print_solution(p: &PredictionProblem, s: &ThresholdSolution, closed: Option<&ThresholdSolution>) {
    let sym = extremum_symbol(p.direction);
    let cmp = match p.direction {
        Direction::Max => "<",
        Direction::Min => ">",
    };
    let ok = |b: bool| if b { "ok" } else { "VIOLATED" };
    println!("direction  {}", p.direction);
    println!("k*         {:.12}", s.k_star);
    // both symbols are two columns wide on screen
    println!("{sym}         {:.12}", s.big_k);
    println!("k0         {:.12}  (log 2 / Phi(q), Phi(q) = {:.12})", s.k0, s.phi_q);
    println!(
        "bound      {sym} {cmp} {:.12}: {}",
        s.bound(),
        ok(s.respects_bound())
    );
    println!("k* > k0    {}", ok(s.k_star > s.k0));
    println!(
        "residual   {:.3e} after {} iterations on [{:.6}, {:.6}]",
        s.diagnostics.residual, s.diagnostics.iterations, s.diagnostics.bracket_lo, s.diagnostics.bracket_hi
    );
    if let Some(c) = closed {
        println!(
            "closed     {sym} = {:.12}, |difference| = {:.3e}",
            c.big_k,
            (c.big_k - s.big_k).abs()
        );
    }
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    if p.direction == Direction::Min && (s.big_k - 1.0 - golden).abs() < 1e-9 {
        println!("{sym} − 1 = golden ratio");
    }
}

#[derive(Serialize)]
struct ValueRow {
    kind: &'static str,
    c: f64,
    x: f64,
    s_or_i: f64,
    y: f64,
    v: f64,
    reference: Option<f64>,
    deviation: Option<f64>,
}

/// Relative distance from `k*` within which a point counts as on the boundary.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Default grid: `x = 1` and `y = j k*/10`, `j = 0..9`, plus the boundary.
fn default_points(direction: Direction, k_star: f64) -> Vec<[f64; 2]> {
    let sign = match direction {
        Direction::Max => 1.0,
        Direction::Min => -1.0,
    };
    (0..=10)
        .map(|j| [1.0, (sign * k_star * j as f64 / 10.0).exp()])
        .collect()
}

pub fn value(ctx: &Context) -> CliResult<()> {
    let p = ctx.problem()?;
    let vf = ValueFunction::new(p)?;
    let points = ctx
        .config
        .value
        .points
        .clone()
        .unwrap_or_else(|| default_points(p.direction, vf.k_star()));
    let closed = has_closed_form(p);
    let mut rows = Vec::new();
    let (mut worst_closed, mut worst_scaled) = (0.0f64, 0.0f64);
    for [x, e] in points {
        let q = ValueQuery::new(p.direction, x, e)?;
        let v = vf.value(&q)?;
        // `log(s/x)` cannot land exactly on `k*`, so allow for rounding
        let (kind, reference) = if q.y() >= vf.k_star() * (1.0 - BOUNDARY_SLACK) {
            ("boundary", Some(0.0))
        } else if closed {
            ("grid", Some(v_bm_closed_form(p, x, e)?))
        } else {
            ("grid", None)
        };
        let deviation = reference.map(|r| if kind == "boundary" { (v - r).abs() } else { relative_gap(v, r) });
        if kind == "grid" {
            worst_closed = worst_closed.max(deviation.unwrap_or(0.0));
        }
        rows.push(ValueRow {
            kind,
            c: 1.0,
            x,
            s_or_i: e,
            y: q.y(),
            v,
            reference,
            deviation,
        });
        for c in [0.5, 2.0, 10.0] {
            let scaled = vf.value(&ValueQuery::new(p.direction, c * x, c * e)?)?;
            let want = c.powf(p.alpha) * v;
            let gap = relative_gap(scaled, want);
            worst_scaled = worst_scaled.max(gap);
            rows.push(ValueRow {
                kind: "homogeneity",
                c,
                x: c * x,
                s_or_i: c * e,
                y: q.y(),
                v: scaled,
                reference: Some(want),
                deviation: Some(gap),
            });
        }
    }
    if closed {
        eprintln!("max relative deviation from closed form: {worst_closed:.3e}");
    }
    eprintln!("max relative homogeneity deviation: {worst_scaled:.3e}");
    write_rows(ctx.out().as_deref(), ctx.format(), &ctx.meta("value", None), &rows)
}

#[derive(Serialize)]
struct SweepOut {
    #[serde(rename = "K")]
    big_k: f64,
    mean: f64,
    stderr: f64,
    n: usize,
    truncation_rate: f64,
}

fn sweep_grid(ctx: &Context, p: &PredictionProblem) -> CliResult<Vec<f64>> {
    if let Some(g) = &ctx.config.sweep.grid {
        return Ok(g.clone());
    }
    let factors = ctx
        .config
        .sweep
        .factors
        .clone()
        .unwrap_or_else(|| vec![0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3]);
    let s = solve_kstar(p)?;
    Ok(factors
        .iter()
        .map(|f| match p.direction {
            Direction::Max => (f * s.big_k).min(1.0),
            Direction::Min => (f * s.big_k).max(1.0),
        })
        .collect())
}

pub fn sweep(ctx: &Context) -> CliResult<()> {
    let p = ctx.problem()?;
    let grid = sweep_grid(ctx, p)?;
    let cfg = ctx.config.path_config(PathConfig::default())?;
    let report = sweep_k(p, &grid, &cfg)?;
    if let Some(label) = &report.label {
        eprintln!("warning: {label}");
    }
    eprintln!(
        "argmin K = {} over {} paths, truncation rate {:.4}",
        report.rows[report.argmin()].big_k,
        report.n_paths,
        report.truncation_rate
    );
    let rows: Vec<SweepOut> = report
        .rows
        .iter()
        .map(|r| SweepOut {
            big_k: r.big_k,
            mean: r.mean,
            stderr: r.stderr,
            n: r.n,
            truncation_rate: r.truncation_rate,
        })
        .collect();
    write_rows(ctx.out().as_deref(), ctx.format(), &ctx.meta("sweep", Some(cfg.seed)), &rows)
}

#[derive(Serialize)]
struct SimulateOut {
    #[serde(rename = "K")]
    big_k: f64,
    mean: f64,
    stderr: f64,
    n: usize,
    truncation_rate: f64,
    theta_mean: Option<f64>,
    theta_stderr: Option<f64>,
    capped: usize,
    label: Option<String>,
}

#[derive(Serialize)]
struct DumpRow {
    path_id: usize,
    theta: Option<f64>,
    tau: f64,
    loss: f64,
}

pub fn simulate(ctx: &Context) -> CliResult<()> {
    let p = ctx.problem()?;
    let big_k = match ctx.config.simulate.big_k {
        Some(k) => k,
        None => solve_kstar(p)?.big_k,
    };
    let dump = ctx.config.simulate.dump.clone();
    let cfg = PathConfig {
        resolve_theta: true,
        keep_paths: dump.is_some(),
        ..ctx.config.path_config(PathConfig::default())?
    };
    let report = sweep_k(p, &[big_k], &cfg)?;
    let row = &report.rows[0];
    let out = SimulateOut {
        big_k,
        mean: row.mean,
        stderr: row.stderr,
        n: row.n,
        truncation_rate: row.truncation_rate,
        theta_mean: report.theta.map(|t| t.mean),
        theta_stderr: report.theta.map(|t| t.stderr),
        capped: report.capped,
        label: report.label.clone(),
    };
    let meta = ctx.meta("simulate", Some(cfg.seed));
    if let Some(path) = dump {
        let rows: Vec<DumpRow> = report
            .paths
            .iter()
            .map(|r| DumpRow {
                path_id: r.path_id,
                theta: r.theta,
                tau: r.taus[0],
                loss: r.losses[0],
            })
            .collect();
        write_rows(Some(&path), Format::Csv, &meta, &rows)?;
    }
    write_rows(ctx.out().as_deref(), ctx.format(), &meta, &[out])
}

pub fn validate(ctx: &Context) -> CliResult<()> {
    let problems: Vec<(String, PredictionProblem)> = match (&ctx.problem, &ctx.config.preset) {
        (Some(p), Some(name)) => vec![(name.clone(), *p)],
        (Some(p), None) => vec![("config".to_string(), *p)],
        (None, _) => pssmp::presets::PRESET_NAMES
            .iter()
            .map(|n| Ok((n.to_string(), pssmp::preset(n)?)))
            .collect::<CliResult<_>>()?,
    };
    let defaults = PathConfig {
        dt: 1e-3,
        n_paths: 100_000,
        ..PathConfig::default()
    };
    let cfg = ctx.config.path_config(defaults)?;
    let mut card = Scorecard::default();
    for (name, p) in &problems {
        suite::run(name, p, &cfg, ctx.fast, &mut card);
    }
    let count = |status: &str| card.checks.iter().filter(|c| c.status == status).count();
    let failed = count("FAIL");
    println!("{} passed, {failed} failed, {} skipped", count("PASS"), count("SKIP"));
    if let Some(path) = ctx.out() {
        write_rows(Some(&path), ctx.format(), &ctx.meta("validate", Some(cfg.seed)), &card.checks)?;
    }
    if card.checks.iter().any(|c| c.status == "FAIL" && c.name == "gate") {
        Err(CliError::Gate("class gate rejected at least one problem".into()))
    } else if failed > 0 {
        Err(CliError::Numeric(format!("{failed} validation checks failed")))
    } else {
        Ok(())
    }
}
