use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod suite;

use commands::Context;
use config::{Format, RunConfig};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "pssmp", version, about = "Optimal prediction of the time of the ultimate extremum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named problem: bm-max, bessel3, bessel5, cramer.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo paths.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Euler step of the Brownian component.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Time horizon of the underlying Lévy process.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Skip the Monte Carlo checks of `validate`.
    #[arg(long, global = true)]
    fast: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Optimal threshold.
    Solve,
    /// Value function on a grid, with closed-form and scaling audits.
    Value,
    /// Monte Carlo objective over a grid of thresholds.
    Sweep,
    /// Monte Carlo objective and extremum time at one threshold.
    Simulate,
    /// Run the check suite and print a scorecard.
    Validate,
}

fn context(cli: &Cli) -> CliResult<Context> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(name) = &cli.preset {
        if config.problem.is_some() || config.preset.as_ref().is_some_and(|p| p != name) {
            return Err(CliError::Config("--preset conflicts with the problem in the config file".into()));
        }
        config.preset = Some(name.clone());
    }
    let mc = &mut config.mc;
    mc.seed = cli.seed.or(mc.seed);
    mc.paths = cli.paths.or(mc.paths);
    mc.dt = cli.dt.or(mc.dt);
    mc.horizon = cli.horizon.or(mc.horizon);
    if cli.out.is_some() {
        config.output.path = cli.out.clone();
    }
    if let Some(f) = cli.format {
        config.output.format = f;
    }
    let problem = config.resolve_problem()?;
    Ok(Context {
        config,
        problem,
        fast: cli.fast,
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    let ctx = context(cli)?;
    match cli.command {
        Command::Solve => commands::solve(&ctx),
        Command::Value => commands::value(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Validate => commands::validate(&ctx),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for gate rejections
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
