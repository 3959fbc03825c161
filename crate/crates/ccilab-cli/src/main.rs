//! `ccilab`: batch runner for the interferometer scenarios.
//!
//! Exit codes: 0 ok, 2 config or usage error, 3 input-file error,
//! 4 verification failure (outputs are still written).

mod config;
mod output;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig};
use output::Format;
use scenarios::{Ctx, Run, RunError};

const EXIT_CONFIG: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ccilab", version, about = "Coherent control interferometer scenarios: CSV tables and SVG plots")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `ccilab-out`, or `out` from the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random instances; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replaces the step of every start/stop/step grid.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
enum Command {
    /// Complementarity metrics and conditioned contrasts over photon statistics and phase.
    Erasure,
    /// Displaced threshold detection: norm sweep, analytic optimum, grid search.
    Threshold,
    /// CHSH values for the erasure and delayed-choice settings.
    Bell,
    /// Alkali open and closed configuration checks from radial parameters.
    Alkali {
        /// Radial-parameter TOML; overrides the config, default is the bundled sample.
        #[arg(long)]
        radial: Option<PathBuf>,
        /// Overrides `alkali.geometry` from the config.
        #[arg(long, value_enum)]
        geometry: Option<config::GeometryChoice>,
    },
    /// Nonlinear-response cross term against the relative phase.
    Response,
    /// Scenario named by `scenario` in the config.
    Run,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Erasure => "erasure",
            Command::Threshold => "threshold",
            Command::Bell => "bell",
            Command::Alkali { .. } => "alkali",
            Command::Response => "response",
            Command::Run => "run",
        }
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("ccilab: {msg}");
    ExitCode::from(code)
}

fn config_exit(e: &ConfigError) -> u8 {
    match e {
        ConfigError::Invalid(_) => EXIT_CONFIG,
        ConfigError::Input(_) => EXIT_INPUT,
    }
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("CCILAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::Invalid(format!("CCILAB_THREADS = '{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::Invalid(format!("thread pool: {e}")))
}

fn resolve_command(cli_cmd: Command, cfg: &RunConfig) -> Result<Command, ConfigError> {
    let from_cfg = match cfg.scenario.as_deref() {
        None => None,
        Some("erasure") => Some(Command::Erasure),
        Some("threshold") => Some(Command::Threshold),
        Some("bell") => Some(Command::Bell),
        Some("alkali") => Some(Command::Alkali { radial: None, geometry: None }),
        Some("response") => Some(Command::Response),
        Some(other) => return Err(ConfigError::Invalid(format!("unknown scenario '{other}'"))),
    };
    match (cli_cmd, from_cfg) {
        (Command::Run, Some(c)) => Ok(c),
        (Command::Run, None) => Err(ConfigError::Invalid("'run' needs scenario = \"...\" in the config".into())),
        (c, Some(f)) if f.name() != c.name() => {
            Err(ConfigError::Invalid(format!("config is for scenario '{}', not '{}'", f.name(), c.name())))
        }
        (c, _) => Ok(c),
    }
}

fn execute(cmd: Command, ctx: &Ctx) -> Result<Run, RunError> {
    match cmd {
        Command::Erasure => scenarios::erasure(ctx),
        Command::Threshold => scenarios::threshold(ctx),
        Command::Bell => scenarios::bell(ctx),
        Command::Response => scenarios::response(ctx),
        Command::Alkali { radial, geometry } => {
            let mut cfg = ctx.cfg.clone();
            if let Some(g) = geometry {
                cfg.alkali.geometry = g;
            }
            let ctx = &Ctx { cfg: &cfg, seed: ctx.seed, grid_step: ctx.grid_step };
            let path = radial.or_else(|| ctx.cfg.alkali.radial.as_ref().map(|p| ctx.cfg.resolve(p)));
            match path {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| ConfigError::Input(format!("{}: {e}", p.display())))?;
                    scenarios::alkali(ctx, &text, &p.display().to_string())
                }
                None => scenarios::alkali(ctx, scenarios::SAMPLE_RADIAL, "bundled sample"),
            }
        }
        Command::Run => unreachable!("resolved before dispatch"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        return fail(EXIT_CONFIG, e);
    }
    if let Some(s) = cli.grid_step {
        if !(s.is_finite() && s > 0.0) {
            return fail(EXIT_CONFIG, format!("--grid-step {s} must be positive"));
        }
    }
    let cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => return fail(config_exit(&e), e),
        },
        None => RunConfig::default(),
    };
    let cmd = match resolve_command(cli.command.clone(), &cfg) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|p| cfg.resolve(p)))
        .unwrap_or_else(|| PathBuf::from("ccilab-out"));
    let ctx = Ctx { cfg: &cfg, seed: cli.seed.or(cfg.seed).unwrap_or(0), grid_step: cli.grid_step };

    let run = match execute(cmd, &ctx) {
        Ok(r) => r,
        Err(RunError::Config(e)) => return fail(config_exit(&e), e),
        Err(e @ RunError::Model(ccilab::Error::Parse(_))) => return fail(EXIT_INPUT, e),
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    match run.outputs.write(&out, cli.format) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => return fail(EXIT_INPUT, format!("writing to {}: {e}", out.display())),
    }
    for s in &run.summary {
        println!("{s}");
    }
    if run.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &run.failures {
            eprintln!("FAIL {f}");
        }
        fail(EXIT_VERIFY, format!("{} verification failure(s)", run.failures.len()))
    }
}
