//! `guenterlab`: estimate, verify and inspect the registered inequalities.

mod config;
mod error;
mod report;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use guenterlab::geometry::ShapeSpec;
use guenterlab::spectra::InequalityId;

use config::{ExperimentConfig, Overrides};
use error::{CliError, ConfigError};
use report::{Header, Report};
use run::Mode;

#[derive(Debug, Parser)]
#[command(
    name = "guenterlab",
    version,
    about = "Constants of Poincare, Friedrichs and Korn inequalities on discrete carriers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Suite seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Refinement levels; overrides the config.
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Only errors and the failing check go to the terminal.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Constants, kernel checks and verification suites.
    Run,
    /// Constants across refinement levels.
    Estimate,
    /// Suites against configured (or estimated) constants at the finest level.
    Verify,
    /// Null spaces of deformation forms and unique continuation.
    Kernel,
    /// Re-render a stored report.json.
    Report { path: PathBuf },
    /// Registered shapes and inequality ids.
    List,
}

fn list() -> String {
    let mut out = String::from("shapes\n");
    for name in ShapeSpec::NAMES {
        let spec = ShapeSpec::by_name(name).expect("registered");
        out.push_str(&format!("  {name:<10} {}\n", serde_json::to_string(&spec).unwrap()));
    }
    out.push_str("\ninequalities\n");
    for id in InequalityId::all() {
        let mut tags = vec![format!("{:?}", id.carrier_class())];
        if id.needs_region() {
            tags.push("region".into());
        }
        if id.uses_def() {
            tags.push("kernel".into());
        }
        if id.is_sup() {
            tags.push("sup".into());
        }
        out.push_str(&format!("  {:<14} {:<32} {}\n", id.name(), tags.join(","), id.description()));
    }
    out
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("GUENTERLAB_THREADS") {
        let n = v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Config(ConfigError {
                file: None,
                line: None,
                field: Some("GUENTERLAB_THREADS".into()),
                message: format!("expected a positive integer, found `{v}`"),
            })
        })?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build().expect("thread pool"))
}

fn experiment(cli: &Cli, mode: Mode) -> Result<Report, CliError> {
    let Some(path) = &cli.config else {
        return Err(CliError::Config(ConfigError {
            file: None,
            line: None,
            field: Some("--config".into()),
            message: "required".into(),
        }));
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let overrides = Overrides { seed: cli.seed, levels: cli.levels, out: cli.out.clone() };
    let cfg = ExperimentConfig::parse(&text, &overrides)
        .map_err(|e| CliError::Config(ConfigError { file: Some(path.clone()), ..e }))?;
    let experiments = thread_pool()?.install(|| run::run_experiment(&cfg, mode))?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let header = Header {
        tool: "guenterlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: mode.name().into(),
        timestamp,
        config: cfg.clone(),
    };
    let report = Report::new(header, experiments);
    report::write_outputs(&report, &cfg.out)?;
    Ok(report)
}

/// Prints to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn finish(report: &Report, quiet: bool) -> ExitCode {
    if !quiet {
        emit(&report::render(report));
    }
    match &report.first_failure {
        None => ExitCode::SUCCESS,
        Some(check) => {
            eprintln!("FAIL {check}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List => {
            emit(&list());
            return ExitCode::SUCCESS;
        }
        Command::Report { path } => Report::read(path).and_then(|r| {
            if let Some(dir) = &cli.out {
                report::write_tables(&r, dir)?;
            }
            Ok(r)
        }),
        Command::Run => experiment(&cli, Mode::Run),
        Command::Estimate => experiment(&cli, Mode::Estimate),
        Command::Verify => experiment(&cli, Mode::Verify),
        Command::Kernel => experiment(&cli, Mode::Kernel),
    };
    match result {
        Ok(report) => finish(&report, cli.quiet),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
