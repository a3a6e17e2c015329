mod commands;
mod config;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("output error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl From<qshutter::Error> for CliError {
    fn from(e: qshutter::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qshutter", version, about = "Transient tunneling of a released wave through a rectangular barrier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout, or output.path from the configuration).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Pole-table cache file, reused when its header matches.
    #[arg(long, global = true)]
    poles_cache: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the transmission-amplitude pole table.
    Poles,
    /// Density |Ψ(x_obs, t)|² over the configured time grid.
    Density,
    /// Peak time, transmission split and frequency diagnostics.
    Diagnose,
    /// Cross-check the expansion against the independent oracles.
    Verify,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let setup = RunConfig::load(path)?.validate()?;
    let format = cli.format.or(setup.output.format);
    let output = cli.output.clone().or_else(|| setup.output.path.clone());
    let cache = cli.poles_cache.as_deref();
    let text = match cli.command {
        Command::Poles => {
            // Without an explicit cache the output file doubles as one.
            let cache = cache.or(output.as_deref());
            commands::poles(&setup, cache, format.unwrap_or(Format::Json))?
        }
        Command::Density => commands::density(&setup, cache, format.unwrap_or(Format::Csv))?,
        Command::Diagnose => commands::diagnose(&setup, cache, format.unwrap_or(Format::Json))?,
        Command::Verify => {
            let table = commands::pole_table(&setup, cache)?;
            let checks = verify::run(&setup, &table)?;
            let mut text = String::new();
            for c in &checks {
                text.push_str(&c.line());
                text.push('\n');
            }
            emit(output.as_deref(), &text)?;
            let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.line()).collect();
            if !failed.is_empty() {
                return Err(CliError::Verification(failed.join("; ")));
            }
            return Ok(());
        }
    };
    emit(output.as_deref(), &text)
}

fn emit(path: Option<&std::path::Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qshutter: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
