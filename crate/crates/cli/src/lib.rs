//! Command-line front end for `carvesim`.
//!
//! ```text
//! carvesim <command> [--config FILE] [--format csv|json] [--output PATH] [key=value ...]
//! ```
//!
//! Settings come from built-in defaults, then the config file, then the
//! `key=value` arguments and flags.

pub mod config;
pub mod emit;
pub mod error;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

pub use config::{Command, Format, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "carvesim", version, about = "Cavity state-carving simulator")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Config file with one key=value per line.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(short, long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output if omitted or "-".
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Settings such as cooperativity=34 or axis1=cooperativity:10:200:191.
    #[arg(value_name = "KEY=VALUE")]
    settings: Vec<String>,
}

/// Resolves defaults, config file and command-line settings.
fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::defaults(cli.command);
    if let Some(path) = &cli.config {
        cfg.load_file(path)?;
    }
    for s in &cli.settings {
        cfg.set_pair(s)?;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(o) = &cli.output {
        cfg.output = (o.as_os_str() != "-").then(|| o.clone());
    }
    Ok(cfg)
}

/// Runs the configured command and writes its table.
pub fn dispatch(cfg: &RunConfig) -> Result<(), CliError> {
    let table = run::execute(cfg)?;
    let mut echo = vec![("command".to_string(), cfg.command.name().to_string())];
    echo.extend(cfg.echo());
    let text = emit::render(&table, &echo, cfg.format)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match resolve(&cli).and_then(|cfg| dispatch(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("carvesim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
