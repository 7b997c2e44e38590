//! atslab: regime classification, smiles, skew term structures, limit-skew
//! surfaces and a property-check suite for the ATS model.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use config::{Format, Overrides, RunConfig, TimeDefault};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "atslab", version, about = "Short-time smile analytics for the ATS model")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report the short-time regime of the parameter set.
    Classify,
    /// Prices and implied volatilities over the (t, y) grid.
    Smile,
    /// ATM volatility and skew term per maturity.
    Skew,
    /// Short-time skew limit over the (alpha, k_bar, sigma_eta) grid.
    Surface,
    /// Run the property-check suite; exit 3 on any failure.
    Validate,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let times = match cli.command {
        Command::Skew => TimeDefault::Skew,
        _ => TimeDefault::Smile,
    };
    let cfg = RunConfig::resolve(&cli.overrides, times)?;
    if let Some(n) = cfg.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Classify => commands::classify(&cfg),
        Command::Smile => commands::smile(&cfg),
        Command::Skew => commands::skew(&cfg),
        Command::Surface => commands::surface(&cfg),
        Command::Validate => {
            commands::require_admissible(&cfg.params)?;
            let result = validate::run(&cfg);
            let text = match cfg.format {
                Format::Json | Format::Csv => output::render_json(&result)?,
            };
            output::emit(&text, cfg.out.as_deref())?;
            if result.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = result
                    .checks
                    .iter()
                    .filter(|c| c.status == validate::Status::Fail)
                    .map(|c| c.name)
                    .collect();
                Err(CliError::ValidationFailed(failed.join(", ")))
            }
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Errors go to stderr.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("atslab: {e}");
            e.exit_code()
        }
    }
}
