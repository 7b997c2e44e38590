//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use atslab_core::AtsParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Parameter block of the config file; missing entries fall back to the
/// β = 1, δ = −1/2 reference set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub k_bar: Option<f64>,
    pub eta_bar: Option<f64>,
    pub sigma_bar: Option<f64>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub params: ParamsFile,
    pub t: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub k_grid: Option<Vec<f64>>,
    pub se_grid: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub fd_step: Option<f64>,
    pub mc_paths: Option<usize>,
}

/// Values given on the command line; these win over the file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k_bar: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta_bar: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma_bar: Option<f64>,
    /// Maturities, comma separated.
    #[arg(long = "t", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Option<Vec<f64>>,
    /// Moneyness degrees y = ln(K/F)/√t, comma separated.
    #[arg(long = "y", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to ATSLAB_THREADS, then all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: AtsParams,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub alphas: Vec<f64>,
    pub k_grid: Vec<f64>,
    pub se_grid: Vec<f64>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub fd_step: Option<f64>,
    pub mc_paths: usize,
}

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_MC_PATHS: usize = 1_000_000;

/// Evenly spaced grid including both ends.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Default grid of the surface axes, 31 points over [0.05, 3].
pub fn surface_axis() -> Vec<f64> {
    linspace(0.05, 3.0, 31)
}

/// Default maturity list for a subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDefault {
    Smile,
    Skew,
}

impl RunConfig {
    pub fn resolve(ov: &Overrides, times: TimeDefault) -> Result<Self, CliError> {
        let file = match &ov.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let fp = &file.params;
        let params = AtsParams::new(
            ov.alpha.or(fp.alpha).unwrap_or(0.0),
            ov.beta.or(fp.beta).unwrap_or(1.0),
            ov.delta.or(fp.delta).unwrap_or(-0.5),
            ov.k_bar.or(fp.k_bar).unwrap_or(1.0),
            ov.eta_bar.or(fp.eta_bar).unwrap_or(1.0),
            ov.sigma_bar.or(fp.sigma_bar).unwrap_or(0.2),
        );
        let default_t = match times {
            TimeDefault::Smile => vec![0.01, 0.1, 1.0],
            TimeDefault::Skew => (1..=6).rev().map(|k| 10f64.powi(-k)).collect(),
        };
        let threads = ov
            .threads
            .or(file.threads)
            .or_else(|| std::env::var("ATSLAB_THREADS").ok().and_then(|v| v.trim().parse().ok()));
        let cfg = RunConfig {
            params,
            t: ov.t.clone().or(file.t).unwrap_or(default_t),
            y: ov.y.clone().or(file.y).unwrap_or_else(|| linspace(-2.0, 2.0, 9)),
            alphas: file.alphas.unwrap_or_else(|| vec![0.0, 0.25, 0.5, 0.75]),
            k_grid: file.k_grid.unwrap_or_else(surface_axis),
            se_grid: file.se_grid.unwrap_or_else(surface_axis),
            seed: ov.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            format: ov.format.or(file.format).unwrap_or_default(),
            out: ov.out.clone().or(file.out),
            threads,
            fd_step: file.fd_step,
            mc_paths: file.mc_paths.unwrap_or(DEFAULT_MC_PATHS),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let p = &self.params;
        for (name, v) in [
            ("alpha", p.alpha),
            ("beta", p.beta),
            ("delta", p.delta),
            ("k_bar", p.k_bar),
            ("eta_bar", p.eta_bar),
            ("sigma_bar", p.sigma_bar),
        ] {
            if !v.is_finite() {
                return Err(CliError::Config(format!("{name} must be finite, got {v}")));
            }
        }
        increasing("t", &self.t)?;
        increasing("y", &self.y)?;
        increasing("alphas", &self.alphas)?;
        increasing("k_grid", &self.k_grid)?;
        increasing("se_grid", &self.se_grid)?;
        positive("t", &self.t)?;
        positive("k_grid", &self.k_grid)?;
        positive("se_grid", &self.se_grid)?;
        if self.alphas.iter().any(|a| !(0.0..1.0).contains(a)) {
            return Err(CliError::Config("alphas must lie in [0, 1)".into()));
        }
        if let Some(h) = self.fd_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Config(format!("fd_step must be positive, got {h}")));
            }
        }
        if self.mc_paths == 0 {
            return Err(CliError::Config("mc_paths must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn increasing(name: &str, grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Config(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config(format!("{name} grid has a non-finite entry")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn positive(name: &str, grid: &[f64]) -> Result<(), CliError> {
    if grid.iter().any(|&v| v <= 0.0) {
        return Err(CliError::Config(format!("{name} grid must be positive")));
    }
    Ok(())
}
