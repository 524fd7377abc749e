use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_LAMBDA: f64 = 1.0 / 301.0;
pub const DEFAULT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// Settings shared by every subcommand; each is optional so that a config
/// file can fill what the flags leave out.
#[derive(Debug, Clone, Default, clap::Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Edge ratio λ; accepts fractions such as 1/301
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_real)]
    pub lambda: Option<f64>,
    /// Generations of edges; depth 1 is the single root edge
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Relative convergence tolerance of the solver
    #[arg(long = "tol", global = true, allow_hyphen_values = true, value_parser = parse_real)]
    #[serde(alias = "tol")]
    pub tolerance: Option<f64>,
    /// Worker threads for the solver (1 = serial)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file; most commands print to standard output without one
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl Settings {
    /// `self` wins where set.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            lambda: self.lambda.or(base.lambda),
            depth: self.depth.or(base.depth),
            tolerance: self.tolerance.or(base.tolerance),
            jobs: self.jobs.or(base.jobs),
            output: self.output.or(base.output),
            format: self.format.or(base.format),
        }
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(DEFAULT_LAMBDA)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_TOL)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }
}

/// A decimal or `a/b`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|e| format!("{s}: {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not a finite number"))
    }
}
