//! Config files, sweeps and reports for [`branchsim_core`].
//!
//! The `branchsim` binary is a thin layer over [`execute`].

pub mod config;
pub mod report;
pub mod runner;

use std::path::PathBuf;

pub use config::{parse_config, parse_config_str, Config, ConfigError, Format};
pub use runner::{run, RunError, RunOutcome};

/// Process exit statuses.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const CAPACITY: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(RunError::Capacity(_)) => exit::CAPACITY,
            _ => exit::USAGE,
        }
    }
}

/// Command-line settings that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub checks: Vec<String>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub negative_control: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut Config) -> Result<(), ConfigError> {
        if !self.checks.is_empty() {
            config::check_filter(config.experiment, &self.checks).map_err(|message| ConfigError {
                key: "--check".into(),
                line: None,
                message,
            })?;
            config.checks = Some(self.checks.clone());
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError { key: "--tolerance".into(), line: None, message: format!("must be positive, got {t}") });
            }
            config.tolerance = t;
        }
        if let Some(format) = self.format {
            config.output.format = format;
        }
        if let Some(out) = &self.out {
            config.output.path = Some(out.clone());
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        config.negative_control |= self.negative_control;
        Ok(())
    }
}

/// Result of [`execute`]: the rendered report and the exit status it implies.
#[derive(Debug)]
pub struct Execution {
    pub outcome: RunOutcome,
    pub rendered: String,
    pub exit_code: i32,
}

/// Runs a config and renders the report in the configured format. Writes it
/// to the configured path when there is one.
pub fn execute(config: &Config) -> Result<Execution, CliError> {
    let outcome = run(config)?;
    let rendered = match config.output.format {
        Format::Json => report::to_json(config, &outcome),
        Format::Text => report::to_text(config, &outcome),
    };
    if let Some(path) = &config.output.path {
        std::fs::write(path, &rendered).map_err(|source| CliError::Write { path: path.clone(), source })?;
    }
    let exit_code = if outcome.all_passed() { exit::PASS } else { exit::CHECK_FAILURE };
    Ok(Execution { outcome, rendered, exit_code })
}
