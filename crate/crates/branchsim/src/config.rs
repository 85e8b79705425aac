//! Experiment configuration files.
//!
//! A config is a TOML document:
//!
//! ```toml
//! experiment = "appendix_rotation"   # stern_gerlach | generalized | appendix_rotation
//! n_versions = 2
//! coefficients = [[0.6, 0.0], [0.8, 0.0]]   # [re, im] per version
//! observers = 1
//! photon_model = false
//! thetas = { count = 64, start = 0, end = "2pi" }
//! seed = 7
//! tolerance = 1e-12
//! checks = ["mixed_record"]
//!
//! [output]
//! path = "report.json"
//! format = "json"                    # json | text
//! ```
//!
//! Leaving out `coefficients` draws `random_draws` (default 1) random unit
//! coefficient vectors from `seed`.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use branchsim_core::experiments::check_names;
use branchsim_core::{Complex64, TOLERANCE};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use toml::Spanned;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SternGerlach,
    Generalized,
    AppendixRotation,
}

impl ExperimentKind {
    /// Check names a run of this kind can report.
    pub fn check_names(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::AppendixRotation => check_names::APPENDIX,
            _ => check_names::CHAIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (expected json or text)")),
        }
    }
}

/// Where the coefficients of each run come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Fixed(Vec<Complex64>),
    Random { draws: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A validated config.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub experiment: ExperimentKind,
    pub n_versions: usize,
    pub coefficients: Coefficients,
    pub observers: usize,
    pub photon_model: bool,
    /// Rotation angles; empty unless the experiment is `appendix_rotation`.
    pub thetas: Vec<f64>,
    pub seed: u64,
    pub tolerance: f64,
    /// Check names to report; `None` keeps all.
    pub checks: Option<Vec<String>>,
    pub output: Output,
    pub negative_control: bool,
}

/// Error with the offending key and, when known, its line in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError { key: key.into(), line, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}, key `{}`: {}", self.key, self.message),
            None => write!(f, "key `{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Spanned<ExperimentKind>,
    n_versions: Option<Spanned<usize>>,
    coefficients: Option<Spanned<Vec<[f64; 2]>>>,
    observers: Option<Spanned<usize>>,
    #[serde(default)]
    photon_model: bool,
    thetas: Option<Spanned<RawThetas>>,
    #[serde(default)]
    seed: u64,
    random_draws: Option<Spanned<usize>>,
    tolerance: Option<Spanned<f64>>,
    checks: Option<Spanned<Vec<String>>>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    #[serde(default)]
    format: Format,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawThetas {
    List(Vec<Angle>),
    Sweep(Sweep),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Sweep {
    count: usize,
    start: Angle,
    end: Angle,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Angle {
    Number(f64),
    Text(String),
}

impl Angle {
    fn radians(&self) -> Result<f64, String> {
        match self {
            Angle::Number(x) => Ok(*x),
            Angle::Text(s) => parse_angle(s),
        }
    }
}

/// Parses `0.5`, `pi`, `-pi`, `2pi`, `2*pi`, `pi/4`, `3pi/2`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || format!("cannot read `{text}` as an angle");
    let Some((factor, rest)) = s.split_once("pi") else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let factor = factor.strip_suffix('*').unwrap_or(factor);
    let factor = match factor {
        "" | "+" => 1.0,
        "-" => -1.0,
        f => f.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match rest {
        "" => 1.0,
        r => r.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).ok_or_else(bad)?,
    };
    let value = factor * PI / divisor;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

pub fn parse_config(path: &Path) -> Result<Config, ConfigError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("<file>", None, format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&source)
}

pub fn parse_config_str(source: &str) -> Result<Config, ConfigError> {
    let raw: RawConfig = toml::from_str(source).map_err(|e| {
        let line = e.span().map(|s| line_of(source, s.start));
        let message = e.message().to_string();
        let key = message
            .split_once("unknown field `")
            .and_then(|(_, rest)| rest.split_once('`'))
            .map(|(k, _)| k.to_string())
            .unwrap_or_else(|| "<document>".into());
        ConfigError::new(&key, line, message)
    })?;
    resolve(raw, source)
}

fn resolve(raw: RawConfig, source: &str) -> Result<Config, ConfigError> {
    let at = |span: std::ops::Range<usize>| Some(line_of(source, span.start));
    let experiment = *raw.experiment.get_ref();

    let tolerance = match &raw.tolerance {
        None => TOLERANCE,
        Some(t) => {
            let v = *t.get_ref();
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::new("tolerance", at(t.span()), format!("must be positive, got {v}")));
            }
            v
        }
    };

    let coefficients = raw.coefficients.as_ref().map(|c| {
        let values: Vec<Complex64> = c.get_ref().iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        (values, c.span())
    });

    let n_versions = match (&raw.n_versions, &coefficients) {
        (Some(n), _) => {
            let v = *n.get_ref();
            if v < 2 {
                return Err(ConfigError::new("n_versions", at(n.span()), format!("must be at least 2, got {v}")));
            }
            if experiment != ExperimentKind::Generalized && v != 2 {
                return Err(ConfigError::new(
                    "n_versions",
                    at(n.span()),
                    format!("{} has two versions, got {v}", kind_name(experiment)),
                ));
            }
            v
        }
        (None, _) if experiment != ExperimentKind::Generalized => 2,
        (None, Some((values, _))) => values.len(),
        (None, None) => {
            return Err(ConfigError::new(
                "n_versions",
                None,
                "generalized experiments need n_versions or coefficients",
            ))
        }
    };

    let coefficients = match coefficients {
        Some((values, span)) => {
            if let Some(d) = &raw.random_draws {
                return Err(ConfigError::new(
                    "random_draws",
                    at(d.span()),
                    "only applies when coefficients are left out",
                ));
            }
            if values.len() != n_versions {
                return Err(ConfigError::new(
                    "coefficients",
                    at(span),
                    format!("{} coefficients for {n_versions} versions", values.len()),
                ));
            }
            if values.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
                return Err(ConfigError::new("coefficients", at(span), "coefficients must be finite"));
            }
            let total: f64 = values.iter().map(|a| a.norm_sqr()).sum();
            if (total - 1.0).abs() > tolerance {
                return Err(ConfigError::new(
                    "coefficients",
                    at(span),
                    format!("squared moduli sum to {total}, expected 1 within {tolerance:e}"),
                ));
            }
            Coefficients::Fixed(values)
        }
        None => {
            let draws = match &raw.random_draws {
                None => 1,
                Some(d) if *d.get_ref() == 0 => {
                    return Err(ConfigError::new("random_draws", at(d.span()), "must be at least 1"))
                }
                Some(d) => *d.get_ref(),
            };
            Coefficients::Random { draws }
        }
    };

    let observers = match &raw.observers {
        None => 1,
        Some(o) if *o.get_ref() == 0 => {
            return Err(ConfigError::new("observers", at(o.span()), "at least one observer is required"))
        }
        Some(o) => *o.get_ref(),
    };

    let thetas = match (&raw.thetas, experiment) {
        (None, ExperimentKind::AppendixRotation) => {
            return Err(ConfigError::new("thetas", None, "appendix_rotation needs rotation angles"))
        }
        (None, _) => Vec::new(),
        (Some(t), ExperimentKind::AppendixRotation) => {
            thetas(t.get_ref()).map_err(|m| ConfigError::new("thetas", at(t.span()), m))?
        }
        (Some(t), kind) => {
            return Err(ConfigError::new(
                "thetas",
                at(t.span()),
                format!("only applies to appendix_rotation, not {}", kind_name(kind)),
            ))
        }
    };

    let checks = match &raw.checks {
        None => None,
        Some(c) => {
            check_filter(experiment, c.get_ref()).map_err(|m| ConfigError::new("checks", at(c.span()), m))?;
            Some(c.get_ref().clone())
        }
    };

    Ok(Config {
        experiment,
        n_versions,
        coefficients,
        observers,
        photon_model: raw.photon_model,
        thetas,
        seed: raw.seed,
        tolerance,
        checks,
        output: Output { path: raw.output.path, format: raw.output.format },
        negative_control: false,
    })
}

fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::SternGerlach => "stern_gerlach",
        ExperimentKind::Generalized => "generalized",
        ExperimentKind::AppendixRotation => "appendix_rotation",
    }
}

fn thetas(raw: &RawThetas) -> Result<Vec<f64>, String> {
    let values = match raw {
        RawThetas::List(list) => {
            if list.is_empty() {
                return Err("empty angle list".into());
            }
            list.iter().map(Angle::radians).collect::<Result<Vec<_>, _>>()?
        }
        // half-open grid: start + (end - start) k / count, k < count
        RawThetas::Sweep(Sweep { count, start, end }) => {
            if *count == 0 {
                return Err("sweep count must be at least 1".into());
            }
            let (a, b) = (start.radians()?, end.radians()?);
            (0..*count).map(|k| a + (b - a) * k as f64 / *count as f64).collect()
        }
    };
    if values.iter().any(|t| !t.is_finite()) {
        return Err("angles must be finite".into());
    }
    Ok(values)
}

/// Rejects names the experiment never reports.
pub fn check_filter(kind: ExperimentKind, names: &[String]) -> Result<(), String> {
    let known = kind.check_names();
    match names.iter().find(|n| !known.contains(&n.as_str())) {
        Some(bad) => Err(format!(
            "unknown check `{bad}` for {} (known: {})",
            kind_name(kind),
            known.join(", ")
        )),
        None => Ok(()),
    }
}

impl Config {
    pub fn experiment_name(&self) -> &'static str {
        kind_name(self.experiment)
    }

    /// Coefficient vectors to run, in order. Random draws are Gaussian
    /// vectors from a ChaCha8 stream seeded with `seed`, normalized.
    pub fn coefficient_sets(&self) -> Vec<Vec<Complex64>> {
        match &self.coefficients {
            Coefficients::Fixed(values) => vec![values.clone()],
            Coefficients::Random { draws } => random_coefficients(self.n_versions, *draws, self.seed),
        }
    }
}

pub fn random_coefficients(n_versions: usize, draws: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| {
            let raw: Vec<Complex64> = (0..n_versions)
                .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect();
            let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            raw.into_iter().map(|a| a / norm).collect()
        })
        .collect()
}
