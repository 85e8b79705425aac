//! JSON and text renderings of a run.
//!
//! Everything except the trailing `timings` object is a function of the
//! config and seed alone.

use std::fmt::Write as _;

use branchsim_core::experiments::CheckStatus;
use branchsim_core::Complex64;
use serde::Serialize;

use crate::config::{Coefficients, Config, ExperimentKind};
use crate::runner::{PointOutcome, RunOutcome};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    generator: Generator,
    spec: SpecEcho<'a>,
    layout: Vec<RegisterEcho<'a>>,
    points: Vec<PointJson<'a>>,
    summary: Summary,
    timings: Timings,
}

#[derive(Serialize)]
struct Generator {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct SpecEcho<'a> {
    experiment: ExperimentKind,
    n_versions: usize,
    observers: usize,
    photon_model: bool,
    coefficients: CoefficientEcho,
    thetas: &'a [f64],
    seed: u64,
    tolerance: f64,
    checks: Option<&'a [String]>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    negative_control: bool,
}

#[derive(Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
enum CoefficientEcho {
    Config { values: Vec<[f64; 2]> },
    Random { draws: usize },
}

#[derive(Serialize)]
struct RegisterEcho<'a> {
    name: &'a str,
    dimension: usize,
    role: &'static str,
}

#[derive(Serialize)]
struct PointJson<'a> {
    index: usize,
    theta: Option<f64>,
    experiment: &'a str,
    coefficients: Vec<[f64; 2]>,
    final_state: FinalState,
    branches: Vec<BranchJson<'a>>,
    pruned: Vec<PrunedJson<'a>>,
    checks: Vec<CheckJson<'a>>,
    passed: bool,
}

#[derive(Serialize)]
struct FinalState {
    dimension: usize,
    norm: f64,
    support_size: usize,
    support: Vec<SupportEntry>,
}

#[derive(Serialize)]
struct SupportEntry {
    index: usize,
    labels: Vec<usize>,
    amplitude: [f64; 2],
}

#[derive(Serialize)]
struct BranchJson<'a> {
    label: &'a [usize],
    weight: f64,
    message: &'a str,
}

#[derive(Serialize)]
struct PrunedJson<'a> {
    label: &'a [usize],
    weight: f64,
}

#[derive(Serialize)]
struct CheckJson<'a> {
    name: &'a str,
    status: &'static str,
    residual: f64,
    tolerance: f64,
    note: Option<&'a str>,
}

#[derive(Serialize)]
struct Summary {
    points: usize,
    checks: usize,
    passed: usize,
    failed: usize,
    skipped: usize,
    all_passed: bool,
    failures: Vec<Failure>,
}

#[derive(Serialize)]
struct Failure {
    point: usize,
    check: String,
}

#[derive(Serialize)]
struct Timings {
    total_ms: f64,
    points_ms: Vec<f64>,
}

fn pair(a: Complex64) -> [f64; 2] {
    [a.re, a.im]
}

fn summary(outcome: &RunOutcome) -> Summary {
    let checks = outcome.points.iter().flat_map(|p| p.report.checks().iter().map(move |c| (p.point.index, c)));
    let mut s = Summary {
        points: outcome.points.len(),
        checks: 0,
        passed: 0,
        failed: 0,
        skipped: 0,
        all_passed: outcome.all_passed(),
        failures: Vec::new(),
    };
    for (point, c) in checks {
        s.checks += 1;
        match c.status {
            CheckStatus::Passed => s.passed += 1,
            CheckStatus::Skipped => s.skipped += 1,
            CheckStatus::Failed => {
                s.failed += 1;
                s.failures.push(Failure { point, check: c.name.clone() });
            }
        }
    }
    s
}

fn point_json(p: &PointOutcome) -> PointJson<'_> {
    let r = &p.report;
    PointJson {
        index: p.point.index,
        theta: p.point.theta,
        experiment: &r.experiment,
        coefficients: r.coefficients.iter().copied().map(pair).collect(),
        final_state: FinalState {
            dimension: r.final_state.dimension,
            norm: r.final_state.norm,
            support_size: r.final_state.support_size,
            support: r
                .final_state
                .support
                .iter()
                .map(|(index, labels, a)| SupportEntry { index: *index, labels: labels.clone(), amplitude: pair(*a) })
                .collect(),
        },
        branches: r
            .branches
            .iter()
            .map(|b| BranchJson { label: &b.label, weight: b.weight, message: &b.message })
            .collect(),
        pruned: r.pruned.iter().map(|(label, weight)| PrunedJson { label, weight: *weight }).collect(),
        checks: r
            .checks()
            .iter()
            .map(|c| CheckJson {
                name: &c.name,
                status: c.status.as_str(),
                residual: c.residual,
                tolerance: c.tolerance,
                note: c.note.as_deref(),
            })
            .collect(),
        passed: r.all_passed(),
    }
}

pub fn to_json(config: &Config, outcome: &RunOutcome) -> String {
    let layout = outcome
        .points
        .first()
        .map(|p| {
            p.report
                .layout
                .registers()
                .iter()
                .map(|r| RegisterEcho { name: &r.name, dimension: r.dimension, role: r.role.as_str() })
                .collect()
        })
        .unwrap_or_default();
    let report = Report {
        schema_version: SCHEMA_VERSION,
        generator: Generator { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
        spec: SpecEcho {
            experiment: config.experiment,
            n_versions: config.n_versions,
            observers: config.observers,
            photon_model: config.photon_model,
            coefficients: match &config.coefficients {
                Coefficients::Fixed(values) => CoefficientEcho::Config { values: values.iter().copied().map(pair).collect() },
                Coefficients::Random { draws } => CoefficientEcho::Random { draws: *draws },
            },
            thetas: &config.thetas,
            seed: config.seed,
            tolerance: config.tolerance,
            checks: config.checks.as_deref(),
            negative_control: config.negative_control,
        },
        layout,
        points: outcome.points.iter().map(point_json).collect(),
        summary: summary(outcome),
        timings: Timings {
            total_ms: outcome.elapsed.as_secs_f64() * 1e3,
            points_ms: outcome.points.iter().map(|p| p.elapsed.as_secs_f64() * 1e3).collect(),
        },
    };
    let mut out = serde_json::to_string_pretty(&report).expect("report serializes");
    out.push('\n');
    out
}

/// Left-aligned columns separated by two spaces; the last column is not padded.
fn table(out: &mut String, rows: &[Vec<String>]) {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    for row in rows {
        let mut line = String::from("  ");
        for (c, cell) in row.iter().enumerate() {
            if c + 1 == row.len() {
                line.push_str(cell);
            } else {
                let _ = write!(line, "{cell:<w$}  ", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

fn complex_text(a: Complex64) -> String {
    if a.im == 0.0 {
        format!("{}", a.re)
    } else {
        format!("{}{:+}i", a.re, a.im)
    }
}

pub fn to_text(config: &Config, outcome: &RunOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}  versions={}  observers={}  photons={}  tolerance={:e}  seed={}",
        config.experiment_name(),
        config.n_versions,
        config.observers,
        if config.photon_model { "on" } else { "off" },
        config.tolerance,
        config.seed
    );
    for p in &outcome.points {
        let r = &p.report;
        let coefficients: Vec<String> = r.coefficients.iter().copied().map(complex_text).collect();
        let _ = write!(out, "\npoint {}  a=({})", p.point.index, coefficients.join(", "));
        if let Some(theta) = p.point.theta {
            let _ = write!(out, "  theta={theta}");
        }
        out.push('\n');

        let mut rows = vec![vec!["label".to_string(), "weight".into(), "message".into()]];
        for b in &r.branches {
            let label: Vec<String> = b.label.iter().map(usize::to_string).collect();
            rows.push(vec![label.join(","), format!("{:.12}", b.weight), b.message.clone()]);
        }
        table(&mut out, &rows);
        out.push('\n');

        let mut rows = vec![vec!["check".to_string(), "status".into(), "residual".into(), "tolerance".into()]];
        for c in r.checks() {
            rows.push(vec![
                c.name.clone(),
                c.status.as_str().into(),
                format!("{:.3e}", c.residual),
                format!("{:.1e}", c.tolerance),
            ]);
        }
        table(&mut out, &rows);
    }
    let s = summary(outcome);
    let _ = writeln!(
        out,
        "\n{} points, {} checks: {} passed, {} failed, {} skipped  ({:.1} ms)",
        s.points,
        s.checks,
        s.passed,
        s.failed,
        s.skipped,
        outcome.elapsed.as_secs_f64() * 1e3
    );
    out
}
