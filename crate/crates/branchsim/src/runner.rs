//! Runs the points of a config: one point per coefficient set, times one
//! per angle for rotation sweeps.

use std::time::{Duration, Instant};

use branchsim_core::experiments::{
    check_names, coefficient_independence_check, no_signaling_check, run_appendix_rotation, run_measurement_chain,
    version_detector_flip, version_phase_perturbation, CheckResult, ExperimentSpec, MeasurementChain, RunReport,
};
use branchsim_core::{Complex64, Error};
use rayon::prelude::*;

use crate::config::{Config, ExperimentKind};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("state space too large: {0}")]
    Capacity(Error),
    #[error("point {point}: {source}")]
    Simulation { point: usize, source: Error },
}

impl RunError {
    fn at(point: usize, source: Error) -> Self {
        match source {
            Error::Capacity { .. } => RunError::Capacity(source),
            source => RunError::Simulation { point, source },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Point {
    pub index: usize,
    pub coefficients: Vec<Complex64>,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub point: Point,
    pub report: RunReport,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub points: Vec<PointOutcome>,
    pub elapsed: Duration,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.points.iter().all(|p| p.report.all_passed())
    }
}

pub fn points(config: &Config) -> Vec<Point> {
    let sets = config.coefficient_sets();
    let thetas: Vec<Option<f64>> = match config.experiment {
        ExperimentKind::AppendixRotation => config.thetas.iter().copied().map(Some).collect(),
        _ => vec![None],
    };
    sets.into_iter()
        .flat_map(|coefficients| thetas.iter().map(move |&theta| (coefficients.clone(), theta)))
        .enumerate()
        .map(|(index, (coefficients, theta))| Point { index, coefficients, theta })
        .collect()
}

pub fn spec_for(config: &Config, coefficients: Vec<Complex64>) -> ExperimentSpec {
    ExperimentSpec::new(coefficients)
        .with_observers(config.observers)
        .with_photons(config.photon_model)
        .with_tolerance(config.tolerance)
        .with_negative_control(config.negative_control)
}

/// Phase flip and detector scramble on version 2; reports the worse of the two.
fn no_signaling(spec: &ExperimentSpec) -> Result<CheckResult, Error> {
    let layout = MeasurementChain::new(spec)?.layout().clone();
    let phase = no_signaling_check(spec, &version_phase_perturbation(&layout, 1, Complex64::new(-1.0, 0.0))?)?;
    let flip = no_signaling_check(spec, &version_detector_flip(&layout, 1)?)?;
    let note = format!("{}; {}", phase.note.unwrap_or_default(), flip.note.unwrap_or_default());
    Ok(CheckResult::measured(check_names::NO_SIGNALING, phase.residual.max(flip.residual), spec.tolerance)
        .with_note(note))
}

pub fn run_point(config: &Config, point: &Point) -> Result<RunReport, Error> {
    let spec = spec_for(config, point.coefficients.clone());
    let mut report = match (config.experiment, point.theta) {
        (ExperimentKind::AppendixRotation, Some(theta)) => run_appendix_rotation(&spec, theta)?,
        (ExperimentKind::AppendixRotation, None) => {
            return Err(Error::InvalidSpec("rotation point without an angle".into()))
        }
        _ => {
            let mut report = run_measurement_chain(&spec)?;
            report.add_check(coefficient_independence_check(&spec)?);
            report.add_check(no_signaling(&spec)?);
            report
        }
    };
    if let Some(keep) = &config.checks {
        report.retain_checks(|name| keep.iter().any(|k| k == name));
    }
    Ok(report)
}

/// Runs every point in parallel; results keep point order.
pub fn run(config: &Config) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let results: Vec<Result<PointOutcome, RunError>> = points(config)
        .into_par_iter()
        .map(|point| {
            let t = Instant::now();
            let report = run_point(config, &point).map_err(|e| RunError::at(point.index, e))?;
            Ok(PointOutcome { point, report, elapsed: t.elapsed() })
        })
        .collect();
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(RunOutcome { points, elapsed: start.elapsed() })
}
