use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::chain::MeasurementChain;
use super::check_names as names;
use super::report::CheckResult;
use super::spec::ExperimentSpec;
use crate::dynamics::UnitaryOp;
use crate::{Error, Result, Role, StateVector, SubsystemLayout};

fn unit(n: usize, j: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0)).collect()
}

/// Each version, evolved inside the full superposition, matches the same
/// version evolved alone (coefficients `a(j) = 1`, others 0).
pub fn coefficient_independence_check(spec: &ExperimentSpec) -> Result<CheckResult> {
    let chain = MeasurementChain::new(spec)?;
    let versions = (0..spec.n_versions).map(|j| chain.version_state(j)).collect::<Result<Vec<_>>>()?;
    independence(&chain, spec, &versions, true)
}

/// As [`coefficient_independence_check`], for caller-supplied version
/// states on the chain layout. They need not be orthogonal.
pub fn coefficient_independence_with_versions(spec: &ExperimentSpec, versions: &[StateVector]) -> Result<CheckResult> {
    let chain = MeasurementChain::new(spec)?;
    independence(&chain, spec, versions, false)
}

fn independence(chain: &MeasurementChain, spec: &ExperimentSpec, versions: &[StateVector], by_path: bool) -> Result<CheckResult> {
    let tol = spec.tolerance;
    let a = &spec.coefficients;
    let full = chain.evolve(&chain.prepare_from(a, versions)?)?;

    let mut residual: f64 = 0.0;
    let mut skipped = Vec::new();
    for (j, aj) in a.iter().enumerate() {
        if aj.norm_sqr() <= tol * tol {
            skipped.push(j + 1);
            continue;
        }
        let standalone = chain.evolve(&chain.prepare_from(&unit(a.len(), j), versions)?)?;

        // route 1: full run minus the run with version j absent
        let mut others = a.clone();
        others[j] = Complex64::new(0.0, 0.0);
        let mut extracted = full.clone();
        extracted.add_scaled(Complex64::new(-1.0, 0.0), &chain.evolve(&chain.prepare_from(&others, versions)?)?)?;
        residual = residual.max(extracted.scaled(aj.inv()).distance(&standalone)?);

        // route 2: project the full run onto path j
        if by_path {
            let component = chain.version_component(&full, j);
            residual = residual.max(component.scaled(aj.inv()).distance(&standalone)?);
        }
    }
    let check = CheckResult::measured(names::COEFFICIENT_INDEPENDENCE, residual, tol);
    Ok(if skipped.is_empty() {
        check
    } else {
        check.with_note(format!("skipped zero-coefficient versions {skipped:?}"))
    })
}

/// Applies `perturbation` to the post-detection state before perception and
/// checks that the version-1 component of the final state is unchanged.
/// The perturbation must act as the identity on every basis state with the
/// particle on path 1.
pub fn no_signaling_check(spec: &ExperimentSpec, perturbation: &UnitaryOp) -> Result<CheckResult> {
    let chain = MeasurementChain::new(spec)?;
    let layout = chain.layout();
    let n = layout.total_dimension();
    if perturbation.dimension() != n {
        return Err(Error::DimensionMismatch { expected: n, found: perturbation.dimension() });
    }
    let path = chain.path_register();
    let mut leakage: f64 = 0.0;
    for i in (0..n).filter(|&i| layout.digit(i, path) == 0) {
        let col = perturbation.column(i);
        let off: f64 = col.iter().filter(|(r, _)| *r != i).map(|(_, v)| v.norm_sqr()).sum();
        let diag = col.iter().filter(|(r, _)| *r == i).map(|(_, v)| *v).sum::<Complex64>();
        leakage = leakage.max(libm::sqrt(off + (diag - Complex64::new(1.0, 0.0)).norm_sqr()));
    }
    if leakage > spec.tolerance {
        return Err(Error::InvalidPerturbation { leakage });
    }

    let detected = chain.detect(&chain.prepare(&spec.coefficients)?)?;
    let reference = chain.perceive(&detected)?;
    let disturbed = chain.perceive(&perturbation.apply(&detected)?)?;
    let residual = chain
        .version_component(&reference, 0)
        .distance(&chain.version_component(&disturbed, 0))?;
    Ok(CheckResult::measured(names::NO_SIGNALING, residual, spec.tolerance)
        .with_note(String::from(perturbation.provenance())))
}

/// Weight on basis states where two observers hold different messages.
pub fn multi_observer_agreement(spec: &ExperimentSpec) -> Result<CheckResult> {
    let weight_tol = spec.tolerance * spec.tolerance;
    if spec.observers < 2 {
        spec.validate()?;
        return Ok(CheckResult::skipped(names::MULTI_OBSERVER_AGREEMENT, weight_tol, "single observer"));
    }
    let chain = MeasurementChain::new(spec)?;
    let final_state = chain.evolve(&chain.prepare(&spec.coefficients)?)?;
    Ok(CheckResult::measured(
        names::MULTI_OBSERVER_AGREEMENT,
        chain.disagreement_weight(&final_state),
        weight_tol,
    ))
}

fn path_position(layout: &SubsystemLayout) -> Result<usize> {
    layout
        .positions_with_role(Role::ParticlePath)
        .first()
        .copied()
        .ok_or_else(|| Error::MissingRegister("a particle-path register".into()))
}

/// Multiplies every basis state with the particle on path `version` by
/// `phase`.
pub fn version_phase_perturbation(layout: &SubsystemLayout, version: usize, phase: Complex64) -> Result<UnitaryOp> {
    let path = path_position(layout)?;
    let n = layout.total_dimension();
    let phases = (0..n)
        .map(|i| if layout.digit(i, path) == version { phase } else { Complex64::new(1.0, 0.0) })
        .collect();
    UnitaryOp::permutation((0..n).collect(), Some(phases), format!("phase[version {}]", version + 1))
}

/// Toggles every detector on basis states with the particle on path
/// `version`.
pub fn version_detector_flip(layout: &SubsystemLayout, version: usize) -> Result<UnitaryOp> {
    let path = path_position(layout)?;
    let detectors = layout.positions_with_role(Role::Detector);
    let targets = (0..layout.total_dimension())
        .map(|i| {
            if layout.digit(i, path) != version {
                return i;
            }
            detectors.iter().fold(i, |idx, &d| match layout.digit(idx, d) {
                0 => layout.with_digit(idx, d, 1),
                1 => layout.with_digit(idx, d, 0),
                _ => idx,
            })
        })
        .collect();
    UnitaryOp::permutation(targets, None, format!("detector-flip[version {}]", version + 1))
}
