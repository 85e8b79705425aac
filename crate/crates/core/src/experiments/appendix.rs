use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::branches::decompose;
use super::chain::MeasurementChain;
use super::check_names as names;
use super::report::{message_text, BranchRow, CheckResult, RunReport, StateSummary};
use super::spec::ExperimentSpec;
use crate::dynamics::{build_basis_rotation, BasisRotation};
use crate::{Error, Result, Role, StateVector};

/// Coordinates of `a1|1:> + a2|2:>` after the rotation by `theta`:
/// `(a1 cos - a2 sin, a2 cos + a1 sin)`.
pub fn primed_coefficients_formula(a1: Complex64, a2: Complex64, theta: f64) -> (Complex64, Complex64) {
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    (a1 * c - a2 * s, a2 * c + a1 * s)
}

/// Labels of the non-observer registers of a basis state.
fn span_labels(state: &StateVector) -> Result<Vec<usize>> {
    let layout = state.layout();
    let index = state
        .amplitudes()
        .iter()
        .position(|a| a.norm_sqr() > 0.5)
        .ok_or_else(|| Error::InvalidSpan("expected a basis state".into()))?;
    Ok(layout
        .decode(index)
        .into_iter()
        .zip(layout.registers())
        .filter(|(_, r)| r.role != Role::Observer)
        .map(|(l, _)| l)
        .collect())
}

/// Observer level populations, one vector per observer.
fn record_populations(chain: &MeasurementChain, state: &StateVector) -> Vec<Vec<f64>> {
    let layout = chain.layout();
    layout
        .positions_with_role(Role::Observer)
        .into_iter()
        .map(|o| {
            let mut pops = alloc::vec![0.0; layout.dimension(o)];
            for (i, a) in state.amplitudes().iter().enumerate() {
                pops[layout.digit(i, o)] += a.norm_sqr();
            }
            pops
        })
        .collect()
}

/// Two-version chain stopped after detection, re-expressed in a basis that
/// mixes the two particle/detector configurations, then perceived.
///
/// Checks: the rotated coordinates follow the closed form; `|1':>|empty>`
/// and `|2':>|empty>` evolve into rotated combinations of the two
/// classical records; no observer ends on any level but `M1`/`M2`; the
/// record populations do not depend on the basis used to write the state.
pub fn run_appendix_rotation(spec: &ExperimentSpec, theta: f64) -> Result<RunReport> {
    if spec.n_versions != 2 {
        return Err(Error::InvalidSpec(format!(
            "the mixed-basis rotation needs two versions, got {}",
            spec.n_versions
        )));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidSpec("rotation angle must be finite".into()));
    }
    let chain = MeasurementChain::new(spec)?;
    let tol = spec.tolerance;
    let (a1, a2) = (spec.coefficients[0], spec.coefficients[1]);
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    let re = |x: f64| Complex64::new(x, 0.0);

    // |1:>|empty>, |2:>|empty>
    let one = chain.detected_version(0)?;
    let two = chain.detected_version(1)?;
    let psi = chain.detect(&chain.prepare(&spec.coefficients)?)?;

    let rotation = build_basis_rotation(
        chain.layout(),
        &BasisRotation::new(theta, span_labels(&one)?, span_labels(&two)?),
    )?;

    // (a) coordinates of the rotated state on the span
    let rotated = rotation.apply(&psi)?;
    let (b1, b2) = (one.inner(&rotated)?, two.inner(&rotated)?);
    let (e1, e2) = primed_coefficients_formula(a1, a2, theta);
    let mut off_span_part = rotated.clone();
    off_span_part.add_scaled(-b1, &one)?;
    off_span_part.add_scaled(-b2, &two)?;
    let off_span = off_span_part.norm();
    let primed_residual = (b1 - e1).norm().max((b2 - e2).norm()).max(off_span);

    // (b) |1':>|empty> and |2':>|empty>, each evolved through perception
    let one_p = rotation.apply(&one)?;
    let two_p = rotation.apply(&two)?;
    let m1 = chain.perceived_version(0)?;
    let m2 = chain.perceived_version(1)?;
    let mut expect_one = m1.scaled(re(c));
    expect_one.add_scaled(re(s), &m2)?;
    let mut expect_two = m1.scaled(re(-s));
    expect_two.add_scaled(re(c), &m2)?;
    let evolution_residual = chain
        .perceive(&one_p)?
        .distance(&expect_one)?
        .max(chain.perceive(&two_p)?.distance(&expect_two)?);

    // (c) the state written in the primed basis, then perceived
    let (alpha1, alpha2) = (one_p.inner(&psi)?, two_p.inner(&psi)?);
    let mut psi_primed = one_p.scaled(alpha1);
    psi_primed.add_scaled(alpha2, &two_p)?;
    let expansion_residual = psi_primed.distance(&psi)?;
    let final_state = chain.perceive(&psi_primed)?;
    let outside = chain.weight_outside(&final_state, &[1, 2]);
    let mixed = chain.mixed_record_weight(&final_state);

    // (d) records read off in the unprimed and the rotated representation
    let plain = record_populations(&chain, &final_state);
    let turned = record_populations(&chain, &rotation.apply(&final_state)?);
    let invariance = plain
        .iter()
        .flatten()
        .zip(turned.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let mut report = RunReport::new(
        "appendix_rotation",
        chain.layout().clone(),
        spec.coefficients.clone(),
        StateSummary::of(&final_state, tol),
    );
    report.theta = Some(theta);
    report.add_check(
        CheckResult::measured(names::PRIMED_COEFFICIENTS, primed_residual.max(expansion_residual), tol)
            .with_note(format!("primed = ({:.6}, {:.6})", e1, e2)),
    );
    report.add_check(CheckResult::measured(names::PRIMED_EVOLUTION, evolution_residual, tol));
    report.add_check(
        CheckResult::measured(names::MIXED_RECORD, outside.max(mixed), tol * tol)
            .with_note(format!("mixed-state weight {mixed:e}")),
    );
    report.add_check(CheckResult::measured(names::RECORD_BASIS_INVARIANCE, invariance, tol));

    let observers = chain.observer_names();
    let d = decompose(&final_state, &observers[..1], tol)?;
    let dim = chain.observer_dimension();
    report.branches = d
        .branches
        .iter()
        .map(|b| BranchRow {
            label: b.record_label.clone(),
            weight: b.weight(),
            message: message_text(b.record_label[0], dim),
        })
        .collect();
    report.pruned = d.pruned;
    Ok(report)
}
