use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::branches::{decompose, Decomposition};
use super::check_names as names;
use super::report::{message_text, BranchRow, CheckResult, RunReport, StateSummary};
use super::spec::ExperimentSpec;
use crate::analysis::observer_coherence;
use crate::dynamics::{
    build_detection_unitary, build_faulty_perception_unitary, build_perception_unitary,
    build_photon_emission_unitary, mixed_record_level, verify_unitary, ClassicalConfigs, UnitaryOp,
    EMPTY_LEVEL,
};
use crate::{Error, Register, Result, Role, StateVector, SubsystemLayout, DEFAULT_DIMENSION_CAP};

/// Layout, operators and index bookkeeping for one experiment shape.
///
/// Registers, in order: `path` (N levels), N detectors (`DH`, `DV` for two
/// versions, else `D1..DN`), optionally N photon registers, then the
/// observers (`Obs`, or `Obs1..ObsK`), each with levels
/// `{empty, M1..MN, Mperp}`.
#[derive(Debug, Clone)]
pub struct MeasurementChain {
    layout: Arc<SubsystemLayout>,
    n_versions: usize,
    path: usize,
    detectors: Vec<usize>,
    photons: Vec<usize>,
    observers: Vec<usize>,
    detection: UnitaryOp,
    emission: Option<UnitaryOp>,
    perceptions: Vec<UnitaryOp>,
}

fn detector_names(n: usize) -> Vec<String> {
    if n == 2 {
        alloc::vec!["DH".into(), "DV".into()]
    } else {
        (1..=n).map(|j| format!("D{j}")).collect()
    }
}

fn observer_names(k: usize) -> Vec<String> {
    if k == 1 {
        alloc::vec!["Obs".into()]
    } else {
        (1..=k).map(|j| format!("Obs{j}")).collect()
    }
}

impl MeasurementChain {
    pub fn layout_for(spec: &ExperimentSpec, cap: usize) -> Result<SubsystemLayout> {
        let n = spec.n_versions;
        let mut registers = alloc::vec![Register::new("path", n, Role::ParticlePath)];
        registers.extend(detector_names(n).into_iter().map(|d| Register::new(d, 2, Role::Detector)));
        if spec.photon_model {
            registers.extend((1..=n).map(|j| Register::new(format!("ph{j}"), 2, Role::Photon)));
        }
        registers.extend(
            observer_names(spec.observers)
                .into_iter()
                .map(|o| Register::new(o, n + 2, Role::Observer)),
        );
        SubsystemLayout::with_cap(registers, cap)
    }

    pub fn new(spec: &ExperimentSpec) -> Result<Self> {
        Self::with_cap(spec, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(spec: &ExperimentSpec, cap: usize) -> Result<Self> {
        spec.validate()?;
        let layout = Arc::new(Self::layout_for(spec, cap)?);
        let detection = build_detection_unitary(&layout)?;
        let (emission, source_role) = if spec.photon_model {
            (Some(build_photon_emission_unitary(&layout)?), Role::Photon)
        } else {
            (None, Role::Detector)
        };
        let configs = ClassicalConfigs::one_hot_over(&layout, source_role);
        let observers = layout.positions_with_role(Role::Observer);
        let perceptions = observers
            .iter()
            .enumerate()
            .map(|(k, &o)| {
                let name = &layout.registers()[o].name;
                if spec.negative_control && k == 0 {
                    build_faulty_perception_unitary(&layout, name, &configs)
                } else {
                    build_perception_unitary(&layout, name, &configs)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MeasurementChain {
            n_versions: spec.n_versions,
            path: layout.positions_with_role(Role::ParticlePath)[0],
            detectors: layout.positions_with_role(Role::Detector),
            photons: layout.positions_with_role(Role::Photon),
            observers,
            layout,
            detection,
            emission,
            perceptions,
        })
    }

    pub fn layout(&self) -> &Arc<SubsystemLayout> {
        &self.layout
    }

    pub fn n_versions(&self) -> usize {
        self.n_versions
    }

    pub fn path_register(&self) -> usize {
        self.path
    }

    fn names(&self, positions: &[usize]) -> Vec<&str> {
        positions.iter().map(|&p| self.layout.registers()[p].name.as_str()).collect()
    }

    pub fn detector_names(&self) -> Vec<&str> {
        self.names(&self.detectors)
    }

    pub fn photon_names(&self) -> Vec<&str> {
        self.names(&self.photons)
    }

    pub fn observer_names(&self) -> Vec<&str> {
        self.names(&self.observers)
    }

    pub fn path_name(&self) -> &str {
        &self.layout.registers()[self.path].name
    }

    pub fn observer_dimension(&self) -> usize {
        self.n_versions + 2
    }

    /// Detection, photon emission (if any) and every perception step.
    pub fn unitaries(&self) -> Vec<&UnitaryOp> {
        let mut ops = alloc::vec![&self.detection];
        ops.extend(self.emission.as_ref());
        ops.extend(self.perceptions.iter());
        ops
    }

    pub fn perceptions(&self) -> &[UnitaryOp] {
        &self.perceptions
    }

    fn labels_for(&self, version: usize, detected: bool, perceived: bool) -> Vec<usize> {
        let mut labels = alloc::vec![0; self.layout.len()];
        labels[self.path] = version;
        if detected {
            labels[self.detectors[version]] = 1;
            if let Some(&ph) = self.photons.get(version) {
                labels[ph] = 1;
            }
        }
        if perceived {
            for &o in &self.observers {
                labels[o] = version + 1;
            }
        }
        labels
    }

    /// Particle on path `version` (0-based), detectors ready, photons in
    /// vacuum, observers seeing nothing.
    pub fn version_state(&self, version: usize) -> Result<StateVector> {
        StateVector::product(self.layout.clone(), &self.labels_for(version, false, false))
    }

    /// Version `version` right after detection (and emission), observers
    /// still empty. Built from labels, not by applying operators.
    pub fn detected_version(&self, version: usize) -> Result<StateVector> {
        StateVector::product(self.layout.clone(), &self.labels_for(version, true, false))
    }

    /// Version `version` with every observer holding message `version + 1`.
    /// Built from labels, not by applying operators.
    pub fn perceived_version(&self, version: usize) -> Result<StateVector> {
        StateVector::product(self.layout.clone(), &self.labels_for(version, true, true))
    }

    fn combine(&self, coefficients: &[Complex64], mut each: impl FnMut(usize) -> Result<StateVector>) -> Result<StateVector> {
        if coefficients.len() != self.n_versions {
            return Err(Error::InvalidSpec(format!(
                "{} coefficients for {} versions",
                coefficients.len(),
                self.n_versions
            )));
        }
        let mut out = StateVector::zeros(self.layout.clone());
        for (j, a) in coefficients.iter().enumerate() {
            if *a != Complex64::new(0.0, 0.0) {
                out.add_scaled(*a, &each(j)?)?;
            }
        }
        Ok(out)
    }

    /// `sum_j a(j) |version j>` before detection.
    pub fn prepare(&self, coefficients: &[Complex64]) -> Result<StateVector> {
        self.combine(coefficients, |j| self.version_state(j))
    }

    /// `sum_j a(j) versions[j]` for arbitrary (possibly non-orthogonal)
    /// version states.
    pub fn prepare_from(&self, coefficients: &[Complex64], versions: &[StateVector]) -> Result<StateVector> {
        if versions.len() != self.n_versions {
            return Err(Error::InvalidSpec(format!("{} version states for {} versions", versions.len(), self.n_versions)));
        }
        self.combine(coefficients, |j| Ok(versions[j].clone()))
    }

    pub fn expected_detected(&self, coefficients: &[Complex64]) -> Result<StateVector> {
        self.combine(coefficients, |j| self.detected_version(j))
    }

    /// `sum_j a(j) |version j> |Mj>..|Mj>`.
    pub fn expected_final(&self, coefficients: &[Complex64]) -> Result<StateVector> {
        self.combine(coefficients, |j| self.perceived_version(j))
    }

    pub fn detect(&self, state: &StateVector) -> Result<StateVector> {
        let mut out = self.detection.apply(state)?;
        if let Some(emission) = &self.emission {
            out = emission.apply(&out)?;
        }
        Ok(out)
    }

    pub fn perceive(&self, state: &StateVector) -> Result<StateVector> {
        let mut out = state.clone();
        for op in &self.perceptions {
            out = op.apply(&out)?;
        }
        Ok(out)
    }

    pub fn evolve(&self, state: &StateVector) -> Result<StateVector> {
        self.perceive(&self.detect(state)?)
    }

    /// Total weight, summed over observers, on the mixed-record level.
    pub fn mixed_record_weight(&self, state: &StateVector) -> f64 {
        let mixed = mixed_record_level(self.observer_dimension());
        self.observers
            .iter()
            .map(|&o| state.weight_where(|i| self.layout.digit(i, o) == mixed))
            .sum()
    }

    /// Weight, summed over observers, on levels other than the listed
    /// messages.
    pub fn weight_outside(&self, state: &StateVector, messages: &[usize]) -> f64 {
        self.observers
            .iter()
            .map(|&o| state.weight_where(|i| !messages.contains(&self.layout.digit(i, o))))
            .sum()
    }

    /// Weight on basis states where some pair of observers disagree.
    pub fn disagreement_weight(&self, state: &StateVector) -> f64 {
        let first = self.observers[0];
        state.weight_where(|i| {
            let m = self.layout.digit(i, first);
            self.observers[1..].iter().any(|&o| self.layout.digit(i, o) != m)
        })
    }

    /// Projection onto the basis states whose path register is `version`.
    pub fn version_component(&self, state: &StateVector, version: usize) -> StateVector {
        state.projected(|i| self.layout.digit(i, self.path) == version)
    }

    /// Per-version weights read from a decomposition on the detector
    /// configuration (one-hot label `j` is version `j`). Weight on
    /// configurations that are not one-hot is returned separately.
    pub fn weights_by_detectors(&self, d: &Decomposition) -> (Vec<f64>, f64) {
        let mut weights = alloc::vec![0.0; self.n_versions];
        let mut stray = 0.0;
        for b in &d.branches {
            let ones: Vec<usize> = b.record_label.iter().enumerate().filter(|(_, &l)| l != 0).map(|(j, _)| j).collect();
            match ones.as_slice() {
                [j] if b.record_label[*j] == 1 => weights[*j] += b.weight(),
                _ => stray += b.weight(),
            }
        }
        (weights, stray)
    }

    /// Per-version weights read from a decomposition on one observer
    /// (message `j + 1` is version `j`), plus weight on any other level.
    pub fn weights_by_record(&self, d: &Decomposition) -> (Vec<f64>, f64) {
        let mut weights = alloc::vec![0.0; self.n_versions];
        let mut stray = 0.0;
        for b in &d.branches {
            let level = b.record_label[0];
            if level != EMPTY_LEVEL && level <= self.n_versions {
                weights[level - 1] += b.weight();
            } else {
                stray += b.weight();
            }
        }
        (weights, stray)
    }
}

/// Largest `|<rel_j|rel_k>|` between relative states of distinct path
/// branches.
fn max_relative_overlap(chain: &MeasurementChain, state: &StateVector, tolerance: f64) -> Result<f64> {
    let d = decompose(state, &[chain.path_name()], tolerance)?;
    let mut worst: f64 = 0.0;
    for (i, a) in d.branches.iter().enumerate() {
        for b in &d.branches[i + 1..] {
            worst = worst.max(a.relative_state.inner(&b.relative_state)?.norm());
        }
    }
    Ok(worst)
}

fn max_coherence(chain: &MeasurementChain, state: &StateVector) -> Result<f64> {
    chain
        .observer_names()
        .iter()
        .try_fold(0.0f64, |acc, o| Ok(acc.max(observer_coherence(state, o)?)))
}

/// Runs detection, photon emission (if enabled) and every observer's
/// perception on `sum_j a(j) |version j>`, and checks the result.
pub fn run_measurement_chain(spec: &ExperimentSpec) -> Result<RunReport> {
    let chain = MeasurementChain::new(spec)?;
    run_chain(&chain, spec)
}

pub(super) fn run_chain(chain: &MeasurementChain, spec: &ExperimentSpec) -> Result<RunReport> {
    let tol = spec.tolerance;
    let weight_tol = tol * tol;
    let a = &spec.coefficients;

    let initial = chain.prepare(a)?;
    let detected = chain.detect(&initial)?;
    let final_state = chain.perceive(&detected)?;

    let mut report = RunReport::new(
        if spec.n_versions == 2 { "stern_gerlach" } else { "generalized" },
        chain.layout().clone(),
        a.clone(),
        StateSummary::of(&final_state, tol),
    );

    let unitarity = chain.unitaries().iter().map(|u| verify_unitary(u).residual).fold(0.0, f64::max);
    report.add_check(CheckResult::measured(names::UNITARITY, unitarity, tol));

    let norm_drift = (detected.norm() - initial.norm())
        .abs()
        .max((final_state.norm() - initial.norm()).abs());
    report.add_check(CheckResult::measured(names::NORM_PRESERVATION, norm_drift, tol));

    let structure = final_state
        .distance(&chain.expected_final(a)?)?
        .max(detected.distance(&chain.expected_detected(a)?)?);
    report.add_check(CheckResult::measured(names::FINAL_STRUCTURE, structure, tol));

    let overlap = max_relative_overlap(chain, &detected, tol)?.max(max_relative_overlap(chain, &final_state, tol)?);
    report.add_check(CheckResult::measured(names::BRANCH_ORTHOGONALITY, overlap, tol));

    let coherence = max_coherence(chain, &detected)?.max(max_coherence(chain, &final_state)?);
    report.add_check(CheckResult::measured(names::OBSERVER_COHERENCE, coherence, tol));

    let observers = chain.observer_names();
    let before = decompose(&detected, &chain.detector_names(), tol)?;
    let after = decompose(&final_state, &observers[..1], tol)?;
    let (pre, pre_stray) = chain.weights_by_detectors(&before);
    let (post, post_stray) = chain.weights_by_record(&after);
    let born = pre
        .iter()
        .zip(&post)
        .zip(spec.weights())
        .map(|((p, q), w)| (p - w).abs().max((q - p).abs()))
        .fold(pre_stray.max(post_stray), f64::max);
    report.add_check(CheckResult::measured(names::BORN_WEIGHTS, born, tol));

    let mixed = chain.mixed_record_weight(&final_state);
    report.add_check(CheckResult::measured(names::MIXED_RECORD, mixed, weight_tol));

    report.add_check(if observers.len() < 2 {
        CheckResult::skipped(names::MULTI_OBSERVER_AGREEMENT, weight_tol, "single observer")
    } else {
        CheckResult::measured(names::MULTI_OBSERVER_AGREEMENT, chain.disagreement_weight(&final_state), weight_tol)
    });

    let dim = chain.observer_dimension();
    report.branches = after
        .branches
        .iter()
        .map(|b| BranchRow {
            label: b.record_label.clone(),
            weight: b.weight(),
            message: message_text(b.record_label[0], dim),
        })
        .collect();
    report.pruned = after.pruned;
    Ok(report)
}
