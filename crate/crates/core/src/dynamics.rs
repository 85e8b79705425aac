//! Evolution operators for the measurement chain.
//!
//! Detection, photon emission and perception are controlled permutations of
//! the computational basis. The mixed-basis rotation is a planar rotation on
//! a two-dimensional span of particle/detector configurations, repeated for
//! every observer configuration.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result, Role, StateVector, SubsystemLayout, TOLERANCE};

/// Observer level meaning "sees nothing yet".
pub const EMPTY_LEVEL: usize = 0;

/// Observer level meaning "I see a mixed state". No builder in this module
/// other than [`build_faulty_perception_unitary`] maps anything into it.
pub fn mixed_record_level(observer_dimension: usize) -> usize {
    observer_dimension - 1
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Column `i` is `phases[i] * e_{targets[i]}`.
    Permutation { targets: Vec<usize>, phases: Vec<Complex64> },
    /// Nonzero `(row, value)` entries per column.
    Sparse { columns: Vec<Vec<(usize, Complex64)>> },
    /// Row-major `dimension x dimension` entries.
    Dense { entries: Vec<Complex64> },
}

/// Linear operator on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    dimension: usize,
    representation: Representation,
    provenance: String,
}

/// Outcome of [`verify_unitary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityCheck {
    /// `max |U^dagger U - I|` over entries.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl UnitaryOp {
    pub fn identity(dimension: usize) -> Self {
        UnitaryOp {
            dimension,
            representation: Representation::Permutation {
                targets: (0..dimension).collect(),
                phases: alloc::vec![ONE; dimension],
            },
            provenance: "identity".into(),
        }
    }

    pub fn permutation(
        targets: Vec<usize>,
        phases: Option<Vec<Complex64>>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let dimension = targets.len();
        if let Some(&bad) = targets.iter().find(|&&t| t >= dimension) {
            return Err(Error::DimensionMismatch { expected: dimension, found: bad });
        }
        let phases = phases.unwrap_or_else(|| alloc::vec![ONE; dimension]);
        if phases.len() != dimension {
            return Err(Error::DimensionMismatch { expected: dimension, found: phases.len() });
        }
        Ok(UnitaryOp {
            dimension,
            representation: Representation::Permutation { targets, phases },
            provenance: provenance.into(),
        })
    }

    pub fn sparse(
        dimension: usize,
        columns: Vec<Vec<(usize, Complex64)>>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if columns.len() != dimension {
            return Err(Error::DimensionMismatch { expected: dimension, found: columns.len() });
        }
        if let Some(&(row, _)) = columns.iter().flatten().find(|(r, _)| *r >= dimension) {
            return Err(Error::DimensionMismatch { expected: dimension, found: row });
        }
        Ok(UnitaryOp {
            dimension,
            representation: Representation::Sparse { columns },
            provenance: provenance.into(),
        })
    }

    pub fn dense(dimension: usize, entries: Vec<Complex64>, provenance: impl Into<String>) -> Result<Self> {
        if entries.len() != dimension * dimension {
            return Err(Error::DimensionMismatch { expected: dimension * dimension, found: entries.len() });
        }
        Ok(UnitaryOp {
            dimension,
            representation: Representation::Dense { entries },
            provenance: provenance.into(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    pub fn is_permutation(&self) -> bool {
        matches!(self.representation, Representation::Permutation { .. })
    }

    /// Nonzero entries of column `j`.
    pub fn column(&self, j: usize) -> Vec<(usize, Complex64)> {
        match &self.representation {
            Representation::Permutation { targets, phases } => alloc::vec![(targets[j], phases[j])],
            Representation::Sparse { columns } => columns[j].clone(),
            Representation::Dense { entries } => (0..self.dimension)
                .map(|r| (r, entries[r * self.dimension + j]))
                .filter(|(_, v)| *v != ZERO)
                .collect(),
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.dimension;
        if let Representation::Dense { entries } = &self.representation {
            return entries.clone();
        }
        let mut out = alloc::vec![ZERO; n * n];
        for j in 0..n {
            for (r, v) in self.column(j) {
                out[r * n + j] += v;
            }
        }
        out
    }

    /// `y = U x` on raw amplitudes.
    pub fn apply_amplitudes(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.dimension;
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.len() });
        }
        let mut y = alloc::vec![ZERO; n];
        match &self.representation {
            Representation::Permutation { targets, phases } => {
                for ((&t, p), a) in targets.iter().zip(phases).zip(x) {
                    y[t] += p * a;
                }
            }
            Representation::Sparse { columns } => {
                for (col, a) in columns.iter().zip(x) {
                    if *a == ZERO {
                        continue;
                    }
                    for &(r, v) in col {
                        y[r] += v * a;
                    }
                }
            }
            Representation::Dense { entries } => {
                for (r, out) in y.iter_mut().enumerate() {
                    let row = &entries[r * n..(r + 1) * n];
                    *out = row.iter().zip(x).map(|(u, a)| u * a).sum();
                }
            }
        }
        Ok(y)
    }

    pub fn apply(&self, x: &StateVector) -> Result<StateVector> {
        let y = self.apply_amplitudes(x.amplitudes())?;
        StateVector::from_amplitudes(x.layout().clone(), y)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> UnitaryOp {
        let n = self.dimension;
        let provenance = format!("adjoint({})", self.provenance);
        let representation = match &self.representation {
            Representation::Permutation { targets, phases } => {
                let mut inv_targets = alloc::vec![0; n];
                let mut inv_phases = alloc::vec![ZERO; n];
                let mut hit = alloc::vec![false; n];
                for (j, (&t, p)) in targets.iter().zip(phases).enumerate() {
                    inv_targets[t] = j;
                    inv_phases[t] = p.conj();
                    hit[t] = true;
                }
                if hit.iter().all(|&h| h) {
                    Representation::Permutation { targets: inv_targets, phases: inv_phases }
                } else {
                    // not a bijection; fall back to an exact sparse transpose
                    sparse_adjoint(self)
                }
            }
            Representation::Sparse { .. } => sparse_adjoint(self),
            Representation::Dense { entries } => {
                let mut out = alloc::vec![ZERO; n * n];
                for r in 0..n {
                    for c in 0..n {
                        out[c * n + r] = entries[r * n + c].conj();
                    }
                }
                Representation::Dense { entries: out }
            }
        };
        UnitaryOp { dimension: n, representation, provenance }
    }
}

fn sparse_adjoint(op: &UnitaryOp) -> Representation {
    let mut columns = alloc::vec![Vec::new(); op.dimension];
    for j in 0..op.dimension {
        for (r, v) in op.column(j) {
            columns[r].push((j, v.conj()));
        }
    }
    Representation::Sparse { columns }
}

/// Operator applying `first` and then `second`.
pub fn compose(second: &UnitaryOp, first: &UnitaryOp) -> Result<UnitaryOp> {
    if second.dimension != first.dimension {
        return Err(Error::DimensionMismatch { expected: first.dimension, found: second.dimension });
    }
    let n = first.dimension;
    let provenance = format!("{} . {}", second.provenance, first.provenance);
    let representation = match (&second.representation, &first.representation) {
        (
            Representation::Permutation { targets: t2, phases: p2 },
            Representation::Permutation { targets: t1, phases: p1 },
        ) => Representation::Permutation {
            targets: t1.iter().map(|&t| t2[t]).collect(),
            phases: t1.iter().zip(p1).map(|(&t, p)| p2[t] * p).collect(),
        },
        (Representation::Dense { .. }, _) | (_, Representation::Dense { .. }) => {
            let a = second.to_dense();
            let b = first.to_dense();
            let mut out = alloc::vec![ZERO; n * n];
            for i in 0..n {
                for k in 0..n {
                    let aik = a[i * n + k];
                    if aik == ZERO {
                        continue;
                    }
                    for j in 0..n {
                        out[i * n + j] += aik * b[k * n + j];
                    }
                }
            }
            Representation::Dense { entries: out }
        }
        _ => {
            let columns = (0..n)
                .map(|j| {
                    let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
                    for (k, v) in first.column(j) {
                        for (r, w) in second.column(k) {
                            *acc.entry(r).or_insert(ZERO) += w * v;
                        }
                    }
                    acc.into_iter().filter(|(_, v)| *v != ZERO).collect()
                })
                .collect();
            Representation::Sparse { columns }
        }
    };
    Ok(UnitaryOp { dimension: n, representation, provenance })
}

/// Computes `max |U^dagger U - I|`; passes iff it is at most [`TOLERANCE`].
pub fn verify_unitary(op: &UnitaryOp) -> UnitarityCheck {
    let n = op.dimension;
    let residual = match &op.representation {
        Representation::Permutation { targets, phases } => {
            let mut residual: f64 = 0.0;
            // two largest |phase| landing on each target row
            let mut top: Vec<(f64, f64)> = alloc::vec![(-1.0, -1.0); n];
            for (&t, p) in targets.iter().zip(phases) {
                let m = p.norm();
                residual = residual.max((m * m - 1.0).abs());
                let slot = &mut top[t];
                if m > slot.0 {
                    slot.1 = slot.0;
                    slot.0 = m;
                } else if m > slot.1 {
                    slot.1 = m;
                }
            }
            for &(a, b) in &top {
                if b >= 0.0 {
                    residual = residual.max(a * b);
                }
            }
            residual
        }
        Representation::Sparse { columns } => {
            let mut rows: Vec<Vec<(usize, Complex64)>> = alloc::vec![Vec::new(); n];
            for (j, col) in columns.iter().enumerate() {
                for &(r, v) in col {
                    rows[r].push((j, v));
                }
            }
            let mut gram: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
            for row in &rows {
                for &(i, vi) in row {
                    for &(j, vj) in row {
                        *gram.entry((i, j)).or_insert(ZERO) += vi.conj() * vj;
                    }
                }
            }
            let mut residual: f64 = 0.0;
            for i in 0..n {
                if !gram.contains_key(&(i, i)) {
                    residual = residual.max(1.0);
                }
            }
            for (&(i, j), v) in &gram {
                let expected = if i == j { ONE } else { ZERO };
                residual = residual.max((v - expected).norm());
            }
            residual
        }
        Representation::Dense { entries } => {
            let mut residual: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let v: Complex64 =
                        (0..n).map(|r| entries[r * n + i].conj() * entries[r * n + j]).sum();
                    let expected = if i == j { ONE } else { ZERO };
                    residual = residual.max((v - expected).norm());
                }
            }
            residual
        }
    };
    UnitarityCheck { residual, tolerance: TOLERANCE, passed: residual <= TOLERANCE }
}

pub fn apply_unitary(op: &UnitaryOp, x: &StateVector) -> Result<StateVector> {
    op.apply(x)
}

fn single_path_register(layout: &SubsystemLayout) -> Result<usize> {
    match layout.positions_with_role(Role::ParticlePath).as_slice() {
        [p] => Ok(*p),
        [] => Err(Error::MissingRegister("a particle-path register".into())),
        _ => Err(Error::InvalidSpec("more than one particle-path register".into())),
    }
}

fn toggle(level: usize) -> usize {
    match level {
        0 => 1,
        1 => 0,
        other => other,
    }
}

/// Controlled toggle: with the path register on level `j`, detector `j`
/// (the `j`-th detector register in layout order) flips between "no" (0)
/// and "yes" (1). All other registers are untouched.
pub fn build_detection_unitary(layout: &SubsystemLayout) -> Result<UnitaryOp> {
    let path = single_path_register(layout)?;
    let detectors = layout.positions_with_role(Role::Detector);
    let n = layout.dimension(path);
    if detectors.len() != n {
        return Err(Error::MissingRegister(format!(
            "{n} detector registers for a {n}-level path (found {})",
            detectors.len()
        )));
    }
    let targets = (0..layout.total_dimension())
        .map(|i| {
            let det = detectors[layout.digit(i, path)];
            layout.with_digit(i, det, toggle(layout.digit(i, det)))
        })
        .collect();
    UnitaryOp::permutation(targets, None, "detection")
}

/// Controlled toggle: with detector `k` reading "yes", photon register `k`
/// flips between vacuum (0) and emitted (1).
pub fn build_photon_emission_unitary(layout: &SubsystemLayout) -> Result<UnitaryOp> {
    let detectors = layout.positions_with_role(Role::Detector);
    let photons = layout.positions_with_role(Role::Photon);
    if photons.len() != detectors.len() || photons.is_empty() {
        return Err(Error::MissingRegister(format!(
            "one photon register per detector ({} detectors, {} photon registers)",
            detectors.len(),
            photons.len()
        )));
    }
    let targets = (0..layout.total_dimension())
        .map(|i| {
            detectors.iter().zip(&photons).fold(i, |idx, (&d, &ph)| {
                if layout.digit(idx, d) == 1 {
                    layout.with_digit(idx, ph, toggle(layout.digit(idx, ph)))
                } else {
                    idx
                }
            })
        })
        .collect();
    UnitaryOp::permutation(targets, None, "photon-emission")
}

/// Which joint configurations of the `sources` registers an observer
/// recognizes, and the message level written for each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalConfigs {
    sources: Vec<String>,
    entries: Vec<(Vec<usize>, usize)>,
}

impl ClassicalConfigs {
    pub fn new(sources: Vec<String>, entries: Vec<(Vec<usize>, usize)>) -> Self {
        ClassicalConfigs { sources, entries }
    }

    /// Configuration `j` has source `j` on level 1 and all others on 0; it
    /// is recorded as message level `j + 1`.
    pub fn one_hot(sources: Vec<String>) -> Self {
        let n = sources.len();
        let entries = (0..n)
            .map(|j| {
                let mut config = alloc::vec![0; n];
                config[j] = 1;
                (config, j + 1)
            })
            .collect();
        ClassicalConfigs { sources, entries }
    }

    /// One-hot configurations over every register with `role`, in layout
    /// order.
    pub fn one_hot_over(layout: &SubsystemLayout, role: Role) -> Self {
        Self::one_hot(
            layout
                .positions_with_role(role)
                .into_iter()
                .map(|p| layout.registers()[p].name.clone())
                .collect(),
        )
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn entries(&self) -> &[(Vec<usize>, usize)] {
        &self.entries
    }
}

struct PerceptionPlan {
    observer: usize,
    sources: Vec<usize>,
    // source sub-index -> message level
    lookup: Vec<Option<usize>>,
}

fn plan_perception(
    layout: &SubsystemLayout,
    observer_register: &str,
    configs: &ClassicalConfigs,
) -> Result<PerceptionPlan> {
    let observer = layout.position(observer_register)?;
    let dim = layout.dimension(observer);
    let required = configs.entries.len() + 2;
    if dim < required {
        return Err(Error::ObserverTooSmall {
            register: observer_register.to_string(),
            dimension: dim,
            required,
        });
    }
    let sources = configs
        .sources
        .iter()
        .map(|s| layout.position(s))
        .collect::<Result<Vec<_>>>()?;
    if sources.contains(&observer) {
        return Err(Error::InvalidClassicalConfig("observer cannot read its own register".into()));
    }
    let mut lookup = alloc::vec![None; layout.subsystem_dimension(&sources)];
    let mut used_levels = Vec::new();
    for (config, level) in &configs.entries {
        if config.len() != sources.len() {
            return Err(Error::InvalidClassicalConfig(format!(
                "configuration {config:?} has {} labels for {} sources",
                config.len(),
                sources.len()
            )));
        }
        let mut key = 0;
        for (&label, &p) in config.iter().zip(&sources) {
            if label >= layout.dimension(p) {
                return Err(Error::InvalidClassicalConfig(format!("label {label} out of range in {config:?}")));
            }
            key = key * layout.dimension(p) + label;
        }
        if *level == EMPTY_LEVEL || *level >= mixed_record_level(dim) {
            return Err(Error::InvalidClassicalConfig(format!(
                "message level {level} must lie strictly between the empty and mixed-record levels"
            )));
        }
        if used_levels.contains(level) {
            return Err(Error::InvalidClassicalConfig(format!("message level {level} used twice")));
        }
        if lookup[key].is_some() {
            return Err(Error::InvalidClassicalConfig(format!("configuration {config:?} listed twice")));
        }
        used_levels.push(*level);
        lookup[key] = Some(*level);
    }
    Ok(PerceptionPlan { observer, sources, lookup })
}

fn perception_targets(layout: &SubsystemLayout, plan: &PerceptionPlan, remap: impl Fn(usize, usize) -> usize) -> Vec<usize> {
    (0..layout.total_dimension())
        .map(|i| match plan.lookup[layout.sub_index(i, &plan.sources)] {
            Some(message) => {
                let level = layout.digit(i, plan.observer);
                layout.with_digit(i, plan.observer, remap(level, message))
            }
            None => i,
        })
        .collect()
}

/// Controlled transposition: when the source registers hold a recognized
/// configuration with message `m`, the observer's empty level and level `m`
/// are swapped. Unrecognized configurations are left alone.
pub fn build_perception_unitary(
    layout: &SubsystemLayout,
    observer_register: &str,
    configs: &ClassicalConfigs,
) -> Result<UnitaryOp> {
    let plan = plan_perception(layout, observer_register, configs)?;
    let targets = perception_targets(layout, &plan, |level, message| {
        if level == EMPTY_LEVEL {
            message
        } else if level == message {
            EMPTY_LEVEL
        } else {
            level
        }
    });
    UnitaryOp::permutation(targets, None, format!("perception[{observer_register}]"))
}

/// Negative control: like [`build_perception_unitary`], except that the
/// first recognized configuration swaps the empty level with the
/// mixed-record level instead of its message. Still a permutation, so still
/// unitary; only the record it writes is wrong.
pub fn build_faulty_perception_unitary(
    layout: &SubsystemLayout,
    observer_register: &str,
    configs: &ClassicalConfigs,
) -> Result<UnitaryOp> {
    let plan = plan_perception(layout, observer_register, configs)?;
    let first = configs.entries.first().map(|(_, m)| *m);
    let mixed = mixed_record_level(layout.dimension(plan.observer));
    let targets = perception_targets(layout, &plan, |level, message| {
        let written = if Some(message) == first { mixed } else { message };
        if level == EMPTY_LEVEL {
            written
        } else if level == written {
            EMPTY_LEVEL
        } else {
            level
        }
    });
    UnitaryOp::permutation(targets, None, format!("faulty-perception[{observer_register}]"))
}

/// Planar rotation between two configurations of the non-observer registers.
///
/// `span.0` and `span.1` list one label per non-observer register in layout
/// order. The operator maps `|s0> -> cos|s0> + sin|s1>` and
/// `|s1> -> -sin|s0> + cos|s1>`, for every observer configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisRotation {
    pub theta: f64,
    pub span: (Vec<usize>, Vec<usize>),
}

impl BasisRotation {
    pub fn new(theta: f64, first: Vec<usize>, second: Vec<usize>) -> Self {
        BasisRotation { theta, span: (first, second) }
    }

    /// Rows are the rotated basis vectors in the coordinates of the span:
    /// `[[cos, sin], [-sin, cos]]`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (s, c) = (libm::sin(self.theta), libm::cos(self.theta));
        [[c, s], [-s, c]]
    }

    pub fn inverse(&self) -> Self {
        BasisRotation { theta: -self.theta, span: self.span.clone() }
    }
}

/// Flat indices of the two span configurations, paired per observer
/// configuration.
pub fn rotation_pairs(layout: &SubsystemLayout, span: &(Vec<usize>, Vec<usize>)) -> Result<Vec<(usize, usize)>> {
    let fixed: Vec<usize> = (0..layout.len())
        .filter(|&p| layout.registers()[p].role != Role::Observer)
        .collect();
    for labels in [&span.0, &span.1] {
        if labels.len() != fixed.len() {
            return Err(Error::InvalidSpan(format!(
                "expected {} labels (one per non-observer register), got {}",
                fixed.len(),
                labels.len()
            )));
        }
        for (&label, &p) in labels.iter().zip(&fixed) {
            if label >= layout.dimension(p) {
                return Err(Error::LabelOutOfRange {
                    register: layout.registers()[p].name.clone(),
                    label,
                    dimension: layout.dimension(p),
                });
            }
        }
    }
    if span.0 == span.1 {
        return Err(Error::IdenticalSpan);
    }
    let place = |mut idx: usize, labels: &[usize]| {
        for (&label, &p) in labels.iter().zip(&fixed) {
            idx = layout.with_digit(idx, p, label);
        }
        idx
    };
    Ok((0..layout.total_dimension())
        .filter(|&i| fixed.iter().all(|&p| layout.digit(i, p) == 0))
        .map(|base| (place(base, &span.0), place(base, &span.1)))
        .collect())
}

pub fn build_basis_rotation(layout: &SubsystemLayout, rotation: &BasisRotation) -> Result<UnitaryOp> {
    let pairs = rotation_pairs(layout, &rotation.span)?;
    let (s, c) = (libm::sin(rotation.theta), libm::cos(rotation.theta));
    let mut columns: Vec<Vec<(usize, Complex64)>> =
        (0..layout.total_dimension()).map(|i| alloc::vec![(i, ONE)]).collect();
    for (a, b) in pairs {
        columns[a] = alloc::vec![(a, Complex64::new(c, 0.0)), (b, Complex64::new(s, 0.0))];
        columns[b] = alloc::vec![(a, Complex64::new(-s, 0.0)), (b, Complex64::new(c, 0.0))];
    }
    UnitaryOp::sparse(layout.total_dimension(), columns, format!("rotation[{}]", rotation.theta))
}

/// Convenience for tests and callers that hold an `Arc` layout.
pub fn identity_for(layout: &Arc<SubsystemLayout>) -> UnitaryOp {
    UnitaryOp::identity(layout.total_dimension())
}
