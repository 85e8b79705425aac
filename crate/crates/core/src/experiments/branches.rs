use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result, StateVector, SubsystemLayout, TOLERANCE};

/// One version of reality: a record label, its coefficient and the
/// normalized state of every other register.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Labels of the record registers, in the order they were requested.
    pub record_label: Vec<usize>,
    pub coefficient: Complex64,
    pub relative_state: StateVector,
}

impl Branch {
    pub fn weight(&self) -> f64 {
        self.coefficient.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub branches: Vec<Branch>,
    /// Labels dropped because their weight was at most `tolerance^2`.
    pub pruned: Vec<(Vec<usize>, f64)>,
}

fn record_positions(layout: &SubsystemLayout, record: &[&str]) -> Result<Vec<usize>> {
    if record.is_empty() {
        return Err(Error::EmptyRegisterSet);
    }
    let positions = record.iter().map(|n| layout.position(n)).collect::<Result<Vec<_>>>()?;
    for (i, p) in positions.iter().enumerate() {
        if positions[..i].contains(p) {
            return Err(Error::DuplicateRegister(layout.registers()[*p].name.clone()));
        }
    }
    if positions.len() == layout.len() {
        return Err(Error::InvalidSpec("record registers leave no relative state".into()));
    }
    Ok(positions)
}

fn label_of(layout: &SubsystemLayout, positions: &[usize], mut key: usize) -> Vec<usize> {
    let mut label = alloc::vec![0; positions.len()];
    for (slot, &p) in label.iter_mut().zip(positions).rev() {
        *slot = key % layout.dimension(p);
        key /= layout.dimension(p);
    }
    label
}

/// Relative-state decomposition with respect to the joint configuration of
/// `record`. The record basis must be orthogonal, which computational
/// labels always are.
pub fn decompose(state: &StateVector, record: &[&str], tolerance: f64) -> Result<Decomposition> {
    let layout = state.layout();
    let positions = record_positions(layout, record)?;
    let norm_sqr = state.norm_sqr();
    if (norm_sqr - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSpec(format!("branch decomposition needs a unit state (norm^2 = {norm_sqr})")));
    }
    let rest_layout = Arc::new(layout.without(&positions)?);
    let rest: Vec<usize> = (0..layout.len()).filter(|p| !positions.contains(p)).collect();

    let n_labels = layout.subsystem_dimension(&positions);
    let rest_dim = rest_layout.total_dimension();
    let mut components = alloc::vec![alloc::vec![Complex64::new(0.0, 0.0); rest_dim]; n_labels];
    for (i, a) in state.amplitudes().iter().enumerate() {
        components[layout.sub_index(i, &positions)][layout.sub_index(i, &rest)] = *a;
    }

    let threshold = tolerance * tolerance;
    let mut branches = Vec::new();
    let mut pruned = Vec::new();
    for (key, component) in components.into_iter().enumerate() {
        let weight: f64 = component.iter().map(|a| a.norm_sqr()).sum();
        let label = label_of(layout, &positions, key);
        if weight <= threshold {
            if weight > 0.0 {
                pruned.push((label, weight));
            }
            continue;
        }
        // phase convention: the largest relative amplitude is real positive
        let pivot = component
            .iter()
            .copied()
            .fold(Complex64::new(0.0, 0.0), |best, a| if a.norm() > best.norm() { a } else { best });
        let coefficient = pivot / pivot.norm() * libm::sqrt(weight);
        let relative: Vec<Complex64> = component.iter().map(|a| a / coefficient).collect();
        branches.push(Branch {
            record_label: label,
            coefficient,
            relative_state: StateVector::from_amplitudes(rest_layout.clone(), relative)?,
        });
    }
    Ok(Decomposition { branches, pruned })
}

/// Branches of `state` on `record`, pruning weights at or below
/// `TOLERANCE^2`.
pub fn decompose_branches(state: &StateVector, record: &[&str]) -> Result<Vec<Branch>> {
    Ok(decompose(state, record, TOLERANCE)?.branches)
}

/// `sum_j a(j) |relative_j> |label_j>` on the full layout.
pub fn reconstruct(layout: &Arc<SubsystemLayout>, record: &[&str], branches: &[Branch]) -> Result<StateVector> {
    let positions = record_positions(layout, record)?;
    let rest: Vec<usize> = (0..layout.len()).filter(|p| !positions.contains(p)).collect();
    let mut out = StateVector::zeros(layout.clone());
    for branch in branches {
        let rel = branch.relative_state.layout();
        if branch.record_label.len() != positions.len() || rel.len() != rest.len() {
            return Err(Error::LayoutMismatch);
        }
        let mut base = 0;
        for (&label, &p) in branch.record_label.iter().zip(&positions) {
            base = layout.with_digit(base, p, label);
        }
        for (r, a) in branch.relative_state.amplitudes().iter().enumerate() {
            let digits = rel.decode(r);
            let idx = digits.iter().zip(&rest).fold(base, |idx, (&d, &p)| layout.with_digit(idx, p, d));
            out.amplitudes_mut()[idx] += branch.coefficient * a;
        }
    }
    Ok(out)
}
