//! Dense state vectors over a [`SubsystemLayout`].

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result, SubsystemLayout};

/// Norms at or below this are treated as the zero vector.
pub const DEGENERATE_NORM: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: Arc<SubsystemLayout>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(layout: Arc<SubsystemLayout>) -> Self {
        let n = layout.total_dimension();
        StateVector { layout, amplitudes: alloc::vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_amplitudes(layout: Arc<SubsystemLayout>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dimension() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dimension(),
                found: amplitudes.len(),
            });
        }
        Ok(StateVector { layout, amplitudes })
    }

    /// Computational basis vector `e_index`.
    pub fn basis(layout: Arc<SubsystemLayout>, index: usize) -> Result<Self> {
        let n = layout.total_dimension();
        if index >= n {
            return Err(Error::DimensionMismatch { expected: n, found: index });
        }
        let mut state = Self::zeros(layout);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Unit vector on the basis state named by one label per register.
    pub fn product(layout: Arc<SubsystemLayout>, labels: &[usize]) -> Result<Self> {
        let index = layout.encode(labels)?;
        Self::basis(layout, index)
    }

    pub fn layout(&self) -> &Arc<SubsystemLayout> {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, labels: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.layout.encode(labels)?])
    }

    pub fn same_layout(&self, other: &StateVector) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout
    }

    fn check_layout(&self, other: &StateVector) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::LayoutMismatch)
        }
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_layout(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let norm = self.norm();
        if norm.is_nan() || norm <= DEGENERATE_NORM {
            return Err(Error::DegenerateState { norm });
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: Complex64, other: &StateVector) -> Result<()> {
        self.check_layout(other)?;
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        self.check_layout(other)?;
        let sq: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok(libm::sqrt(sq))
    }

    /// Total `|amplitude|^2` over basis states whose labels satisfy `pred`.
    pub fn weight_where(&self, mut pred: impl FnMut(usize) -> bool) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Copy with every amplitude outside `keep` zeroed.
    pub fn projected(&self, mut keep: impl FnMut(usize) -> bool) -> StateVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| if keep(i) { a } else { Complex64::new(0.0, 0.0) })
            .collect();
        StateVector { layout: self.layout.clone(), amplitudes }
    }
}

pub fn product_state(layout: &Arc<SubsystemLayout>, labels: &[usize]) -> Result<StateVector> {
    StateVector::product(layout.clone(), labels)
}

/// Linear combination of states sharing one layout. The result is not
/// normalized.
pub fn superpose(terms: &[(Complex64, &StateVector)]) -> Result<StateVector> {
    let (_, first) = terms.first().ok_or(Error::EmptySuperposition)?;
    let mut out = StateVector::zeros(first.layout().clone());
    for (c, state) in terms {
        out.add_scaled(*c, state)?;
    }
    Ok(out)
}

pub fn inner_product(x: &StateVector, y: &StateVector) -> Result<Complex64> {
    x.inner(y)
}

pub fn norm(x: &StateVector) -> f64 {
    x.norm()
}

pub fn normalize(x: &StateVector) -> Result<StateVector> {
    x.normalized()
}
