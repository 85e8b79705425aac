use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{linalg, Error, Result, TOLERANCE};

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dimension: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Wraps raw entries without checking the density-matrix properties; see
    /// [`DensityMatrix::validate`].
    pub fn from_entries(dimension: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dimension == 0 || entries.len() != dimension * dimension {
            return Err(Error::DimensionMismatch { expected: dimension * dimension, found: entries.len() });
        }
        Ok(DensityMatrix { dimension, entries })
    }

    /// `|psi><psi|` for the given amplitudes.
    pub fn pure(amplitudes: &[Complex64]) -> Self {
        let n = amplitudes.len();
        let mut entries = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        for (i, a) in amplitudes.iter().enumerate() {
            for (j, b) in amplitudes.iter().enumerate() {
                entries[i * n + j] = a * b.conj();
            }
        }
        DensityMatrix { dimension: n, entries }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dimension + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dimension).map(|i| self.entry(i, i)).sum()
    }

    /// `max |rho - rho^dagger|` over entries.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dimension;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Ascending eigenvalues. Fails on non-Hermitian input.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let residual = self.hermitian_residual();
        if residual > TOLERANCE {
            return Err(Error::NonHermitian { residual });
        }
        Ok(linalg::hermitian_eigenvalues(self.dimension, &self.entries))
    }

    /// Checks Hermiticity, unit trace and positivity at [`TOLERANCE`].
    pub fn validate(&self) -> Result<()> {
        let eigenvalues = self.eigenvalues()?;
        let trace = self.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace is {trace}")));
        }
        if let Some(&min) = eigenvalues.first() {
            if min < -TOLERANCE {
                return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }
}
