use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result, TOLERANCE};

/// Parameters of one measurement-chain experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n_versions: usize,
    pub coefficients: Vec<Complex64>,
    pub observers: usize,
    pub photon_model: bool,
    pub rotation_thetas: Vec<f64>,
    pub tolerance: f64,
    /// Swap the first observer's perception for one that writes the
    /// mixed-record level, so the record checks must fail.
    #[doc(hidden)]
    pub negative_control: bool,
}

impl ExperimentSpec {
    /// One observer, no photons, default tolerance; `n_versions` follows
    /// the coefficient count.
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        ExperimentSpec {
            n_versions: coefficients.len(),
            coefficients,
            observers: 1,
            photon_model: false,
            rotation_thetas: Vec::new(),
            tolerance: TOLERANCE,
            negative_control: false,
        }
    }

    pub fn from_real(coefficients: &[f64]) -> Self {
        Self::new(coefficients.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn with_observers(mut self, observers: usize) -> Self {
        self.observers = observers;
        self
    }

    pub fn with_photons(mut self, photon_model: bool) -> Self {
        self.photon_model = photon_model;
        self
    }

    pub fn with_thetas(mut self, thetas: Vec<f64>) -> Self {
        self.rotation_thetas = thetas;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_negative_control(mut self, on: bool) -> Self {
        self.negative_control = on;
        self
    }

    /// `|a(j)|^2` per version.
    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_versions < 2 {
            return Err(Error::InvalidSpec(format!("n_versions must be at least 2, got {}", self.n_versions)));
        }
        if self.coefficients.len() != self.n_versions {
            return Err(Error::InvalidSpec(format!(
                "{} coefficients for {} versions",
                self.coefficients.len(),
                self.n_versions
            )));
        }
        if self.observers < 1 {
            return Err(Error::InvalidSpec("at least one observer is required".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidSpec(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.coefficients.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidSpec("coefficients must be finite".into()));
        }
        let total: f64 = self.weights().iter().sum();
        if (total - 1.0).abs() > self.tolerance {
            return Err(Error::InvalidSpec(format!("coefficients have total weight {total}, expected 1")));
        }
        if self.rotation_thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidSpec("rotation angles must be finite".into()));
        }
        Ok(())
    }
}
