//! State-vector simulation of measurement chains.
//!
//! A particle path register, one detector per path, optional photon
//! registers and one or more observer registers form a composite Hilbert
//! space. Detection and perception are built as controlled permutations,
//! so every step is exactly unitary and linear. The [`experiments`] module
//! runs the chains and certifies their structural properties; [`analysis`]
//! provides reduced density matrices, entropies and mutual information.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod density;
pub mod dynamics;
mod error;
pub mod experiments;
pub mod layout;
mod linalg;
pub mod state;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use layout::{Register, Role, SubsystemLayout};
pub use state::StateVector;

/// Global equality tolerance for amplitudes and matrix entries.
pub const TOLERANCE: f64 = 1e-12;

/// Largest composite dimension a layout may have unless a different cap is
/// requested.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 24;
