//! Reduced states and information measures.
//!
//! These quantities only contrast the linear-evolution picture with
//! environment-based accounts: coherence of the observer record, entropy of
//! reduced states and how much of the path is readable from a fragment of
//! the detectors or photons.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::{linalg, Error, Result, StateVector, SubsystemLayout};

/// Eigenvalues below this contribute nothing to entropies.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Largest combined dimension accepted by [`fragment_mutual_information`].
pub const MUTUAL_INFORMATION_CAP: usize = 1 << 12;

const NORM_SLACK: f64 = 1e-9;

fn resolve(layout: &SubsystemLayout, names: &[&str]) -> Result<Vec<usize>> {
    if names.is_empty() {
        return Err(Error::EmptyRegisterSet);
    }
    let mut positions = names.iter().map(|n| layout.position(n)).collect::<Result<Vec<_>>>()?;
    positions.sort_unstable();
    positions.dedup();
    Ok(positions)
}

fn check_unit(state: &StateVector) -> Result<()> {
    let n = state.norm_sqr();
    if (n - 1.0).abs() > NORM_SLACK {
        return Err(Error::InvalidDensityMatrix(alloc::format!("state has squared norm {n}")));
    }
    Ok(())
}

/// Amplitudes rearranged as a `kept x rest` matrix (row-major), both in
/// layout order.
fn bipartition(state: &StateVector, kept: &[usize]) -> (usize, usize, Vec<Complex64>) {
    let layout = state.layout();
    let rest: Vec<usize> = (0..layout.len()).filter(|p| !kept.contains(p)).collect();
    let rows = layout.subsystem_dimension(kept);
    let cols = layout.subsystem_dimension(&rest);
    let mut m = alloc::vec![Complex64::new(0.0, 0.0); rows * cols];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let r = layout.sub_index(i, kept);
        let c = layout.sub_index(i, &rest);
        m[r * cols + c] = *a;
    }
    (rows, cols, m)
}

/// Partial trace over every register not named in `keep`. Kept registers
/// keep their layout order in the result's index.
pub fn reduced_density_matrix(state: &StateVector, keep: &[&str]) -> Result<DensityMatrix> {
    let kept = resolve(state.layout(), keep)?;
    check_unit(state)?;
    let (rows, cols, m) = bipartition(state, &kept);
    DensityMatrix::from_entries(rows, linalg::gram(rows, cols, &m))
}

fn entropy_of(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&l| l >= EIGENVALUE_FLOOR)
        .map(|&l| -l * libm::log2(l))
        .sum();
    s.max(0.0)
}

/// `-sum lambda log2 lambda` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_of(&rho.eigenvalues()?))
}

/// Entropy of the registers at `kept`, diagonalizing whichever side of the
/// split is smaller (a pure state's two reduced states share their nonzero
/// spectrum).
fn subsystem_entropy(state: &StateVector, kept: &[usize]) -> f64 {
    let (rows, cols, m) = bipartition(state, kept);
    let eigenvalues = if rows <= cols {
        linalg::hermitian_eigenvalues(rows, &linalg::gram(rows, cols, &m))
    } else {
        linalg::hermitian_eigenvalues(cols, &linalg::co_gram(rows, cols, &m))
    };
    entropy_of(&eigenvalues)
}

/// Largest off-diagonal modulus of the observer's reduced state between
/// distinct message levels (every level except the empty one).
pub fn observer_coherence(state: &StateVector, observer_register: &str) -> Result<f64> {
    let rho = reduced_density_matrix(state, &[observer_register])?;
    let n = rho.dimension();
    let mut worst: f64 = 0.0;
    for i in 1..n {
        for j in 1..n {
            if i != j {
                worst = worst.max(rho.entry(i, j).norm());
            }
        }
    }
    Ok(worst)
}

/// `I(S:F) = S(rho_S) + S(rho_F) - S(rho_SF)` in bits.
pub fn fragment_mutual_information(state: &StateVector, fragment: &[&str], system: &[&str]) -> Result<f64> {
    let layout = state.layout();
    let f = resolve(layout, fragment)?;
    let s = resolve(layout, system)?;
    if let Some(&p) = f.iter().find(|p| s.contains(p)) {
        return Err(Error::OverlappingRegisters(layout.registers()[p].name.clone()));
    }
    let mut joint: Vec<usize> = f.iter().chain(&s).copied().collect();
    joint.sort_unstable();
    let dimension = layout.subsystem_dimension(&joint);
    if dimension > MUTUAL_INFORMATION_CAP {
        return Err(Error::SubsystemTooLarge { dimension, cap: MUTUAL_INFORMATION_CAP });
    }
    check_unit(state)?;
    let info = subsystem_entropy(state, &s) + subsystem_entropy(state, &f) - subsystem_entropy(state, &joint);
    Ok(info.max(0.0))
}

/// Binary-entropy style Shannon entropy of a probability list, in bits.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    entropy_of(probabilities)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{product_state, superpose};
    use crate::{Register, Role};
    use alloc::sync::Arc;
    use alloc::vec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn chain() -> Arc<SubsystemLayout> {
        Arc::new(
            SubsystemLayout::new(vec![
                Register::new("P", 2, Role::ParticlePath),
                Register::new("DH", 2, Role::Detector),
                Register::new("DV", 2, Role::Detector),
                Register::new("Obs", 4, Role::Observer),
            ])
            .unwrap(),
        )
    }

    fn final_state(a1: f64, a2: f64) -> StateVector {
        let l = chain();
        superpose(&[
            (c(a1), &product_state(&l, &[0, 1, 0, 1]).unwrap()),
            (c(a2), &product_state(&l, &[1, 0, 1, 2]).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn product_state_reduces_to_projector() {
        let s = product_state(&chain(), &[1, 0, 1, 2]).unwrap();
        for name in ["P", "DH", "DV", "Obs"] {
            let rho = reduced_density_matrix(&s, &[name]).unwrap();
            rho.validate().unwrap();
            assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-12);
        }
        let rho = reduced_density_matrix(&s, &["Obs"]).unwrap();
        assert_eq!(rho.entry(2, 2), c(1.0));
    }

    #[test]
    fn keeping_everything_gives_pure_projector() {
        let s = final_state(0.6, 0.8);
        let rho = reduced_density_matrix(&s, &["Obs", "P", "DV", "DH"]).unwrap();
        assert_eq!(rho, DensityMatrix::pure(s.amplitudes()));
    }

    #[test]
    fn observer_reduced_state_is_diagonal() {
        let rho = reduced_density_matrix(&final_state(0.6, 0.8), &["Obs"]).unwrap();
        assert!((rho.entry(1, 1).re - 0.36).abs() < 1e-15);
        assert!((rho.entry(2, 2).re - 0.64).abs() < 1e-15);
        assert_eq!(rho.entry(1, 2), c(0.0));
    }

    #[test]
    fn entropy_examples() {
        let half = DensityMatrix::from_entries(2, vec![c(0.5), c(0.0), c(0.0), c(0.5)]).unwrap();
        assert!((von_neumann_entropy(&half).unwrap() - 1.0).abs() < 1e-15);
        let skew = DensityMatrix::from_entries(2, vec![c(0.5), c(0.2), c(0.0), c(0.5)]).unwrap();
        assert!(matches!(von_neumann_entropy(&skew), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn coherence_examples() {
        assert!(observer_coherence(&final_state(0.6, 0.8), "Obs").unwrap() <= 1e-12);

        let l = chain();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let split = superpose(&[
            (c(h), &product_state(&l, &[0, 0, 0, 1]).unwrap()),
            (c(h), &product_state(&l, &[0, 0, 0, 2]).unwrap()),
        ])
        .unwrap();
        assert!((observer_coherence(&split, "Obs").unwrap() - 0.5).abs() < 1e-15);

        let idle = superpose(&[
            (c(0.6), &product_state(&l, &[0, 0, 0, 0]).unwrap()),
            (c(0.8), &product_state(&l, &[1, 0, 0, 0]).unwrap()),
        ])
        .unwrap();
        assert_eq!(observer_coherence(&idle, "Obs").unwrap(), 0.0);
        assert!(matches!(observer_coherence(&idle, "Eve"), Err(Error::UnknownRegister(_))));
    }

    #[test]
    fn mutual_information_examples() {
        let s = product_state(&chain(), &[1, 0, 1, 2]).unwrap();
        assert!(fragment_mutual_information(&s, &["DH"], &["P"]).unwrap().abs() < 1e-12);

        let h = core::f64::consts::FRAC_1_SQRT_2;
        let e = final_state(h, h);
        assert!((fragment_mutual_information(&e, &["DH"], &["P"]).unwrap() - 1.0).abs() < 1e-12);

        assert_eq!(
            fragment_mutual_information(&e, &["P", "DH"], &["P"]),
            Err(Error::OverlappingRegisters("P".into()))
        );
        assert_eq!(fragment_mutual_information(&e, &[], &["P"]), Err(Error::EmptyRegisterSet));
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let s = product_state(&chain(), &[0, 0, 0, 0]).unwrap().scaled(c(2.0));
        assert!(reduced_density_matrix(&s, &["P"]).is_err());
    }
}
