//! Brute-force references for the chain dynamics and the analysis routines.
//!
//! Everything here recomputes from scratch: its own mixed-radix arithmetic,
//! rule-by-rule column construction and nalgebra for dense algebra and
//! eigenvalues.

use branchsim_core::analysis::{fragment_mutual_information, reduced_density_matrix, von_neumann_entropy};
use branchsim_core::dynamics::{apply_unitary, build_detection_unitary, build_perception_unitary, ClassicalConfigs};
use branchsim_core::experiments::{
    coefficient_independence_check, multi_observer_agreement, run_measurement_chain, ExperimentSpec,
    MeasurementChain,
};
use branchsim_core::Complex64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Frozen from an mpmath evaluation of -0.36 log2 0.36 - 0.64 log2 0.64
/// (0.942683189255492245...), cross-checked with numpy eigvalsh on the
/// 4x4 observer reduced state.
const ENTROPY_036_064: f64 = 0.942_683_189_255_492_2;

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

fn index_of(labels: &[usize], dims: &[usize]) -> usize {
    labels.iter().zip(dims).fold(0, |acc, (l, d)| acc * d + l)
}

/// Register dimensions of an `n`-version chain with `k` observers, no
/// photons: path, n detectors, k observers.
fn chain_dims(n: usize, k: usize) -> Vec<usize> {
    let mut dims = vec![n];
    dims.extend(std::iter::repeat_n(2, n));
    dims.extend(std::iter::repeat_n(n + 2, k));
    dims
}

/// Image of basis state `labels` under detection followed by every
/// observer's perception, written out rule by rule.
fn step_rules(labels: &[usize], n: usize, k: usize) -> Vec<usize> {
    let mut l = labels.to_vec();
    let p = l[0];
    l[1 + p] ^= 1;
    for o in 0..k {
        let dets = &l[1..=n];
        let ones: Vec<usize> = (0..n).filter(|&j| dets[j] == 1).collect();
        if ones.len() == 1 {
            let msg = ones[0] + 1;
            let slot = 1 + n + o;
            if l[slot] == 0 {
                l[slot] = msg;
            } else if l[slot] == msg {
                l[slot] = 0;
            }
        }
    }
    l
}

fn oracle_evolve(n: usize, k: usize, initial: &[Complex64]) -> Vec<Complex64> {
    let dims = chain_dims(n, k);
    let mut out = vec![Complex64::new(0.0, 0.0); initial.len()];
    for (i, a) in initial.iter().enumerate() {
        if *a != Complex64::new(0.0, 0.0) {
            let target = index_of(&step_rules(&digits(i, &dims), n, k), &dims);
            out[target] += a;
        }
    }
    out
}

fn oracle_initial(n: usize, k: usize, coeffs: &[Complex64]) -> Vec<Complex64> {
    let dims = chain_dims(n, k);
    let mut v = vec![Complex64::new(0.0, 0.0); dims.iter().product()];
    for (j, a) in coeffs.iter().enumerate() {
        let mut labels = vec![0; dims.len()];
        labels[0] = j;
        v[index_of(&labels, &dims)] = *a;
    }
    v
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|a| a / norm).collect()
}

fn max_diff(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

#[test]
fn chain_matches_rule_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, k) in [(2, 1), (2, 2), (3, 1), (3, 3), (4, 1), (5, 2)] {
        let coeffs = random_unit(&mut rng, n);
        let spec = ExperimentSpec::new(coeffs.clone()).with_observers(k);
        let chain = MeasurementChain::new(&spec).unwrap();
        let ours = chain.evolve(&chain.prepare(&coeffs).unwrap()).unwrap();
        let reference = oracle_evolve(n, k, &oracle_initial(n, k, &coeffs));
        assert!(max_diff(ours.amplitudes(), &reference) <= 1e-15, "n={n} k={k}");
    }
}

#[test]
fn five_versions_two_observers() {
    let a = Complex64::new(1.0 / 5f64.sqrt(), 0.0);
    let spec = ExperimentSpec::new(vec![a; 5]).with_observers(2);
    let report = run_measurement_chain(&spec).unwrap();
    assert!(report.all_passed(), "{:?}", report.checks());
    assert_eq!(report.branches.len(), 5);

    // every nonzero amplitude of the oracle state has both observers agreeing
    let reference = oracle_evolve(5, 2, &oracle_initial(5, 2, &[a; 5]));
    let dims = chain_dims(5, 2);
    let mut records = Vec::new();
    for (i, amp) in reference.iter().enumerate() {
        if amp.norm() > 0.0 {
            let l = digits(i, &dims);
            assert_eq!(l[6], l[7]);
            records.push(l[6]);
        }
    }
    records.sort_unstable();
    assert_eq!(records, vec![1, 2, 3, 4, 5]);
    let table: Vec<usize> = report.branches.iter().map(|b| b.label[0]).collect();
    assert_eq!(table, records);
}

#[test]
fn three_observers_agree_with_random_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let coeffs = random_unit(&mut rng, 3);
        let check = multi_observer_agreement(&ExperimentSpec::new(coeffs.clone()).with_observers(3)).unwrap();
        assert!(check.residual <= 1e-24);

        let reference = oracle_evolve(3, 3, &oracle_initial(3, 3, &coeffs));
        let dims = chain_dims(3, 3);
        let disagreement: f64 = reference
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let l = digits(*i, &dims);
                l[4] != l[5] || l[5] != l[6]
            })
            .map(|(_, a)| a.norm_sqr())
            .sum();
        assert_eq!(disagreement, 0.0);
    }
}

#[test]
fn four_version_independence_against_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let coeffs = random_unit(&mut rng, 4);
    let check = coefficient_independence_check(&ExperimentSpec::new(coeffs.clone())).unwrap();
    assert!(check.passed(), "{check:?}");

    // per-branch dense oracle: evolve a(j) e_j alone and compare with the
    // slice of the full evolution sitting on path j
    let dims = chain_dims(4, 1);
    let full = oracle_evolve(4, 1, &oracle_initial(4, 1, &coeffs));
    for j in 0..4 {
        let mut only = vec![Complex64::new(0.0, 0.0); 4];
        only[j] = coeffs[j];
        let alone = oracle_evolve(4, 1, &oracle_initial(4, 1, &only));
        let slice: Vec<Complex64> = full
            .iter()
            .enumerate()
            .map(|(i, a)| if digits(i, &dims)[0] == j { *a } else { Complex64::new(0.0, 0.0) })
            .collect();
        assert!(max_diff(&slice, &alone) <= 1e-15);
    }
}

#[test]
fn apply_matches_dense_matvec() {
    let spec = ExperimentSpec::from_real(&[0.6, 0.8]);
    let chain = MeasurementChain::new(&spec).unwrap();
    let layout = chain.layout();
    let n = layout.total_dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_unit(&mut rng, n);
    let state = branchsim_core::StateVector::from_amplitudes(layout.clone(), x.clone()).unwrap();

    let ops = [
        build_detection_unitary(layout).unwrap(),
        build_perception_unitary(layout, "Obs", &ClassicalConfigs::one_hot_over(layout, branchsim_core::Role::Detector)).unwrap(),
    ];
    for op in &ops {
        let dense = DMatrix::from_row_slice(n, n, &op.to_dense());
        let expected = &dense * DVector::from_column_slice(&x);
        let ours = apply_unitary(op, &state).unwrap();
        assert!(max_diff(ours.amplitudes(), expected.as_slice()) <= 1e-15);
        assert!((ours.norm() - 1.0).abs() <= 1e-12);
        assert!((dense.adjoint() * &dense - DMatrix::identity(n, n)).camax() <= 1e-12);
    }
}

/// Partial trace by explicit summation over the traced digits, then
/// nalgebra's Hermitian eigenvalues.
fn oracle_entropy(psi: &[Complex64], dims: &[usize], keep: &[usize]) -> f64 {
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let mut rho = DMatrix::<Complex64>::zeros(kept_dim, kept_dim);
    for (i, a) in psi.iter().enumerate() {
        for (j, b) in psi.iter().enumerate() {
            let (li, lj) = (digits(i, dims), digits(j, dims));
            let traced_equal = (0..dims.len()).filter(|r| !keep.contains(r)).all(|r| li[r] == lj[r]);
            if traced_equal {
                let ki = keep.iter().fold(0, |acc, &r| acc * dims[r] + li[r]);
                let kj = keep.iter().fold(0, |acc, &r| acc * dims[r] + lj[r]);
                rho[(ki, kj)] += a * b.conj();
            }
        }
    }
    let eig = rho.symmetric_eigenvalues();
    eig.iter().filter(|&&l| l >= 1e-14).map(|&l| -l * l.log2()).sum()
}

#[test]
fn observer_entropy_matches_oracle() {
    let spec = ExperimentSpec::from_real(&[0.6, 0.8]);
    let chain = MeasurementChain::new(&spec).unwrap();
    let final_state = chain.evolve(&chain.prepare(&spec.coefficients).unwrap()).unwrap();

    let rho = reduced_density_matrix(&final_state, &["Obs"]).unwrap();
    rho.validate().unwrap();
    let ours = von_neumann_entropy(&rho).unwrap();
    let oracle = oracle_entropy(final_state.amplitudes(), &chain_dims(2, 1), &[3]);
    assert!((ours - oracle).abs() <= 1e-12);
    assert!((ours - ENTROPY_036_064).abs() <= 1e-12);
    assert!((oracle - ENTROPY_036_064).abs() <= 1e-12);
}

#[test]
fn redundancy_plateau() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let coeffs = random_unit(&mut rng, 2);
        let spec = ExperimentSpec::new(coeffs.clone());
        let chain = MeasurementChain::new(&spec).unwrap();
        let final_state = chain.evolve(&chain.prepare(&coeffs).unwrap()).unwrap();
        let (p, q) = (coeffs[0].norm_sqr(), coeffs[1].norm_sqr());
        let h = [p, q].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum::<f64>();
        for fragment in [&["DH"][..], &["DV"], &["DH", "DV"], &["Obs"]] {
            let info = fragment_mutual_information(&final_state, fragment, &["path"]).unwrap();
            assert!((info - h).abs() <= 1e-9, "{fragment:?}: {info} vs {h}");
        }
        // oracle for I(path:DH) = S(path) + S(DH) - S(path,DH)
        let dims = chain_dims(2, 1);
        let amps = final_state.amplitudes();
        let oracle = oracle_entropy(amps, &dims, &[0]) + oracle_entropy(amps, &dims, &[1]) - oracle_entropy(amps, &dims, &[0, 1]);
        assert!((oracle - h).abs() <= 1e-9);
    }
}

#[test]
fn unused_photon_register_carries_no_information() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let spec = ExperimentSpec::from_real(&[h, h]).with_photons(true);
    let chain = MeasurementChain::new(&spec).unwrap();
    // before emission the photons are still in vacuum
    let prepared = chain.prepare(&spec.coefficients).unwrap();
    let info = fragment_mutual_information(&prepared, &["ph1"], &["path"]).unwrap();
    assert!(info.abs() <= 1e-12);
    // after the full chain the photons hold the record
    let final_state = chain.evolve(&prepared).unwrap();
    let info = fragment_mutual_information(&final_state, &["ph1"], &["path"]).unwrap();
    assert!((info - 1.0).abs() <= 1e-9);
}
