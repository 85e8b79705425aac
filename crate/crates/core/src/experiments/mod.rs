//! The measurement-chain experiments and the checks run on them.
//!
//! * [`run_measurement_chain`]: path superposition, detection, optional
//!   photon emission, then one perception step per observer.
//! * [`decompose_branches`]: relative-state decomposition on a record.
//! * [`coefficient_independence_check`], [`no_signaling_check`] and
//!   [`multi_observer_agreement`]: linearity consequences, checked
//!   numerically.
//! * [`run_appendix_rotation`]: the same chain viewed in a rotated
//!   particle/detector basis.

mod appendix;
mod branches;
mod chain;
mod checks;
mod report;
mod spec;

pub use appendix::{primed_coefficients_formula, run_appendix_rotation};
pub use branches::{decompose, decompose_branches, reconstruct, Branch, Decomposition};
pub use chain::{run_measurement_chain, MeasurementChain};
pub use checks::{
    coefficient_independence_check, coefficient_independence_with_versions, multi_observer_agreement,
    no_signaling_check, version_detector_flip, version_phase_perturbation,
};
pub use report::{message_text, BranchRow, CheckResult, CheckStatus, RunReport, StateSummary};
pub use spec::ExperimentSpec;

/// Check names used in reports.
pub mod check_names {
    pub const UNITARITY: &str = "unitarity";
    pub const NORM_PRESERVATION: &str = "norm_preservation";
    pub const FINAL_STRUCTURE: &str = "final_structure";
    pub const BRANCH_ORTHOGONALITY: &str = "branch_orthogonality";
    pub const OBSERVER_COHERENCE: &str = "observer_coherence";
    pub const BORN_WEIGHTS: &str = "born_weights";
    pub const MIXED_RECORD: &str = "mixed_record";
    pub const MULTI_OBSERVER_AGREEMENT: &str = "multi_observer_agreement";
    pub const COEFFICIENT_INDEPENDENCE: &str = "coefficient_independence";
    pub const NO_SIGNALING: &str = "no_signaling";
    pub const PRIMED_COEFFICIENTS: &str = "primed_coefficients";
    pub const PRIMED_EVOLUTION: &str = "primed_evolution";
    pub const RECORD_BASIS_INVARIANCE: &str = "record_basis_invariance";

    /// Every check a chain run can produce, in report order.
    pub const CHAIN: &[&str] = &[
        UNITARITY,
        NORM_PRESERVATION,
        FINAL_STRUCTURE,
        BRANCH_ORTHOGONALITY,
        OBSERVER_COHERENCE,
        BORN_WEIGHTS,
        MIXED_RECORD,
        MULTI_OBSERVER_AGREEMENT,
        COEFFICIENT_INDEPENDENCE,
        NO_SIGNALING,
    ];

    /// Every check an appendix rotation run produces, in report order.
    pub const APPENDIX: &[&str] =
        &[PRIMED_COEFFICIENTS, PRIMED_EVOLUTION, MIXED_RECORD, RECORD_BASIS_INVARIANCE];
}
