use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dynamics::{mixed_record_level, EMPTY_LEVEL};
use crate::{StateVector, SubsystemLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Passed,
    Failed,
    Skipped,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Passed => "pass",
            CheckStatus::Failed => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// Measured quantity compared against `tolerance`.
    pub residual: f64,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl CheckResult {
    /// Passes iff `residual <= tolerance` (NaN fails).
    pub fn measured(name: &str, residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance { CheckStatus::Passed } else { CheckStatus::Failed };
        CheckResult { name: name.into(), status, residual, tolerance, note: None }
    }

    pub fn skipped(name: &str, tolerance: f64, note: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Skipped,
            residual: 0.0,
            tolerance,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Passed
    }
}

/// One row of the branch table.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRow {
    /// Record label (observer level, or detector configuration).
    pub label: Vec<usize>,
    pub weight: f64,
    pub message: String,
}

/// Nonzero amplitudes of a state, capped at [`StateSummary::MAX_SUPPORT`]
/// entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSummary {
    pub dimension: usize,
    pub norm: f64,
    pub support_size: usize,
    pub support: Vec<(usize, Vec<usize>, Complex64)>,
}

impl StateSummary {
    pub const MAX_SUPPORT: usize = 256;

    pub fn of(state: &StateVector, threshold: f64) -> Self {
        let layout = state.layout();
        let nonzero: Vec<(usize, Complex64)> = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > threshold)
            .map(|(i, a)| (i, *a))
            .collect();
        StateSummary {
            dimension: state.dimension(),
            norm: state.norm(),
            support_size: nonzero.len(),
            support: nonzero
                .into_iter()
                .take(Self::MAX_SUPPORT)
                .map(|(i, a)| (i, layout.decode(i), a))
                .collect(),
        }
    }
}

/// Text an observer at `level` has written.
pub fn message_text(level: usize, observer_dimension: usize) -> String {
    if level == EMPTY_LEVEL {
        "sees nothing".into()
    } else if level == mixed_record_level(observer_dimension) {
        "I see a mixed state".into()
    } else {
        format!("I see only classical state {level}")
    }
}

/// Outcome of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: String,
    pub layout: Arc<SubsystemLayout>,
    pub coefficients: Vec<Complex64>,
    pub theta: Option<f64>,
    pub final_state: StateSummary,
    pub branches: Vec<BranchRow>,
    /// Record labels whose weight fell below the pruning threshold.
    pub pruned: Vec<(Vec<usize>, f64)>,
    checks: Vec<CheckResult>,
}

impl RunReport {
    pub fn new(
        experiment: impl Into<String>,
        layout: Arc<SubsystemLayout>,
        coefficients: Vec<Complex64>,
        final_state: StateSummary,
    ) -> Self {
        RunReport {
            experiment: experiment.into(),
            layout,
            coefficients,
            theta: None,
            final_state,
            branches: Vec::new(),
            pruned: Vec::new(),
            checks: Vec::new(),
        }
    }

    /// Adds a check. Panics if a check with the same name is already present.
    pub fn add_check(&mut self, check: CheckResult) {
        assert!(
            self.check(&check.name).is_none(),
            "check `{}` recorded twice",
            check.name
        );
        self.checks.push(check);
    }

    pub fn checks(&self) -> &[CheckResult] {
        &self.checks
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Keeps only the checks whose names satisfy `keep`.
    pub fn retain_checks(&mut self, mut keep: impl FnMut(&str) -> bool) {
        self.checks.retain(|c| keep(&c.name));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Failed)
    }
}
