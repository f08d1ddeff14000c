//! Pass/fail bookkeeping shared by every checker.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    /// Name of the operation or identity that failed.
    pub op: String,
    /// Serialized counterexample in the textual formats the library parses.
    pub counterexample: String,
}

/// Outcome of a batch of exact checks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub attempted: usize,
    pub failures: Vec<Failure>,
}

impl Verdict {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one check; `detail` is only built on failure.
    pub fn check(&mut self, op: &str, ok: bool, detail: impl FnOnce() -> String) -> bool {
        self.attempted += 1;
        if !ok {
            self.failures.push(Failure { op: op.to_string(), counterexample: detail() });
        }
        ok
    }

    pub fn fail(&mut self, op: &str, detail: impl Into<String>) {
        self.attempted += 1;
        self.failures.push(Failure { op: op.to_string(), counterexample: detail.into() });
    }

    pub fn merge(&mut self, other: Verdict) {
        self.attempted += other.attempted;
        self.failures.extend(other.failures);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn passed_count(&self) -> usize {
        self.attempted - self.failures.len()
    }

    pub fn first_failure(&self) -> Option<&Failure> {
        self.failures.first()
    }
}
