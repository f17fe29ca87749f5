//! Search-problem definition: register size, marked states, and the oracle
//! query counter that serves as the complexity currency everywhere else.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest search-register size representable with `u64` basis indices
/// (one extra bit is reserved for the flag ancilla in the full engine).
pub const MAX_REGISTER_QUBITS: u32 = 62;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("search register must have between 1 and {MAX_REGISTER_QUBITS} qubits, got {0}")]
    RegisterSize(u32),
    #[error("target set must be non-empty")]
    EmptyTargets,
    #[error("target index {index} out of range for N = {n_states}")]
    TargetOutOfRange { index: u64, n_states: u64 },
    #[error("duplicate target index {0}")]
    DuplicateTarget(u64),
    #[error("all {0} basis states are marked; the search is trivial")]
    AllMarked(u64),
}

/// An unstructured search instance over `N = 2^n` basis states with a
/// non-empty, proper subset of marked targets.
///
/// Every oracle use, quantum or classical, goes through this struct so the
/// query counter is the single source of truth for cost accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchProblem {
    n: u32,
    /// Sorted, distinct indices in `[0, 2^n)`.
    targets: Vec<u64>,
    query_counter: u64,
}

impl SearchProblem {
    pub fn new(n: u32, targets: impl IntoIterator<Item = u64>) -> Result<Self, ProblemError> {
        if n == 0 || n > MAX_REGISTER_QUBITS {
            return Err(ProblemError::RegisterSize(n));
        }
        let n_states = 1u64 << n;
        let mut targets: Vec<u64> = targets.into_iter().collect();
        targets.sort_unstable();
        if targets.is_empty() {
            return Err(ProblemError::EmptyTargets);
        }
        for pair in targets.windows(2) {
            if pair[0] == pair[1] {
                return Err(ProblemError::DuplicateTarget(pair[0]));
            }
        }
        if let Some(&worst) = targets.last() {
            if worst >= n_states {
                return Err(ProblemError::TargetOutOfRange { index: worst, n_states });
            }
        }
        if targets.len() as u64 == n_states {
            return Err(ProblemError::AllMarked(n_states));
        }
        Ok(Self { n, targets, query_counter: 0 })
    }

    /// Single-target instance, the common benchmark case.
    pub fn single_target(n: u32, target: u64) -> Result<Self, ProblemError> {
        Self::new(n, [target])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total number of basis states `N = 2^n`.
    pub fn n_states(&self) -> u64 {
        1u64 << self.n
    }

    /// Number of marked states `m`.
    pub fn target_count(&self) -> u64 {
        self.targets.len() as u64
    }

    /// `p = m / N`.
    pub fn target_fraction(&self) -> f64 {
        self.target_count() as f64 / self.n_states() as f64
    }

    pub fn targets(&self) -> &[u64] {
        &self.targets
    }

    /// Membership test that does not charge a query (diagnostics only).
    pub fn is_target(&self, index: u64) -> bool {
        self.targets.binary_search(&index).is_ok()
    }

    /// Number of targets with index `<= index`; used for exact marginal
    /// sampling without enumerating the register.
    pub fn targets_at_or_below(&self, index: u64) -> u64 {
        self.targets.partition_point(|&t| t <= index) as u64
    }

    /// Classical oracle evaluation: charges one query.
    pub fn query_oracle(&mut self, index: u64) -> bool {
        self.query_counter += 1;
        self.is_target(index)
    }

    /// Charge queries for a quantum oracle use (phase flip or flag write).
    pub fn charge_queries(&mut self, count: u64) {
        self.query_counter += count;
    }

    pub fn queries(&self) -> u64 {
        self.query_counter
    }

    pub fn reset_queries(&mut self) {
        self.query_counter = 0;
    }
}
