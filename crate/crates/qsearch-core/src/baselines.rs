//! Reference searchers for head-to-head comparisons: canonical Grover with a
//! known target count, a randomized unknown-count schedule, and classical
//! uniform sampling. All of them charge the same oracle-query currency.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::optimal_rotation_count;
use crate::problem::SearchProblem;
use crate::sampling::sample_plane_marginal;
use crate::subspace::SubspaceState;

/// Safety cap on restarts for the quantum baselines.
const MAX_RESTARTS: u64 = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("claimed target count {claimed} does not match the instance ({actual})")]
    TargetCountMismatch { claimed: u64, actual: u64 },
    #[error(transparent)]
    Analytic(#[from] crate::analytic::AnalyticError),
    #[error(transparent)]
    Subspace(#[from] crate::subspace::SubspaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineAlgorithm {
    Canonical,
    Bbht,
    Classical,
}

impl BaselineAlgorithm {
    pub fn label(self) -> &'static str {
        match self {
            BaselineAlgorithm::Canonical => "canonical",
            BaselineAlgorithm::Bbht => "bbht",
            BaselineAlgorithm::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub algorithm: BaselineAlgorithm,
    pub found_index: Option<u64>,
    pub oracle_queries: u64,
    /// Total Grover rotations applied, or classical samples drawn.
    pub iterations_or_samples: u64,
    pub success: bool,
}

/// Canonical Grover search with the target count known in advance: apply the
/// optimal rotation count, measure, verify, restart on failure.
/// Each attempt costs `rotations + 1` queries.
pub fn canonical_grover<R: Rng + ?Sized>(
    problem: &SearchProblem,
    m_known: u64,
    rng: &mut R,
) -> Result<BaselineResult, BaselineError> {
    if m_known != problem.target_count() {
        return Err(BaselineError::TargetCountMismatch {
            claimed: m_known,
            actual: problem.target_count(),
        });
    }
    let mut prob = problem.clone();
    prob.reset_queries();
    let rotations = optimal_rotation_count(prob.target_fraction())?;
    let mut total_rotations = 0u64;
    for _ in 0..MAX_RESTARTS {
        let mut state = SubspaceState::from_problem(&prob)?;
        for _ in 0..rotations {
            state.grover_rotate(&mut prob);
        }
        total_rotations += rotations;
        let index = sample_plane_marginal(&prob, state.success_probability(), rng);
        if prob.query_oracle(index) {
            return Ok(BaselineResult {
                algorithm: BaselineAlgorithm::Canonical,
                found_index: Some(index),
                oracle_queries: prob.queries(),
                iterations_or_samples: total_rotations,
                success: true,
            });
        }
    }
    Ok(BaselineResult {
        algorithm: BaselineAlgorithm::Canonical,
        found_index: None,
        oracle_queries: prob.queries(),
        iterations_or_samples: total_rotations,
        success: false,
    })
}

/// Randomized schedule for an unknown target count: pick a rotation count
/// uniformly below a bound that grows geometrically on failure, capped at
/// `ceil(sqrt(N))`.
pub fn bbht_search<R: Rng + ?Sized>(
    problem: &SearchProblem,
    rng: &mut R,
    growth: f64,
) -> Result<BaselineResult, BaselineError> {
    debug_assert!(growth > 1.0);
    let mut prob = problem.clone();
    prob.reset_queries();
    let bound_cap = (prob.n_states() as f64).sqrt().ceil();
    let mut bound = 1.0f64;
    let mut total_rotations = 0u64;
    for _ in 0..MAX_RESTARTS {
        let rotations = rng.random_range(0..bound.ceil() as u64);
        let mut state = SubspaceState::from_problem(&prob)?;
        for _ in 0..rotations {
            state.grover_rotate(&mut prob);
        }
        total_rotations += rotations;
        let index = sample_plane_marginal(&prob, state.success_probability(), rng);
        if prob.query_oracle(index) {
            return Ok(BaselineResult {
                algorithm: BaselineAlgorithm::Bbht,
                found_index: Some(index),
                oracle_queries: prob.queries(),
                iterations_or_samples: total_rotations,
                success: true,
            });
        }
        bound = (bound * growth).min(bound_cap);
    }
    Ok(BaselineResult {
        algorithm: BaselineAlgorithm::Bbht,
        found_index: None,
        oracle_queries: prob.queries(),
        iterations_or_samples: total_rotations,
        success: false,
    })
}

/// Memoryless classical baseline: sample indices uniformly with replacement,
/// one query each, until a target is hit or `10 N` samples are spent.
pub fn classical_sampling<R: Rng + ?Sized>(
    problem: &SearchProblem,
    rng: &mut R,
) -> BaselineResult {
    let mut prob = problem.clone();
    prob.reset_queries();
    let cap = prob.n_states().saturating_mul(10);
    for samples in 1..=cap {
        let index = rng.random_range(0..prob.n_states());
        if prob.query_oracle(index) {
            return BaselineResult {
                algorithm: BaselineAlgorithm::Classical,
                found_index: Some(index),
                oracle_queries: prob.queries(),
                iterations_or_samples: samples,
                success: true,
            };
        }
    }
    BaselineResult {
        algorithm: BaselineAlgorithm::Classical,
        found_index: None,
        oracle_queries: prob.queries(),
        iterations_or_samples: cap,
        success: false,
    }
}
