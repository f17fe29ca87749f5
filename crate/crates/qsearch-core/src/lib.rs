//! Simulators, analysis, and baselines for a measurement-feedback
//! fixed-point variant of Grover search.
//!
//! The algorithm under study runs the Grover iterate inside a feedback loop:
//! every iteration an ancilla flag is written by an extra oracle call and
//! measured, classical counters `C0`/`C1` tally the outcomes, and the search
//! register is measured once `C1/C0` reaches a threshold. The crate provides
//!
//! * [`statevector`] — exact full-register simulation including the flag
//!   ancilla and mid-circuit collapse;
//! * [`subspace`] — the same dynamics reduced to the two-dimensional
//!   Grover-invariant plane, O(1) per iteration at any `N`;
//! * [`analytic`] — the rotation-count model `g_r(p)` and the expected
//!   counter-ratio formulas with their table of reference values;
//! * [`controller`] — the feedback loop itself, in both a physical-collapse
//!   reading and the idealized reading assumed by the ratio analysis;
//! * [`baselines`] — canonical Grover, a randomized unknown-count schedule,
//!   and classical sampling for query-cost comparisons.

pub mod analytic;
pub mod baselines;
pub mod controller;
pub mod problem;
pub mod sampling;
pub mod seeding;
pub mod statevector;
pub mod subspace;

pub use analytic::{
    expected_ratio_closed, expected_ratio_discrete, expected_ratio_integral,
    optimal_rotation_count, recommended_set_val, rotations_to_reach, success_after_rotations,
    table1, Table1Grid,
};
pub use baselines::{
    bbht_search, canonical_grover, classical_sampling, BaselineAlgorithm, BaselineResult,
};
pub use controller::{
    ratio_reached, run_attempt, run_search, AttemptRecord, ControllerConfig, Counters,
    DynamicsMode, EngineKind, SearchResult, StopReason,
};
pub use problem::{ProblemError, SearchProblem};
pub use statevector::{MeasurementOutcome, QuantumState};
pub use subspace::SubspaceState;
