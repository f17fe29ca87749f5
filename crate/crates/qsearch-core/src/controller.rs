//! The measurement-feedback search loop.
//!
//! Each iteration resets the flag, writes the oracle value into it, applies
//! one Grover iterate, measures the flag, and bumps the matching counter.
//! When `C1/C0` reaches the threshold the search register is measured and the
//! outcome is verified with one classical query. A failed attempt restarts
//! from scratch with fresh counters.
//!
//! Two dynamics modes are provided and never silently conflated:
//!
//! * `Physical` — the flag measurement genuinely collapses the entangled
//!   register, per the engines' semantics.
//! * `Idealized` — the flag bit is sampled from the undisturbed rotation
//!   schedule `g_k(p)` without touching the trajectory. This is the process
//!   assumed by the expected-ratio analysis; the harness audits both
//!   readings side by side.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::rotation_success;
use crate::problem::SearchProblem;
use crate::sampling::sample_plane_marginal;
use crate::statevector::{MeasurementOutcome, QuantumState, StateError, DEFAULT_QUBIT_CAP};
use crate::subspace::{SubspaceError, SubspaceState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsMode {
    Idealized,
    Physical,
}

impl DynamicsMode {
    pub const ALL: [DynamicsMode; 2] = [DynamicsMode::Idealized, DynamicsMode::Physical];

    pub fn label(self) -> &'static str {
        match self {
            DynamicsMode::Idealized => "idealized",
            DynamicsMode::Physical => "physical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    /// Full statevector over `2^(n+1)` amplitudes.
    Full,
    /// Two-angle invariant-plane engine, exact at any `N`.
    Compact,
}

impl EngineKind {
    pub fn label(self) -> &'static str {
        match self {
            EngineKind::Full => "full",
            EngineKind::Compact => "compact",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ControllerError {
    #[error("set_val must be positive, got {0}")]
    InvalidSetVal(f64),
    #[error("iteration and attempt caps must be at least 1")]
    InvalidCaps,
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Threshold on `C1/C0` that triggers the final measurement.
    pub set_val: f64,
    pub mode: DynamicsMode,
    pub engine: EngineKind,
    /// `None` derives `ceil(10 sqrt(N))` at run time; the loop needs some cap
    /// to guarantee termination.
    pub max_iterations_per_attempt: Option<u64>,
    pub max_attempts: u64,
    /// Register cap for the full engine.
    pub qubit_cap: u32,
    /// Record per-iteration `(P(1), bit)` pairs in the attempt record.
    pub record_trace: bool,
    /// Diagnostic: run exactly `h + 1` iterations and ignore the ratio test.
    /// Used to measure counter statistics at a fixed horizon.
    pub fixed_horizon: Option<u64>,
}

impl ControllerConfig {
    pub fn new(mode: DynamicsMode, engine: EngineKind) -> Self {
        Self {
            set_val: 1.0,
            mode,
            engine,
            max_iterations_per_attempt: None,
            max_attempts: 64,
            qubit_cap: DEFAULT_QUBIT_CAP,
            record_trace: false,
            fixed_horizon: None,
        }
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.set_val > 0.0) {
            return Err(ControllerError::InvalidSetVal(self.set_val));
        }
        if self.max_attempts == 0 || self.max_iterations_per_attempt == Some(0) {
            return Err(ControllerError::InvalidCaps);
        }
        Ok(())
    }

    pub fn iteration_cap(&self, problem: &SearchProblem) -> u64 {
        self.max_iterations_per_attempt
            .unwrap_or_else(|| (10.0 * (problem.n_states() as f64).sqrt()).ceil() as u64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub c0: u64,
    pub c1: u64,
}

impl Counters {
    pub fn record(&mut self, bit: u8) {
        if bit == 1 {
            self.c1 += 1;
        } else {
            self.c0 += 1;
        }
    }
}

/// Stopping rule on the counter ratio. With `c0 = 0` the ratio is taken as
/// infinite once any `1` has been seen; before any measurement the rule
/// never fires.
pub fn ratio_reached(counters: Counters, set_val: f64) -> bool {
    match (counters.c0, counters.c1) {
        (0, 0) => false,
        (0, _) => true,
        (c0, c1) => c1 as f64 / c0 as f64 >= set_val,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Threshold,
    IterationCap,
}

impl StopReason {
    pub fn label(self) -> &'static str {
        match self {
            StopReason::Threshold => "threshold",
            StopReason::IterationCap => "iteration_cap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub probability_of_one: f64,
    pub bit: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub iterations: u64,
    pub counters: Counters,
    /// `2 * iterations + 1`: two per loop pass plus the final verification.
    pub oracle_queries: u64,
    pub stop_reason: StopReason,
    pub measured_index: u64,
    pub success: bool,
    /// Register success probability at the moment of the final measurement.
    pub success_probability_at_stop: f64,
    pub trace: Option<Vec<TraceStep>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub attempts: Vec<AttemptRecord>,
    pub found_index: Option<u64>,
    pub total_queries: u64,
}

struct LoopTally {
    iterations: u64,
    counters: Counters,
    trace: Option<Vec<TraceStep>>,
}

impl LoopTally {
    fn new(record_trace: bool) -> Self {
        Self {
            iterations: 0,
            counters: Counters::default(),
            trace: record_trace.then(Vec::new),
        }
    }

    fn record(&mut self, out: MeasurementOutcome) {
        self.iterations += 1;
        self.counters.record(out.bit);
        if let Some(trace) = &mut self.trace {
            trace.push(TraceStep { probability_of_one: out.probability_of_one, bit: out.bit });
        }
    }

    fn stop(&self, config: &ControllerConfig, cap: u64) -> Option<StopReason> {
        if let Some(h) = config.fixed_horizon {
            return (self.iterations >= h + 1).then_some(StopReason::IterationCap);
        }
        if ratio_reached(self.counters, config.set_val) {
            return Some(StopReason::Threshold);
        }
        (self.iterations >= cap).then_some(StopReason::IterationCap)
    }
}

/// One pass of the loop: iterate until the stopping rule or the iteration cap
/// fires, then measure the register and verify the outcome classically.
pub fn run_attempt<R: Rng + ?Sized>(
    problem: &SearchProblem,
    config: &ControllerConfig,
    rng: &mut R,
) -> Result<AttemptRecord, ControllerError> {
    config.validate()?;
    let mut prob = problem.clone();
    prob.reset_queries();
    let cap = config.iteration_cap(problem);

    let record = match (config.mode, config.engine) {
        (DynamicsMode::Idealized, engine) => {
            if engine == EngineKind::Full && prob.n() > config.qubit_cap {
                return Err(StateError::RegisterTooLarge { n: prob.n(), cap: config.qubit_cap }
                    .into());
            }
            run_idealized(&mut prob, config, cap, rng)
        }
        (DynamicsMode::Physical, EngineKind::Full) => {
            run_physical_full(&mut prob, config, cap, rng)?
        }
        (DynamicsMode::Physical, EngineKind::Compact) => {
            run_physical_compact(&mut prob, config, cap, rng)?
        }
    };
    debug_assert_eq!(record.oracle_queries, 2 * record.iterations + 1);
    debug_assert_eq!(record.counters.c0 + record.counters.c1, record.iterations);
    Ok(record)
}

fn run_idealized<R: Rng + ?Sized>(
    prob: &mut SearchProblem,
    config: &ControllerConfig,
    cap: u64,
    rng: &mut R,
) -> AttemptRecord {
    let theta = prob.target_fraction().sqrt().asin();
    let mut tally = LoopTally::new(config.record_trace);
    let mut rotations = 0u64;
    let stop_reason = loop {
        let p_one = rotation_success(theta, rotations as f64);
        prob.charge_queries(2);
        let u: f64 = rng.random();
        let bit = u8::from(u < p_one);
        rotations += 1;
        tally.record(MeasurementOutcome { bit, probability_of_one: p_one });
        if let Some(reason) = tally.stop(config, cap) {
            break reason;
        }
    };
    let p_success = rotation_success(theta, rotations as f64);
    let measured_index = sample_plane_marginal(prob, p_success, rng);
    let success = prob.query_oracle(measured_index);
    finish(tally, prob, stop_reason, measured_index, success, p_success)
}

fn run_physical_full<R: Rng + ?Sized>(
    prob: &mut SearchProblem,
    config: &ControllerConfig,
    cap: u64,
    rng: &mut R,
) -> Result<AttemptRecord, ControllerError> {
    let mut state = QuantumState::uniform_with_cap(prob, config.qubit_cap)?;
    let mut tally = LoopTally::new(config.record_trace);
    let mut last = MeasurementOutcome { bit: 0, probability_of_one: 0.0 };
    let stop_reason = loop {
        state.reset_flag(last);
        state.apply_flag_oracle(prob);
        state.apply_grover_iterate(prob);
        last = state.measure_flag(rng);
        tally.record(last);
        if let Some(reason) = tally.stop(config, cap) {
            break reason;
        }
    };
    let p_success = state.success_probability(prob);
    let measured_index = state.measure_search_register(rng);
    let success = prob.query_oracle(measured_index);
    Ok(finish(tally, prob, stop_reason, measured_index, success, p_success))
}

fn run_physical_compact<R: Rng + ?Sized>(
    prob: &mut SearchProblem,
    config: &ControllerConfig,
    cap: u64,
    rng: &mut R,
) -> Result<AttemptRecord, ControllerError> {
    let mut state = SubspaceState::from_problem(prob)?;
    let mut tally = LoopTally::new(config.record_trace);
    let stop_reason = loop {
        let out = state.iterate_and_measure(prob, rng);
        tally.record(out);
        if let Some(reason) = tally.stop(config, cap) {
            break reason;
        }
    };
    let p_success = state.success_probability();
    let measured_index = sample_plane_marginal(prob, p_success, rng);
    let success = prob.query_oracle(measured_index);
    Ok(finish(tally, prob, stop_reason, measured_index, success, p_success))
}

fn finish(
    tally: LoopTally,
    prob: &SearchProblem,
    stop_reason: StopReason,
    measured_index: u64,
    success: bool,
    p_success: f64,
) -> AttemptRecord {
    AttemptRecord {
        iterations: tally.iterations,
        counters: tally.counters,
        oracle_queries: prob.queries(),
        stop_reason,
        measured_index,
        success,
        success_probability_at_stop: p_success,
        trace: tally.trace,
    }
}

/// Restart-on-failure outer loop: fresh state and fresh counters per attempt.
pub fn run_search<R: Rng + ?Sized>(
    problem: &SearchProblem,
    config: &ControllerConfig,
    rng: &mut R,
) -> Result<SearchResult, ControllerError> {
    config.validate()?;
    let mut attempts = Vec::new();
    let mut total_queries = 0u64;
    let mut found_index = None;
    for _ in 0..config.max_attempts {
        let record = run_attempt(problem, config, rng)?;
        total_queries += record.oracle_queries;
        let done = record.success;
        let index = record.measured_index;
        attempts.push(record);
        if done {
            found_index = Some(index);
            break;
        }
    }
    Ok(SearchResult { attempts, found_index, total_queries })
}
