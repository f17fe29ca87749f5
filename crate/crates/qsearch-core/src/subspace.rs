//! Exact two-angle simulation of the same dynamics.
//!
//! Every circuit element here (uniform preparation, flag write, phase flip,
//! diffusion, flag measurement) preserves the plane spanned by the uniform
//! superposition over targets and the uniform superposition over non-targets,
//! tensored with the flag. The whole state is therefore captured by one angle
//! `phi` (amplitude `sin phi` on the target direction) plus the per-iterate
//! rotation `theta = asin(sqrt(m/N))`. Each step is O(1), so this engine is
//! exact at any `N`. The reduction itself is enforced machine-checked: the
//! trajectory-equivalence tests drive this engine and the full statevector
//! engine with a shared random stream and require identical outcomes.
//!
//! After a flag measurement the search register collapses onto one of the two
//! plane axes, so the post-iterate angle is `2 theta` (flag read 0) or
//! `pi/2 + 2 theta` (flag read 1) regardless of history.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

use crate::problem::SearchProblem;
use crate::statevector::MeasurementOutcome;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubspaceError {
    #[error("need 1 <= m < N and N >= 2, got m = {m}, N = {n_states}")]
    InvalidCounts { m: u64, n_states: u64 },
}

/// Two-angle state of the Grover-invariant plane.
///
/// Angles are kept as raw radians without range reduction; probabilities are
/// always read through `sin^2`, which is periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceState {
    phi: f64,
    theta: f64,
}

impl SubspaceState {
    pub fn from_counts(m: u64, n_states: u64) -> Result<Self, SubspaceError> {
        if n_states < 2 || m == 0 || m >= n_states {
            return Err(SubspaceError::InvalidCounts { m, n_states });
        }
        let theta = ((m as f64 / n_states as f64).sqrt()).asin();
        Ok(Self { phi: theta, theta })
    }

    pub fn from_problem(problem: &SearchProblem) -> Result<Self, SubspaceError> {
        Self::from_counts(problem.target_count(), problem.n_states())
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// One Grover iterate: `phi += 2 theta`. Charges one query.
    pub fn grover_rotate(&mut self, problem: &mut SearchProblem) {
        self.phi += 2.0 * self.theta;
        problem.charge_queries(1);
    }

    /// One controller iteration: flag write, Grover iterate, flag
    /// measurement. Charges two queries and consumes exactly one `f64` from
    /// the stream, matching the full engine step for step.
    pub fn iterate_and_measure<R: Rng + ?Sized>(
        &mut self,
        problem: &mut SearchProblem,
        rng: &mut R,
    ) -> MeasurementOutcome {
        let p_one = self.success_probability();
        problem.charge_queries(2);
        let u: f64 = rng.random();
        let bit = u8::from(u < p_one);
        self.phi = 2.0 * self.theta + if bit == 1 { FRAC_PI_2 } else { 0.0 };
        MeasurementOutcome { bit, probability_of_one: p_one }
    }

    pub fn success_probability(&self) -> f64 {
        let s = self.phi.sin();
        (s * s).clamp(0.0, 1.0)
    }
}
