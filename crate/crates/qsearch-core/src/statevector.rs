//! Full-Hilbert-space simulation of the feedback search circuit.
//!
//! The state covers the `n`-qubit search register plus the flag ancilla that
//! is written by the extra oracle call and measured every iteration. The flag
//! bit is the most significant index bit, so basis index `b * 2^n + x` holds
//! the amplitude of `|x>|b>`.
//!
//! The kickback ancilla of the circuit is not stored: the oracle inside the
//! Grover iterate is applied as a direct conditional phase flip, which is
//! exactly equivalent to the usual `|->`-ancilla construction and halves the
//! memory footprint. A test reproduces the explicit-ancilla circuit and
//! checks the equivalence.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::problem::SearchProblem;

/// Default register cap for the full engine: 2^25 complex amplitudes
/// (~512 MiB) at `n = 24`.
pub const DEFAULT_QUBIT_CAP: u32 = 24;

/// Norm drift tolerated before an operation is considered broken.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StateError {
    #[error("register size n = {n} exceeds the full-engine cap of {cap} qubits")]
    RegisterTooLarge { n: u32, cap: u32 },
}

/// Result of a projective measurement of the flag ancilla.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub bit: u8,
    /// Pre-measurement probability of reading `1`, kept for tracing.
    pub probability_of_one: f64,
}

/// Complex amplitude vector over search register plus flag ancilla.
#[derive(Debug, Clone)]
pub struct QuantumState {
    n: u32,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// Uniform superposition over the search register with the flag in `|0>`,
    /// i.e. the state after the Walsh-Hadamard preparation step.
    pub fn uniform(problem: &SearchProblem) -> Result<Self, StateError> {
        Self::uniform_with_cap(problem, DEFAULT_QUBIT_CAP)
    }

    pub fn uniform_with_cap(problem: &SearchProblem, cap: u32) -> Result<Self, StateError> {
        let n = problem.n();
        if n > cap {
            return Err(StateError::RegisterTooLarge { n, cap });
        }
        let big_n = 1usize << n;
        let amp = Complex64::new(1.0 / (big_n as f64).sqrt(), 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); big_n << 1];
        amps[..big_n].fill(amp);
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn big_n(&self) -> usize {
        1usize << self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Writes the oracle value into the flag: `|x>|b> -> |x>|b XOR Or(x)>`.
    /// Charges one query.
    pub fn apply_flag_oracle(&mut self, problem: &mut SearchProblem) {
        let big_n = self.big_n();
        for &t in problem.targets() {
            self.amps.swap(t as usize, t as usize + big_n);
        }
        problem.charge_queries(1);
    }

    /// One Grover iterate on the search register: conditional phase flip on
    /// the targets (one query) followed by inversion about the mean, applied
    /// within each flag branch. The flag qubit is untouched.
    pub fn apply_grover_iterate(&mut self, problem: &mut SearchProblem) {
        let big_n = self.big_n();
        for &t in problem.targets() {
            self.amps[t as usize] = -self.amps[t as usize];
            self.amps[t as usize + big_n] = -self.amps[t as usize + big_n];
        }
        problem.charge_queries(1);
        for branch in 0..2 {
            let slice = &mut self.amps[branch * big_n..(branch + 1) * big_n];
            let mean = slice.iter().sum::<Complex64>() / big_n as f64;
            for a in slice.iter_mut() {
                *a = 2.0 * mean - *a;
            }
        }
    }

    /// Projective measurement of the flag ancilla; collapses to the selected
    /// branch and renormalizes. Consumes exactly one `f64` from the stream.
    pub fn measure_flag<R: Rng + ?Sized>(&mut self, rng: &mut R) -> MeasurementOutcome {
        let big_n = self.big_n();
        let p_one: f64 = self.amps[big_n..].iter().map(|a| a.norm_sqr()).sum();
        let p_one = p_one.clamp(0.0, 1.0);
        let u: f64 = rng.random();
        let bit = u8::from(u < p_one);
        let (keep, zero) = if bit == 1 { (1, 0) } else { (0, 1) };
        self.amps[zero * big_n..(zero + 1) * big_n].fill(Complex64::new(0.0, 0.0));
        let branch_norm = self.amps[keep * big_n..(keep + 1) * big_n]
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt();
        debug_assert!(branch_norm > 0.0, "selected a zero-weight branch");
        let inv = 1.0 / branch_norm;
        for a in &mut self.amps[keep * big_n..(keep + 1) * big_n] {
            *a *= inv;
        }
        MeasurementOutcome { bit, probability_of_one: p_one }
    }

    /// Classically controlled flip returning the flag to `|0>` after a
    /// measurement; the search-register amplitudes are unchanged.
    pub fn reset_flag(&mut self, last_outcome: MeasurementOutcome) {
        let big_n = self.big_n();
        if last_outcome.bit == 1 {
            let residual: f64 = self.amps[..big_n].iter().map(|a| a.norm_sqr()).sum();
            assert!(residual <= 1e-18, "flag is not in basis state |1>, residual {residual:e}");
            for x in 0..big_n {
                self.amps.swap(x, x + big_n);
            }
        } else {
            let residual: f64 = self.amps[big_n..].iter().map(|a| a.norm_sqr()).sum();
            assert!(residual <= 1e-18, "flag is not in basis state |0>, residual {residual:e}");
        }
    }

    /// Final measurement of the search register, marginalized over the flag.
    /// Consumes exactly one `f64` from the stream; the state is consumed.
    pub fn measure_search_register<R: Rng + ?Sized>(self, rng: &mut R) -> u64 {
        let big_n = self.big_n();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for x in 0..big_n {
            acc += self.amps[x].norm_sqr() + self.amps[x + big_n].norm_sqr();
            if u < acc {
                return x as u64;
            }
        }
        (big_n - 1) as u64
    }

    /// Total weight on the target indices over both flag branches.
    /// Diagnostic only; no query is charged.
    pub fn success_probability(&self, problem: &SearchProblem) -> f64 {
        let big_n = self.big_n();
        problem
            .targets()
            .iter()
            .map(|&t| self.amps[t as usize].norm_sqr() + self.amps[t as usize + big_n].norm_sqr())
            .sum()
    }
}
