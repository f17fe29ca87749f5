//! Shared final-measurement sampling for the compact engine and baselines.
//!
//! When the search register lies in the invariant plane, its measurement
//! marginal puts equal weight `ps / m` on each target and `(1 - ps) / (N - m)`
//! on each non-target. This samples that marginal from a single uniform draw
//! by binary-searching the cumulative distribution, with target ranks taken
//! from the sorted target list. O(log N) per sample, no register enumeration.

use rand::Rng;

use crate::problem::SearchProblem;

/// Sample a basis index given the total target weight `p_success`.
/// Consumes exactly one `f64` from the stream.
pub fn sample_plane_marginal<R: Rng + ?Sized>(
    problem: &SearchProblem,
    p_success: f64,
    rng: &mut R,
) -> u64 {
    let u: f64 = rng.random();
    index_at_cumulative(problem, p_success, u)
}

/// Smallest index whose cumulative marginal weight exceeds `u`.
pub fn index_at_cumulative(problem: &SearchProblem, p_success: f64, u: f64) -> u64 {
    let n_states = problem.n_states();
    let m = problem.target_count();
    let w_target = p_success / m as f64;
    let w_other = (1.0 - p_success) / (n_states - m) as f64;
    let cumulative = |x: u64| {
        let t = problem.targets_at_or_below(x);
        t as f64 * w_target + (x + 1 - t) as f64 * w_other
    };
    let (mut lo, mut hi) = (0u64, n_states - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if u < cumulative(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}
