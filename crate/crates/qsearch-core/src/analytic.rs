//! Closed-form and quadrature evaluation of the rotation-count model.
//!
//! The success probability after `r` iterates from the uniform state is
//! `g_r(p) = sin^2((2r+1) asin(sqrt(p)))`. The expected counter ratio
//! `<C1>/<C0>` over a horizon is computed three independent ways: a discrete
//! sum over integer rotation counts, an adaptive-quadrature integral over a
//! continuous rotation variable, and the closed form
//!
//! ```text
//! (2X - sin 2X - (2 theta - sin 2 theta))
//! ---------------------------------------     X = asin(sqrt(g)),
//! (2X + sin 2X - (2 theta + sin 2 theta))     theta = asin(sqrt(p)).
//! ```
//!
//! At `X = theta` the closed form is 0/0; the limit is `tan^2 X`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("probability {0} outside (0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("target level g = {g} below start level p = {p}; cannot de-amplify")]
    TargetBelowStart { p: f64, g: f64 },
    #[error("angle X = {x} below theta = {theta}")]
    AngleBelowTheta { theta: f64, x: f64 },
}

/// Threshold below which the closed form switches to its `tan^2 X` limit.
const LIMIT_EPS: f64 = 1e-9;

/// `g_r(p) = sin^2((2r+1) asin(sqrt(p)))`.
pub fn success_after_rotations(p: f64, r: u64) -> Result<f64, AnalyticError> {
    check_probability(p)?;
    Ok(rotation_success(p.sqrt().asin(), r as f64))
}

/// Same quantity with a precomputed `theta` and a real-valued rotation count.
pub fn rotation_success(theta: f64, r: f64) -> f64 {
    let s = ((2.0 * r + 1.0) * theta).sin();
    s * s
}

/// Integer rotation count maximizing `g_r(p)`, found by scanning the first
/// quarter period; ties break toward the smaller count.
pub fn optimal_rotation_count(p: f64) -> Result<u64, AnalyticError> {
    check_probability(p)?;
    let theta = p.sqrt().asin();
    let upper = (FRAC_PI_2 / (2.0 * theta)).ceil() as u64 + 1;
    let mut best = (0u64, rotation_success(theta, 0.0));
    for r in 1..=upper {
        let g = rotation_success(theta, r as f64);
        if g > best.1 + 1e-15 {
            best = (r, g);
        }
    }
    Ok(best.0)
}

/// Real-valued rotation count taking the success level from `p` to `g`:
/// `Rn = (asin(sqrt(g)) / asin(sqrt(p)) - 1) / 2`.
pub fn rotations_to_reach(p: f64, g: f64) -> Result<f64, AnalyticError> {
    check_probability(p)?;
    if p >= 1.0 {
        return Err(AnalyticError::ProbabilityOutOfRange(p));
    }
    if g < p || g > 1.0 {
        return Err(AnalyticError::TargetBelowStart { p, g });
    }
    Ok((g.sqrt().asin() / p.sqrt().asin() - 1.0) / 2.0)
}

/// Discrete expected counter ratio: `sum_{r=0..Rn} g_r / sum_{r=0..Rn} (1 - g_r)`.
/// Returns infinity if every term of the denominator vanishes.
pub fn expected_ratio_discrete(p: f64, rn: u64) -> Result<f64, AnalyticError> {
    check_probability(p)?;
    if p >= 1.0 {
        return Err(AnalyticError::ProbabilityOutOfRange(p));
    }
    let theta = p.sqrt().asin();
    let mut ones = 0.0;
    let mut zeros = 0.0;
    for r in 0..=rn {
        let g = rotation_success(theta, r as f64);
        ones += g;
        zeros += 1.0 - g;
    }
    if zeros == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(ones / zeros)
}

/// Integral expected counter ratio, evaluated by adaptive quadrature over the
/// continuous rotation variable. Independent of [`expected_ratio_closed`] by
/// construction; the two must agree to tight tolerance.
pub fn expected_ratio_integral(p: f64, g: f64) -> Result<f64, AnalyticError> {
    let rn = rotations_to_reach(p, g)?;
    let theta = p.sqrt().asin();
    if rn < 1e-12 {
        // 0/0 at zero horizon; the limit of the ratio is tan^2(theta).
        let t = theta.tan();
        return Ok(t * t);
    }
    let ones = adaptive_simpson(|r| rotation_success(theta, r), 0.0, rn, 1e-10, 60);
    let zeros = adaptive_simpson(|r| 1.0 - rotation_success(theta, r), 0.0, rn, 1e-10, 60);
    Ok(ones / zeros)
}

/// Closed-form expected counter ratio in terms of the two angles, with the
/// `tan^2 X` limit branch at `X = theta`.
pub fn expected_ratio_closed(theta: f64, x: f64) -> Result<f64, AnalyticError> {
    if x < theta {
        return Err(AnalyticError::AngleBelowTheta { theta, x });
    }
    if (x - theta).abs() < LIMIT_EPS {
        let t = x.tan();
        return Ok(t * t);
    }
    let num = 2.0 * x - (2.0 * x).sin() - (2.0 * theta - (2.0 * theta).sin());
    let den = 2.0 * x + (2.0 * x).sin() - (2.0 * theta + (2.0 * theta).sin());
    Ok(num / den)
}

/// The same ratio parameterized by probabilities instead of angles. This is
/// deliberately a thin delegation so both parameterizations share one code
/// path.
pub fn expected_ratio_from_probabilities(p: f64, g: f64) -> Result<f64, AnalyticError> {
    check_probability(p)?;
    if g < p || g > 1.0 {
        return Err(AnalyticError::TargetBelowStart { p, g });
    }
    expected_ratio_closed(p.sqrt().asin(), g.sqrt().asin())
}

/// Threshold on `C1/C0` recommended for the stopping rule.
pub fn recommended_set_val() -> f64 {
    1.0
}

/// One cell of the ratio table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatioPrediction {
    pub theta: f64,
    pub x: f64,
    pub ratio: f64,
}

/// The 3x3 ratio grid: rows are starting fractions `p in {1/N -> 0, 1/4, 1/2}`
/// (`theta in {0, pi/6, pi/4}`), columns are target levels
/// `g in {1/2, 3/4, 1}` (`X in {pi/4, pi/3, pi/2}`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table1Grid {
    pub cells: [[RatioPrediction; 3]; 3],
}

pub const TABLE1_THETAS: [f64; 3] = [0.0, FRAC_PI_6, FRAC_PI_4];
pub const TABLE1_XS: [f64; 3] = [FRAC_PI_4, FRAC_PI_3, FRAC_PI_2];
/// Reference values as printed in the literature table, two decimals.
pub const TABLE1_PRINTED: [[f64; 3]; 3] =
    [[0.23, 0.42, 1.00], [0.60, 1.00, 2.41], [1.00, 1.69, 4.50]];
pub const TABLE1_CASE_LABELS: [&str; 3] = ["I", "II", "III"];

pub fn table1() -> Table1Grid {
    let mut cells = [[RatioPrediction { theta: 0.0, x: 0.0, ratio: 0.0 }; 3]; 3];
    for (i, &theta) in TABLE1_THETAS.iter().enumerate() {
        for (j, &x) in TABLE1_XS.iter().enumerate() {
            let ratio = expected_ratio_closed(theta, x)
                .expect("grid angles satisfy theta <= X");
            cells[i][j] = RatioPrediction { theta, x, ratio };
        }
    }
    Table1Grid { cells }
}

fn check_probability(p: f64) -> Result<(), AnalyticError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(AnalyticError::ProbabilityOutOfRange(p));
    }
    Ok(())
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_recurse(&f, a, b, fa, fm, fb, whole, tol, max_depth)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
