//! Small statistics toolbox: Wilson binomial intervals, least-squares fits
//! for the scaling study, and medians.

/// Two-sided 95% z value.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion. Correct coverage near 0
/// and 1, unlike the normal approximation.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Smallest trial count whose worst-case (p = 1/2) Wilson half-width is at
/// most `target`.
pub fn trials_for_half_width(target: f64) -> u64 {
    assert!(target > 0.0);
    let mut n = ((Z_95 / target).powi(2) * 0.25).ceil() as u64;
    while wilson_half_width_at_half(n) > target {
        n += n / 100 + 1;
    }
    n
}

fn wilson_half_width_at_half(n: u64) -> f64 {
    let (lo, hi) = wilson_interval(n / 2, n);
    (hi - lo) / 2.0
}

/// Ordinary least squares `y = slope * x + intercept` with the coefficient of
/// determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

pub fn median_u64(values: &mut [u64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_unstable();
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] as f64 + values[mid] as f64) / 2.0
    }
}
