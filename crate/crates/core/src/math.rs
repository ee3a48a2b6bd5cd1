//! Small numeric helpers shared across modules.

/// `ln(Σ exp(x_i))` with max-subtraction. Terms equal to `-inf` contribute
/// nothing; an empty slice or all `-inf` gives `-inf`.
///
/// The reduction runs in slice order, so the result is reproducible for a
/// fixed ordering of terms.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// Ordinary least-squares fit `y ≈ intercept + slope·x`. Returns `None` with
/// fewer than two points or zero spread in `x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    debug_assert_eq!(xs.len(), ys.len());
    let len = xs.len();
    if len < 2 {
        return None;
    }
    let mean_x = xs.iter().sum::<f64>() / len as f64;
    let mean_y = ys.iter().sum::<f64>() / len as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, mean_y - slope * mean_x))
}

/// Natural log of the binomial coefficient, computed by summation so that it
/// stays finite for arguments far beyond `u64` factorials.
pub fn ln_choose(n: f64, k: u64) -> f64 {
    (0..k)
        .map(|i| (n - i as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Exact binomial coefficient; `None` on overflow.
pub fn choose(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}
