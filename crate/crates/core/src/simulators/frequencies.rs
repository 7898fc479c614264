//! Trading-frequency profiles.

use crate::error::{Error, Result};

/// `P_k ∝ k^{-exponent}` for `k = 1..=m`, normalized to sum to one.
pub fn zipf(m: usize, exponent: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=m).map(|k| (k as f64).powf(-exponent)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Population variance `(1/M) Σ P_i² − 1/M²` of a frequency vector.
pub fn variance(p: &[f64]) -> f64 {
    let m = p.len() as f64;
    p.iter().map(|x| x * x).sum::<f64>() / m - 1.0 / (m * m)
}

/// Largest attainable variance for `m` frequencies, `(1/M)(1 − 1/M)`.
pub fn max_variance(m: usize) -> f64 {
    let m = m as f64;
    (1.0 / m) * (1.0 - 1.0 / m)
}

/// Zipf exponent whose profile over `m` entries has the given variance.
pub fn zipf_exponent_for_variance(m: usize, target: f64) -> Result<f64> {
    if m < 2 || !(0.0..max_variance(m)).contains(&target) {
        return Err(Error::Range(format!(
            "variance {target} not attainable by a Zipf profile over {m} entries"
        )));
    }
    bisect(|s| variance(&zipf(m, s)) - target, 0.0, 64.0)
}

pub fn zipf_with_variance(m: usize, target: f64) -> Result<Vec<f64>> {
    Ok(zipf(m, zipf_exponent_for_variance(m, target)?))
}

/// Zipf exponent whose profile over `m` entries has the given Gini coefficient.
pub fn zipf_exponent_for_gini(m: usize, target: f64) -> Result<f64> {
    let max = (m as f64 - 1.0) / m as f64;
    if m < 2 || !(0.0..max).contains(&target) {
        return Err(Error::Range(format!(
            "Gini {target} not attainable over {m} entries"
        )));
    }
    bisect(|s| gini_of_weights(&zipf(m, s)) - target, 0.0, 64.0)
}

/// Gini coefficient `Σ Σ |x_i − x_j| / (2 M Σ x)` of non-negative weights.
pub fn gini_of_weights(x: &[f64]) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let total: f64 = sorted.iter().sum();
    if m == 0 || total <= 0.0 {
        return 0.0;
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(k, &v)| (2.0 * k as f64 - m as f64 + 1.0) * v)
        .sum();
    weighted / (m as f64 * total)
}

/// Number of brokers in [`azn_like_profile`].
pub const AZN_BROKERS: usize = 50;

/// Splitting fraction `Σ P′²` that [`azn_like_profile`] is calibrated to.
pub const AZN_SPLIT_FRACTION: f64 = 0.06;

/// A 50-broker Zipf frequency profile whose concentration `Σ P′² = 0.06` matches the
/// closed-form splitting fraction of a heavily traded large-cap stock's top members.
pub fn azn_like_profile() -> Vec<f64> {
    let m = AZN_BROKERS as f64;
    let var = (AZN_SPLIT_FRACTION - 1.0 / m) / m;
    zipf_with_variance(AZN_BROKERS, var).expect("calibration target is attainable")
}

/// Root of an increasing function on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::Range("target outside the bracket".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
