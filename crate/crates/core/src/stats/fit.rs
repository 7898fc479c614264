use crate::error::{Error, Result};

/// Log-spaced bins per decade of lag used by [`fit_power_law`].
pub const BINS_PER_DECADE: f64 = 10.0;

/// Coefficient of determination below which a fit is flagged as poor.
pub const POOR_FIT_R2: f64 = 0.98;

/// Fewest positive points a fit accepts.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Decay exponent `γ`, the negated log-log slope.
    pub gamma: f64,
    /// OLS standard error of `γ`.
    pub std_error: f64,
    /// Log-log intercept.
    pub intercept: f64,
    pub r_squared: f64,
    /// `r_squared < POOR_FIT_R2`
    pub poor_fit: bool,
    /// Positive points inside the range.
    pub points: usize,
    /// Points inside the range skipped for being non-positive.
    pub excluded: usize,
    /// Number of log bins entering the regression.
    pub bins: usize,
}

/// Fits `C(τ) ∼ τ^{−γ}` to a curve indexed by `τ − 1` over `lo ..= hi`.
pub fn fit_power_law(curve: &[f64], lo: usize, hi: usize) -> Result<PowerLawFit> {
    if lo == 0 || hi < lo || hi > curve.len() {
        return Err(Error::Range(format!(
            "fit range {lo}..={hi} not within 1..={}",
            curve.len()
        )));
    }
    let taus: Vec<f64> = (lo..=hi).map(|t| t as f64).collect();
    fit_power_law_points(&taus, &curve[lo - 1..hi], lo as f64, hi as f64)
}

/// [`fit_power_law`] for values sampled at arbitrary lags.
///
/// Points with `lo ≤ τ ≤ hi` and a positive value are grouped into logarithmic bins of
/// lag; the regression runs on the per-bin means of `ln τ` and `ln C`, so dense large
/// lags do not outweigh sparse small ones.
pub fn fit_power_law_points(taus: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<PowerLawFit> {
    if taus.len() != values.len() {
        return Err(Error::InvalidParameter("lags and values differ in length".into()));
    }
    if !(lo > 0.0) || hi < lo {
        return Err(Error::Range(format!("invalid fit range {lo}..={hi}")));
    }
    let mut excluded = 0;
    let mut bins: Vec<(i64, f64, f64, usize)> = Vec::new();
    for (&tau, &v) in taus.iter().zip(values) {
        if !(lo..=hi).contains(&tau) {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            excluded += 1;
            continue;
        }
        let bin = (BINS_PER_DECADE * (tau / lo).log10()).floor() as i64;
        match bins.iter_mut().find(|b| b.0 == bin) {
            Some(b) => {
                b.1 += tau.ln();
                b.2 += v.ln();
                b.3 += 1;
            }
            None => bins.push((bin, tau.ln(), v.ln(), 1)),
        }
    }
    if excluded > 0 {
        log::warn!("{excluded} non-positive points excluded from the power-law fit");
    }
    let points: usize = bins.iter().map(|b| b.3).sum();
    if points < MIN_FIT_POINTS || bins.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{points} positive points in {} bins; need {MIN_FIT_POINTS} points and 3 bins",
            bins.len()
        )));
    }
    bins.sort_by_key(|b| b.0);
    let xs: Vec<f64> = bins.iter().map(|b| b.1 / b.3 as f64).collect();
    let ys: Vec<f64> = bins.iter().map(|b| b.2 / b.3 as f64).collect();
    let ols = ols(&xs, &ys);
    Ok(PowerLawFit {
        gamma: -ols.slope,
        std_error: ols.slope_se,
        intercept: ols.intercept,
        r_squared: ols.r_squared,
        poor_fit: ols.r_squared < POOR_FIT_R2,
        points,
        excluded,
        bins: xs.len(),
    })
}

struct Ols {
    slope: f64,
    intercept: f64,
    slope_se: f64,
    r_squared: f64,
}

fn ols(x: &[f64], y: &[f64]) -> Ols {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let slope_se = if n > 2.0 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ols {
        slope,
        intercept,
        slope_se,
        r_squared,
    }
}

/// Spearman rank correlation with average ranks for ties; `None` if either input is
/// constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "inputs differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InvalidParameter("spearman needs at least 3 points".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("spearman inputs contain NaN".into()));
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

/// 1-based ranks, tied values sharing the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Splitting and herding fractions `(1/M′ + M′·Var, 1 − split)` for broker-level flow
/// whose broker labels are independent of the order signs.
///
/// `Var` must lie in `[0, (1/M′)(1 − 1/M′)]`; excursions of `1e-12` relative to the upper
/// bound (or below zero by as much) are treated as rounding and clamped.
pub fn eq14_prediction(m_prime: usize, var: f64) -> Result<(f64, f64)> {
    if m_prime == 0 {
        return Err(Error::InvalidParameter("broker count must be positive".into()));
    }
    let m = m_prime as f64;
    let max = (1.0 / m) * (1.0 - 1.0 / m);
    let slack = 1e-12 * (1.0 / m);
    if !var.is_finite() || var < -slack || var > max + slack {
        return Err(Error::Range(format!(
            "variance {var} outside [0, {max}] for {m_prime} brokers"
        )));
    }
    let var = var.clamp(0.0, max);
    let split = (1.0 / m + m * var).min(1.0);
    Ok((split, 1.0 - split))
}

/// Kolmogorov-Smirnov distance of a sample from the uniform law on `[0,1]`.
pub fn ks_uniform_distance(sample: &[f64]) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(k, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((k + 1) as f64 / n - x).max(x - k as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS distance `d` from `n` observations, using the
/// Kolmogorov limit law with the small-sample correction `√n + 0.12 + 0.11/√n`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    kolmogorov_survival(lambda)
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
