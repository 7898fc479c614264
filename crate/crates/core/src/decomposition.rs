//! Sign autocorrelation and its exact split into same-agent ("splitting") and
//! cross-agent ("herding") parts.
//!
//! With `P^i = N^i/N`, `μ^i` the mean sign of agent `i`, `N^{ij}(τ)` the number of lagged
//! pairs whose first order is `i`'s and second is `j`'s, and `S^{ij}(τ)` the sum of sign
//! products over those pairs:
//!
//! ```text
//! C(τ)        = (1/N) Σ_t ε_t ε_{t+τ} − ((1/N) Σ_t ε_t)²
//! C^{ij}(τ)   = S^{ij}(τ)/N^{ij}(τ) − μ^i μ^j
//! P̃^{ij}(τ)   = N^{ij}(τ)/N − P^i P^j
//! C(τ)        = Σ_{ij} P^{ij} C^{ij} + Σ_{ij} P̃^{ij} μ^i μ^j
//! C_split(τ)  = diagonal (i = j) part of both sums, C_herd(τ) = off-diagonal part
//! ```
//!
//! Lagged sums run over `t ∈ [0, N−τ)` and are normalized by `N`, so an all-buy log has
//! `C(τ) = −τ/N` rather than zero.
//!
//! [`decompose`] never materializes the `M×M` matrices: expanding the products shows each
//! component only needs, per lag, the integer sums of sign products over same-agent and
//! all pairs plus the sums of `μ^{a_t} μ^{a_{t+τ}}` over the same two pair sets. That is
//! `O(N)` work and `O(M)` memory per lag for any number of agents. [`pair_statistics`]
//! builds the full matrices when they are wanted for per-agent diagnostics.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event_model::EventLog;

/// `S(τ)` is reported as undefined where `|C(τ)|` falls below this.
pub const RATIO_FLOOR: f64 = 1e-6;

/// Default cap on `M² · tau_max` cells held by [`pair_statistics`].
pub const DEFAULT_MAX_PAIR_CELLS: usize = 1 << 24;

/// Per-lag curves, indexed by `τ − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub c: Vec<f64>,
    pub c_split: Vec<f64>,
    pub c_herd: Vec<f64>,
    /// `C_split / C`, `None` where `|C| < RATIO_FLOOR` or `C` is undefined.
    pub s: Vec<Option<f64>>,
    /// `Σ_i P^{ii} C^{ii}`
    pub term1_split: Vec<f64>,
    /// `Σ_i P̃^{ii} (μ^i)²`
    pub term2_split: Vec<f64>,
    /// `Σ_{i≠j} P^{ij} C^{ij}`
    pub term1_herd: Vec<f64>,
    /// `Σ_{i≠j} P̃^{ij} μ^i μ^j`
    pub term2_herd: Vec<f64>,
}

impl DecompositionResult {
    pub fn tau_max(&self) -> usize {
        self.c.len()
    }

    /// Lags `1..=tau_max`.
    pub fn lags(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.tau_max()
    }

    /// Value of `curve` at lag `tau` (1-based).
    pub fn at(curve: &[f64], tau: usize) -> f64 {
        curve[tau - 1]
    }

    pub fn term2_total(&self, tau: usize) -> f64 {
        self.term2_split[tau - 1] + self.term2_herd[tau - 1]
    }

    /// Mean of the defined `S(τ)` over `lo ..= hi`; `None` if none are defined.
    pub fn mean_splitting_ratio(&self, lo: usize, hi: usize) -> Option<f64> {
        let vals: Vec<f64> = (lo..=hi.min(self.tau_max()))
            .filter_map(|tau| self.s[tau - 1])
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    fn from_terms(c: Vec<f64>, terms: Vec<[f64; 4]>) -> Self {
        let mut out = Self {
            s: Vec::with_capacity(c.len()),
            c_split: Vec::with_capacity(c.len()),
            c_herd: Vec::with_capacity(c.len()),
            term1_split: Vec::with_capacity(c.len()),
            term2_split: Vec::with_capacity(c.len()),
            term1_herd: Vec::with_capacity(c.len()),
            term2_herd: Vec::with_capacity(c.len()),
            c,
        };
        for (k, [t1s, t2s, t1h, t2h]) in terms.into_iter().enumerate() {
            let split = t1s + t2s;
            out.term1_split.push(t1s);
            out.term2_split.push(t2s);
            out.term1_herd.push(t1h);
            out.term2_herd.push(t2h);
            out.c_split.push(split);
            out.c_herd.push(t1h + t2h);
            out.s.push(splitting_ratio(split, out.c[k]));
        }
        out
    }
}

fn splitting_ratio(split: f64, c: f64) -> Option<f64> {
    (c.is_finite() && c.abs() >= RATIO_FLOOR).then(|| split / c)
}

fn check_lag(log: &EventLog, tau_max: usize) -> Result<()> {
    if tau_max == 0 {
        return Err(Error::Range("tau_max must be at least 1".into()));
    }
    if tau_max >= log.len() {
        return Err(Error::Range(format!(
            "tau_max {tau_max} must be below the log length {}",
            log.len()
        )));
    }
    Ok(())
}

/// Sum of `ε_t ε_{t+τ}` over `t ∈ [0, N−τ)`.
fn lagged_sign_sum(signs: &[i8], tau: usize) -> i64 {
    let n = signs.len() - tau;
    let (head, tail) = (&signs[..n], &signs[tau..]);
    // i32 partial sums over blocks keep the inner loop vectorizable.
    head.chunks(1 << 20)
        .zip(tail.chunks(1 << 20))
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| (x * y) as i32)
                .sum::<i32>() as i64
        })
        .sum()
}

/// Sample autocorrelation `C(τ)` for `τ = 1..=tau_max`.
pub fn autocorrelation(log: &EventLog, tau_max: usize) -> Result<Vec<f64>> {
    check_lag(log, tau_max)?;
    let lags: Vec<usize> = (1..=tau_max).collect();
    autocorrelation_at(log, &lags)
}

/// `C(τ)` at arbitrary lags, each in `1..N`.
pub fn autocorrelation_at(log: &EventLog, lags: &[usize]) -> Result<Vec<f64>> {
    let signs = log.signs();
    let n = signs.len() as f64;
    if let Some(&bad) = lags.iter().find(|&&tau| tau == 0 || tau >= signs.len()) {
        return Err(Error::Range(format!(
            "lag {bad} outside 1..{}",
            signs.len()
        )));
    }
    let mean = signs.iter().map(|&s| s as i64).sum::<i64>() as f64 / n;
    Ok(lags
        .par_iter()
        .map(|&tau| lagged_sign_sum(signs, tau) as f64 / n - mean * mean)
        .collect())
}

/// Per-event quantities shared by every lag of the streaming decomposition.
struct Prepared<'a> {
    signs: &'a [i8],
    agents: &'a [u32],
    /// `μ^{a_t}`
    mu_t: Vec<f64>,
    /// `(μ^{a_t})²`
    mu_sq_t: Vec<f64>,
    /// `(1/N) Σ_t ε_t`, equal to `Σ_i P^i μ^i`.
    mean_sign: f64,
    /// `Σ_i (P^i μ^i)²`
    sum_sq_weighted_means: f64,
}

impl<'a> Prepared<'a> {
    fn new(signs: &'a [i8], agents: &'a [u32], num_agents: usize) -> Self {
        let mut counts = vec![0u64; num_agents];
        let mut sums = vec![0i64; num_agents];
        for (&a, &s) in agents.iter().zip(signs) {
            counts[a as usize] += 1;
            sums[a as usize] += s as i64;
        }
        let n = signs.len() as f64;
        let mu: Vec<f64> = counts
            .iter()
            .zip(&sums)
            .map(|(&c, &s)| if c > 0 { s as f64 / c as f64 } else { 0.0 })
            .collect();
        let total: i64 = sums.iter().sum();
        let sum_sq_weighted_means = sums
            .iter()
            .map(|&s| {
                let x = s as f64 / n;
                x * x
            })
            .sum();
        let mu_t: Vec<f64> = agents.iter().map(|&a| mu[a as usize]).collect();
        let mu_sq_t = mu_t.iter().map(|m| m * m).collect();
        Self {
            signs,
            agents,
            mu_t,
            mu_sq_t,
            mean_sign: total as f64 / n,
            sum_sq_weighted_means,
        }
    }

    /// `(C, [term1_split, term2_split, term1_herd, term2_herd])` at lag `tau`.
    fn lag_terms(&self, tau: usize) -> (f64, [f64; 4]) {
        const LANES: usize = 8;
        let len = self.signs.len();
        let n = len - tau;
        let (e0, e1) = (&self.signs[..n], &self.signs[tau..]);
        let (a0, a1) = (&self.agents[..n], &self.agents[tau..]);
        let (m0, m1) = (&self.mu_t[..n], &self.mu_t[tau..]);
        let q0 = &self.mu_sq_t[..n];

        // Fixed lane assignment makes the floating-point sums independent of scheduling.
        let mut s_all = [0i64; LANES];
        let mut s_diag = [0i64; LANES];
        let mut w_all = [0f64; LANES];
        let mut w_diag = [0f64; LANES];
        let blocks = n / LANES;
        for b in 0..blocks {
            let base = b * LANES;
            for l in 0..LANES {
                let t = base + l;
                let prod = (e0[t] * e1[t]) as i64;
                let same = a0[t] == a1[t];
                s_all[l] += prod;
                s_diag[l] += if same { prod } else { 0 };
                w_all[l] += m0[t] * m1[t];
                w_diag[l] += if same { q0[t] } else { 0.0 };
            }
        }
        for t in blocks * LANES..n {
            let l = t % LANES;
            let prod = (e0[t] * e1[t]) as i64;
            let same = a0[t] == a1[t];
            s_all[l] += prod;
            s_diag[l] += if same { prod } else { 0 };
            w_all[l] += m0[t] * m1[t];
            w_diag[l] += if same { q0[t] } else { 0.0 };
        }
        let s_all: i64 = s_all.iter().sum();
        let s_diag: i64 = s_diag.iter().sum();
        let w_all: f64 = w_all.iter().sum();
        let w_diag: f64 = w_diag.iter().sum();

        let nf = len as f64;
        let s_off = (s_all - s_diag) as f64;
        let w_off = w_all - w_diag;
        let mean_sq = self.mean_sign * self.mean_sign;
        let c = s_all as f64 / nf - mean_sq;
        let term1_split = (s_diag as f64 - w_diag) / nf;
        let term2_split = w_diag / nf - self.sum_sq_weighted_means;
        let term1_herd = (s_off - w_off) / nf;
        let term2_herd = w_off / nf - (mean_sq - self.sum_sq_weighted_means);
        (c, [term1_split, term2_split, term1_herd, term2_herd])
    }
}

/// Splitting/herding decomposition for `τ = 1..=tau_max`.
pub fn decompose(log: &EventLog, tau_max: usize) -> Result<DecompositionResult> {
    check_lag(log, tau_max)?;
    Ok(decompose_columns(
        log.signs(),
        log.agents(),
        log.num_agents(),
        tau_max,
    ))
}

/// [`decompose`] on raw columns. Callers guarantee `1 <= tau_max < signs.len()`, equal
/// column lengths, and agent ids below `num_agents`.
pub(crate) fn decompose_columns(
    signs: &[i8],
    agents: &[u32],
    num_agents: usize,
    tau_max: usize,
) -> DecompositionResult {
    let prep = Prepared::new(signs, agents, num_agents);
    let (c, terms): (Vec<f64>, Vec<[f64; 4]>) = (1..=tau_max)
        .into_par_iter()
        .map(|tau| prep.lag_terms(tau))
        .unzip();
    DecompositionResult::from_terms(c, terms)
}

/// Herding component only; the inner loop of the shuffle test.
pub(crate) fn herding_curve(
    signs: &[i8],
    agents: &[u32],
    num_agents: usize,
    tau_max: usize,
) -> Vec<f64> {
    let prep = Prepared::new(signs, agents, num_agents);
    (1..=tau_max)
        .map(|tau| {
            let (_, [_, _, t1h, t2h]) = prep.lag_terms(tau);
            t1h + t2h
        })
        .collect()
}

/// `|C(τ) − Σ_{ij} P^{ij} C^{ij}|`, the error of dropping the activity-deviation term.
pub fn approximation_error(result: &DecompositionResult) -> Vec<f64> {
    result
        .term2_split
        .iter()
        .zip(&result.term2_herd)
        .map(|(a, b)| (a + b).abs())
        .collect()
}

/// Pairwise activity and sign statistics for `τ = 1..=tau_max`.
#[derive(Debug, Clone)]
pub struct PairStatistics {
    num_agents: usize,
    num_events: usize,
    /// Per lag, row-major `M×M` counts `N^{ij}(τ)`.
    counts: Vec<Vec<u64>>,
    /// Per lag, row-major `M×M` sums of `ε^i_t ε^j_{t+τ}`.
    sign_sums: Vec<Vec<i64>>,
    frequencies: Vec<f64>,
    mean_signs: Vec<f64>,
}

impl PairStatistics {
    pub fn tau_max(&self) -> usize {
        self.counts.len()
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_events(&self) -> usize {
        self.num_events
    }

    /// `P^i`
    pub fn frequency(&self, i: usize) -> f64 {
        self.frequencies[i]
    }

    /// `μ^i`
    pub fn mean_sign(&self, i: usize) -> f64 {
        self.mean_signs[i]
    }

    fn cell(&self, i: usize, j: usize) -> usize {
        i * self.num_agents + j
    }

    /// `N^{ij}(τ)`
    pub fn count(&self, tau: usize, i: usize, j: usize) -> u64 {
        self.counts[tau - 1][self.cell(i, j)]
    }

    pub fn sign_sum(&self, tau: usize, i: usize, j: usize) -> i64 {
        self.sign_sums[tau - 1][self.cell(i, j)]
    }

    /// `P^{ij}(τ) = N^{ij}(τ)/N`
    pub fn p(&self, tau: usize, i: usize, j: usize) -> f64 {
        self.count(tau, i, j) as f64 / self.num_events as f64
    }

    /// `P̃^{ij}(τ) = P^{ij}(τ) − P^i P^j`
    pub fn p_tilde(&self, tau: usize, i: usize, j: usize) -> f64 {
        self.p(tau, i, j) - self.frequencies[i] * self.frequencies[j]
    }

    /// `C^{ij}(τ)`; `None` where `N^{ij}(τ) = 0`.
    pub fn c(&self, tau: usize, i: usize, j: usize) -> Option<f64> {
        let n = self.count(tau, i, j);
        (n > 0).then(|| {
            self.sign_sum(tau, i, j) as f64 / n as f64 - self.mean_signs[i] * self.mean_signs[j]
        })
    }

    /// Row-major `C^{ij}(τ)` with `NaN` marking undefined cells.
    pub fn c_matrix(&self, tau: usize) -> Vec<f64> {
        let m = self.num_agents;
        (0..m * m)
            .map(|k| self.c(tau, k / m, k % m).unwrap_or(f64::NAN))
            .collect()
    }

    /// Term-by-term evaluation of the decomposition from the matrices.
    pub fn decomposition(&self, overall_c: Vec<f64>) -> DecompositionResult {
        let m = self.num_agents;
        let terms = (1..=self.tau_max())
            .map(|tau| {
                let mut t = [0.0; 4];
                for i in 0..m {
                    for j in 0..m {
                        let weighted = self.c(tau, i, j).map_or(0.0, |c| self.p(tau, i, j) * c);
                        let deviation =
                            self.p_tilde(tau, i, j) * self.mean_signs[i] * self.mean_signs[j];
                        let k = if i == j { 0 } else { 2 };
                        t[k] += weighted;
                        t[k + 1] += deviation;
                    }
                }
                t
            })
            .collect();
        DecompositionResult::from_terms(overall_c, terms)
    }
}

pub fn pair_statistics(log: &EventLog, tau_max: usize) -> Result<PairStatistics> {
    pair_statistics_capped(log, tau_max, DEFAULT_MAX_PAIR_CELLS)
}

/// [`pair_statistics`] with an explicit cap on `M² · tau_max`.
pub fn pair_statistics_capped(
    log: &EventLog,
    tau_max: usize,
    max_cells: usize,
) -> Result<PairStatistics> {
    check_lag(log, tau_max)?;
    let m = log.num_agents();
    let cells = m
        .checked_mul(m)
        .and_then(|mm| mm.checked_mul(tau_max))
        .unwrap_or(usize::MAX);
    if cells > max_cells {
        return Err(Error::Capacity {
            cells,
            cap: max_cells,
        });
    }
    let signs = log.signs();
    let agents = log.agents();
    let (counts, sign_sums): (Vec<Vec<u64>>, Vec<Vec<i64>>) = (1..=tau_max)
        .into_par_iter()
        .map(|tau| {
            let mut n = vec![0u64; m * m];
            let mut s = vec![0i64; m * m];
            for t in 0..signs.len() - tau {
                let k = agents[t] as usize * m + agents[t + tau] as usize;
                n[k] += 1;
                s[k] += (signs[t] * signs[t + tau]) as i64;
            }
            (n, s)
        })
        .unzip();
    let summaries = crate::event_model::agent_summaries(log);
    Ok(PairStatistics {
        num_agents: m,
        num_events: log.len(),
        counts,
        sign_sums,
        frequencies: summaries.iter().map(|s| s.frequency).collect(),
        mean_signs: summaries.iter().map(|s| s.mean_sign).collect(),
    })
}

/// Same-agent curves of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentDiagonal {
    pub agent: u32,
    /// `C^{ii}(τ)`, indexed by `τ − 1`; `None` where the agent has no lagged pair.
    pub c: Vec<Option<f64>>,
    /// `P̃^{ii}(τ)`, indexed by `τ − 1`.
    pub p_tilde: Vec<f64>,
}

/// `C^{ii}` and `P̃^{ii}` for the listed agents in `O(N · tau_max)`, whatever the number
/// of agents in the log.
pub fn agent_diagonals(log: &EventLog, agents: &[u32], tau_max: usize) -> Result<Vec<AgentDiagonal>> {
    check_lag(log, tau_max)?;
    let m = log.num_agents();
    let mut slot = vec![usize::MAX; m];
    for (k, &a) in agents.iter().enumerate() {
        if a as usize >= m {
            return Err(Error::Range(format!("agent {a} is not in the log")));
        }
        slot[a as usize] = k;
    }
    let summaries = crate::event_model::agent_summaries(log);
    let (signs, ids) = (log.signs(), log.agents());
    let n = log.len();
    let per_lag: Vec<(Vec<u64>, Vec<i64>)> = (1..=tau_max)
        .into_par_iter()
        .map(|tau| {
            let mut cnt = vec![0u64; agents.len()];
            let mut sum = vec![0i64; agents.len()];
            for t in 0..n - tau {
                let a = ids[t];
                if a == ids[t + tau] && slot[a as usize] != usize::MAX {
                    cnt[slot[a as usize]] += 1;
                    sum[slot[a as usize]] += (signs[t] * signs[t + tau]) as i64;
                }
            }
            (cnt, sum)
        })
        .collect();
    Ok(agents
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let s = &summaries[a as usize];
            AgentDiagonal {
                agent: a,
                c: per_lag
                    .iter()
                    .map(|(cnt, sum)| {
                        (cnt[k] > 0).then(|| sum[k] as f64 / cnt[k] as f64 - s.mean_sign * s.mean_sign)
                    })
                    .collect(),
                p_tilde: per_lag
                    .iter()
                    .map(|(cnt, _)| cnt[k] as f64 / n as f64 - s.frequency * s.frequency)
                    .collect(),
            }
        })
        .collect())
}

/// Nonzero pair counts `N^{ij}(τ)` at one lag as `(i, j, count)`, sorted by `(i, j)`.
pub fn pair_counts_at(log: &EventLog, tau: usize) -> Result<Vec<(u32, u32, u64)>> {
    check_lag(log, tau)?;
    let ids = log.agents();
    let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
    for t in 0..ids.len() - tau {
        *counts.entry((ids[t], ids[t + tau])).or_default() += 1;
    }
    let mut out: Vec<(u32, u32, u64)> = counts.into_iter().map(|((i, j), c)| (i, j, c)).collect();
    out.sort_unstable();
    Ok(out)
}

/// Conditioning class of the earlier order of each lagged pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceCondition {
    PriceChange,
    NoPriceChange,
}

impl PriceCondition {
    pub fn matches(self, price_changed: bool) -> bool {
        match self {
            PriceCondition::PriceChange => price_changed,
            PriceCondition::NoPriceChange => !price_changed,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PriceCondition::PriceChange => "price_change",
            PriceCondition::NoPriceChange => "no_price_change",
        }
    }
}

/// Decomposition of `E[(ε_t − μ)(ε_{t+τ} − μ) | condition at t]`, with `μ` the global mean
/// sign. Same-agent pairs form the splitting part and the rest the herding part; all
/// of it sits in the `term1_*` curves and the `term2_*` curves are zero. Lags without
/// conditioning events hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDecomposition {
    pub condition: PriceCondition,
    /// Number of conditioning events with a partner at each lag.
    pub counts: Vec<u64>,
    pub result: DecompositionResult,
}

pub fn conditional_decompose(
    log: &EventLog,
    tau_max: usize,
    condition: PriceCondition,
) -> Result<ConditionalDecomposition> {
    if !log.has_price_flags() {
        return Err(Error::MissingPriceFlags);
    }
    check_lag(log, tau_max)?;
    let signs = log.signs();
    let agents = log.agents();
    let flags = log.price_flags();
    let mu = signs.iter().map(|&s| s as i64).sum::<i64>() as f64 / signs.len() as f64;
    let centered: Vec<f64> = signs.iter().map(|&s| s as f64 - mu).collect();

    let per_lag: Vec<(u64, f64, f64)> = (1..=tau_max)
        .into_par_iter()
        .map(|tau| {
            let mut count = 0u64;
            let mut split = 0.0;
            let mut herd = 0.0;
            for t in 0..signs.len() - tau {
                if !condition.matches(flags[t]) {
                    continue;
                }
                count += 1;
                let prod = centered[t] * centered[t + tau];
                if agents[t] == agents[t + tau] {
                    split += prod;
                } else {
                    herd += prod;
                }
            }
            (count, split, herd)
        })
        .collect();

    let counts: Vec<u64> = per_lag.iter().map(|p| p.0).collect();
    let mut c = Vec::with_capacity(tau_max);
    let mut terms = Vec::with_capacity(tau_max);
    for &(count, split, herd) in &per_lag {
        let (s, h) = if count > 0 {
            (split / count as f64, herd / count as f64)
        } else {
            (f64::NAN, f64::NAN)
        };
        c.push(s + h);
        terms.push([s, 0.0, h, 0.0]);
    }
    Ok(ConditionalDecomposition {
        condition,
        counts,
        result: DecompositionResult::from_terms(c, terms),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Tidy CSV `tau,C,C_split,C_herd,S,term2_total`, with a trailing `condition` column when
/// `condition` is given. Undefined `S` is written as an empty field.
pub fn write_decomposition_csv<W: Write>(
    mut w: W,
    result: &DecompositionResult,
    condition: Option<PriceCondition>,
) -> std::io::Result<()> {
    write!(w, "tau,C,C_split,C_herd,S,term2_total")?;
    if condition.is_some() {
        write!(w, ",condition")?;
    }
    writeln!(w)?;
    for tau in result.lags() {
        let k = tau - 1;
        write!(
            w,
            "{tau},{},{},{},{},{}",
            result.c[k],
            result.c_split[k],
            result.c_herd[k],
            fmt_opt(result.s[k]),
            result.term2_total(tau)
        )?;
        if let Some(cond) = condition {
            write!(w, ",{}", cond.label())?;
        }
        writeln!(w)?;
    }
    Ok(())
}
