//! Shared fixtures and the nested-loop reference implementation.
#![allow(dead_code)]

use orderflow_core::event_model::{AgentRegistry, EventLog};
use orderflow_core::rng::seeded;
use rand::Rng;

/// Random log with skewed activity and agent-specific sign bias.
pub fn random_log(seed: u64, n: usize, m: usize) -> EventLog {
    let mut rng = seeded(seed);
    let weights: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.05).collect();
    let bias: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..0.8)).collect();
    let total: f64 = weights.iter().sum();
    let mut signs = Vec::with_capacity(n);
    let mut agents = Vec::with_capacity(n);
    let mut prev = 1i8;
    for _ in 0..n {
        let mut u = rng.random::<f64>() * total;
        let mut a = 0;
        while a + 1 < m && u >= weights[a] {
            u -= weights[a];
            a += 1;
        }
        // Some persistence so that lagged terms are not all noise.
        let s = if rng.random::<f64>() < 0.3 {
            prev
        } else if rng.random::<f64>() < bias[a] {
            1
        } else {
            -1
        };
        prev = s;
        signs.push(s);
        agents.push(a as u32);
    }
    let flags = (0..n).map(|_| rng.random::<f64>() < 0.35).collect();
    EventLog::from_columns(signs, agents, Some(flags), AgentRegistry::numbered("a", m)).unwrap()
}

pub struct Naive {
    pub c: Vec<f64>,
    pub split: Vec<f64>,
    pub herd: Vec<f64>,
    pub term2: Vec<f64>,
    pub counts: Vec<Vec<Vec<u64>>>,
    pub p_tilde: Vec<Vec<Vec<f64>>>,
    pub c_ij: Vec<Vec<Vec<Option<f64>>>>,
}

/// Direct evaluation of every definition with explicit loops over lags, agents and time.
pub fn naive(log: &EventLog, tau_max: usize) -> Naive {
    let n = log.len();
    let m = log.num_agents();
    let e: Vec<f64> = log.signs().iter().map(|&s| s as f64).collect();
    let a = log.agents();
    let mut n_i = vec![0.0; m];
    let mut sum_i = vec![0.0; m];
    for t in 0..n {
        n_i[a[t] as usize] += 1.0;
        sum_i[a[t] as usize] += e[t];
    }
    let p: Vec<f64> = n_i.iter().map(|c| c / n as f64).collect();
    let mu: Vec<f64> = (0..m)
        .map(|i| if n_i[i] > 0.0 { sum_i[i] / n_i[i] } else { 0.0 })
        .collect();
    let mean = e.iter().sum::<f64>() / n as f64;
    let mut out = Naive {
        c: vec![],
        split: vec![],
        herd: vec![],
        term2: vec![],
        counts: vec![],
        p_tilde: vec![],
        c_ij: vec![],
    };
    for tau in 1..=tau_max {
        let mut prod = 0.0;
        for t in 0..n - tau {
            prod += e[t] * e[t + tau];
        }
        out.c.push(prod / n as f64 - mean * mean);
        let mut cnt = vec![vec![0u64; m]; m];
        let mut s = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                for t in 0..n - tau {
                    if a[t] as usize == i && a[t + tau] as usize == j {
                        cnt[i][j] += 1;
                        s[i][j] += e[t] * e[t + tau];
                    }
                }
            }
        }
        let (mut split, mut herd, mut term2) = (0.0, 0.0, 0.0);
        let mut pt = vec![vec![0.0; m]; m];
        let mut cij = vec![vec![None; m]; m];
        for i in 0..m {
            for j in 0..m {
                let pij = cnt[i][j] as f64 / n as f64;
                pt[i][j] = pij - p[i] * p[j];
                let first = if cnt[i][j] > 0 {
                    let c = s[i][j] / cnt[i][j] as f64 - mu[i] * mu[j];
                    cij[i][j] = Some(c);
                    pij * c
                } else {
                    0.0
                };
                let second = pt[i][j] * mu[i] * mu[j];
                term2 += second;
                if i == j {
                    split += first + second;
                } else {
                    herd += first + second;
                }
            }
        }
        out.split.push(split);
        out.herd.push(herd);
        out.term2.push(term2);
        out.counts.push(cnt);
        out.p_tilde.push(pt);
        out.c_ij.push(cij);
    }
    out
}

/// Fair independent signs from uniformly chosen agents.
pub fn iid_log(seed: u64, n: usize, m: usize) -> EventLog {
    let mut rng = seeded(seed);
    let signs = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    let agents = (0..n).map(|_| rng.random_range(0..m as u32)).collect();
    EventLog::from_columns(signs, agents, None, AgentRegistry::numbered("a", m)).unwrap()
}
