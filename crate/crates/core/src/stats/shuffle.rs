use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::decomposition::herding_curve;
use crate::error::{Error, Result};
use crate::event_model::EventLog;
use crate::rng::stream;

/// Fewest replicates accepted by [`shuffle_test`].
pub const MIN_REPLICATES: usize = 100;
/// Most replicates accepted by [`shuffle_test`].
pub const MAX_REPLICATES: usize = 1_000_000;
/// Replicate counts above this log a runtime warning.
pub const WARN_REPLICATES: usize = 10_000;
/// Replicate values within this distance of the observed value count as ties. Equal
/// values reached through different summation orders differ by a few ulps.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// How a null realization is drawn from the observed log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShuffleScheme {
    /// Signs and agents permuted by two independent permutations, which also breaks the
    /// pairing of each sign with its agent.
    #[default]
    Independent,
    /// One permutation applied to `(sign, agent)` pairs.
    Joint,
}

impl ShuffleScheme {
    pub fn label(self) -> &'static str {
        match self {
            ShuffleScheme::Independent => "independent",
            ShuffleScheme::Joint => "joint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuffleOptions {
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub scheme: ShuffleScheme,
}

impl Default for ShuffleOptions {
    fn default() -> Self {
        Self {
            replicates: 1000,
            alpha: 0.05,
            seed: 0,
            scheme: ShuffleScheme::Independent,
        }
    }
}

/// One-sided permutation test of the herding component against shuffled logs.
#[derive(Debug, Clone, PartialEq)]
pub struct ShuffleTestResult {
    pub options: ShuffleOptions,
    /// Observed `C_herd(τ)`, indexed by `τ − 1`.
    pub observed: Vec<f64>,
    /// `(1 + #{replicates with C_herd ≤ observed}) / (R + 1)`, ties included.
    pub p_values: Vec<f64>,
    /// `p_value < alpha`
    pub reject: Vec<bool>,
    /// Mean of the replicate `C_herd(τ)`.
    pub null_mean: Vec<f64>,
    /// Sample standard deviation of the replicate `C_herd(τ)`.
    pub null_std: Vec<f64>,
}

impl ShuffleTestResult {
    pub fn replicates(&self) -> usize {
        self.options.replicates
    }

    /// Fraction of lags at which the null is rejected.
    pub fn rejection_fraction(&self) -> f64 {
        self.reject.iter().filter(|&&r| r).count() as f64 / self.reject.len() as f64
    }

    /// CSV `tau,p_value,reject`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,p_value,reject")?;
        for (k, (p, r)) in self.p_values.iter().zip(&self.reject).enumerate() {
            writeln!(w, "{},{p},{}", k + 1, u8::from(*r))?;
        }
        Ok(())
    }
}

/// Columns of replicate `r`, drawn from stream `r + 1` of the seed.
pub fn shuffled_columns(
    signs: &[i8],
    agents: &[u32],
    scheme: ShuffleScheme,
    seed: u64,
    replicate: usize,
) -> (Vec<i8>, Vec<u32>) {
    let mut rng = stream(seed, replicate as u64 + 1);
    match scheme {
        ShuffleScheme::Independent => {
            let mut s = signs.to_vec();
            let mut a = agents.to_vec();
            s.shuffle(&mut rng);
            a.shuffle(&mut rng);
            (s, a)
        }
        ShuffleScheme::Joint => {
            let mut order: Vec<u32> = (0..signs.len() as u32).collect();
            order.shuffle(&mut rng);
            let s = order.iter().map(|&k| signs[k as usize]).collect();
            let a = order.iter().map(|&k| agents[k as usize]).collect();
            (s, a)
        }
    }
}

/// Compares the observed herding component with `R` shuffled realizations.
///
/// Replicates run in parallel; each uses its own stream, so the result does not depend
/// on the number of threads.
pub fn shuffle_test(
    log: &EventLog,
    tau_max: usize,
    options: ShuffleOptions,
) -> Result<ShuffleTestResult> {
    let r = options.replicates;
    if !(MIN_REPLICATES..=MAX_REPLICATES).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "replicates must lie in {MIN_REPLICATES}..={MAX_REPLICATES}, got {r}"
        )));
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1), got {}",
            options.alpha
        )));
    }
    if options.alpha < 1.0 / (r as f64 + 1.0) {
        return Err(Error::Resolution {
            alpha: options.alpha,
            replicates: r,
        });
    }
    if tau_max == 0 || tau_max >= log.len() {
        return Err(Error::Range(format!(
            "tau_max {tau_max} must lie in 1..{}",
            log.len()
        )));
    }
    if r > WARN_REPLICATES {
        log::warn!("{r} shuffle replicates requested; this may take a long time");
    }
    let (signs, agents, m) = (log.signs(), log.agents(), log.num_agents());
    let observed = herding_curve(signs, agents, m, tau_max);

    let null: Vec<Vec<f64>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let (s, a) = shuffled_columns(signs, agents, options.scheme, options.seed, rep);
            herding_curve(&s, &a, m, tau_max)
        })
        .collect();

    let mut below = vec![0usize; tau_max];
    let mut sum = vec![0.0; tau_max];
    for curve in &null {
        for k in 0..tau_max {
            if curve[k] <= observed[k] + TIE_TOLERANCE {
                below[k] += 1;
            }
            sum[k] += curve[k];
        }
    }
    let null_mean: Vec<f64> = sum.iter().map(|s| s / r as f64).collect();
    let mut ss = vec![0.0; tau_max];
    for curve in &null {
        for k in 0..tau_max {
            let d = curve[k] - null_mean[k];
            ss[k] += d * d;
        }
    }
    let null_std = ss.iter().map(|s| (s / (r as f64 - 1.0)).sqrt()).collect();
    let p_values: Vec<f64> = below
        .iter()
        .map(|&k| (1 + k) as f64 / (r + 1) as f64)
        .collect();
    let reject = p_values.iter().map(|&p| p < options.alpha).collect();
    Ok(ShuffleTestResult {
        options,
        observed,
        p_values,
        reject,
        null_mean,
        null_std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::AgentRegistry;

    fn log() -> EventLog {
        let signs: Vec<i8> = (0..300).map(|t| if (t / 3) % 2 == 0 { 1 } else { -1 }).collect();
        let agents: Vec<u32> = (0..300).map(|t| (t * 7 % 5) as u32).collect();
        EventLog::from_columns(signs, agents, None, AgentRegistry::numbered("a", 5)).unwrap()
    }

    #[test]
    fn option_validation() {
        let l = log();
        let mut o = ShuffleOptions {
            replicates: 99,
            ..Default::default()
        };
        assert!(matches!(shuffle_test(&l, 5, o), Err(Error::InvalidParameter(_))));
        o.replicates = 100;
        o.alpha = 0.005;
        assert!(matches!(shuffle_test(&l, 5, o), Err(Error::Resolution { .. })));
        o.alpha = 0.05;
        assert!(shuffle_test(&l, 300, o).is_err());
    }

    #[test]
    fn p_values_on_the_grid() {
        let o = ShuffleOptions {
            replicates: 100,
            seed: 3,
            ..Default::default()
        };
        let res = shuffle_test(&log(), 10, o).unwrap();
        for (p, r) in res.p_values.iter().zip(&res.reject) {
            let k = p * 101.0;
            assert!((k - k.round()).abs() < 1e-9 && (1.0..=101.0).contains(&k.round()));
            assert_eq!(*r, *p < 0.05);
        }
        assert_eq!(res, shuffle_test(&log(), 10, o).unwrap());
    }

    #[test]
    fn joint_keeps_pairs() {
        let l = log();
        let (s, a) = shuffled_columns(l.signs(), l.agents(), ShuffleScheme::Joint, 1, 0);
        let mut before: Vec<(i8, u32)> = l.signs().iter().cloned().zip(l.agents().iter().cloned()).collect();
        let mut after: Vec<(i8, u32)> = s.into_iter().zip(a).collect();
        before.sort_unstable();
        after.sort_unstable();
        assert_eq!(before, after);
    }

    #[test]
    fn csv_layout() {
        let o = ShuffleOptions {
            replicates: 100,
            ..Default::default()
        };
        let res = shuffle_test(&log(), 2, o).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("tau,p_value,reject\n1,"));
        assert_eq!(text.lines().count(), 3);
    }
}
