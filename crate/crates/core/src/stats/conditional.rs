use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event_model::EventLog;

/// Same-sign pair counts of one conditioning cell at one lag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SameSignCount {
    pub pairs: u64,
    pub same: u64,
}

impl SameSignCount {
    /// `same / pairs`, or `None` for an empty cell.
    pub fn probability(self) -> Option<f64> {
        (self.pairs > 0).then(|| self.same as f64 / self.pairs as f64)
    }

    fn add(self, other: Self) -> Self {
        Self {
            pairs: self.pairs + other.pairs,
            same: self.same + other.same,
        }
    }
}

/// Counts of lagged pairs `(t, t+τ)` split by whether one agent placed both orders and
/// by whether the order at `t` changed the price. Every field is indexed by `τ − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProbabilities {
    pub same_agent_nochange: Vec<SameSignCount>,
    pub same_agent_change: Vec<SameSignCount>,
    pub diff_agent_nochange: Vec<SameSignCount>,
    pub diff_agent_change: Vec<SameSignCount>,
}

fn probs(counts: impl Iterator<Item = SameSignCount>) -> Vec<Option<f64>> {
    counts.map(SameSignCount::probability).collect()
}

fn excess(p: Vec<Option<f64>>) -> Vec<Option<f64>> {
    p.into_iter().map(|x| x.map(|v| v - 0.5)).collect()
}

impl ConditionalProbabilities {
    pub fn tau_max(&self) -> usize {
        self.same_agent_nochange.len()
    }

    pub fn nochange_counts(&self) -> impl Iterator<Item = SameSignCount> + '_ {
        self.same_agent_nochange
            .iter()
            .zip(&self.diff_agent_nochange)
            .map(|(a, b)| a.add(*b))
    }

    pub fn change_counts(&self) -> impl Iterator<Item = SameSignCount> + '_ {
        self.same_agent_change
            .iter()
            .zip(&self.diff_agent_change)
            .map(|(a, b)| a.add(*b))
    }

    pub fn all_counts(&self) -> impl Iterator<Item = SameSignCount> + '_ {
        self.nochange_counts()
            .zip(self.change_counts())
            .map(|(a, b)| a.add(b))
    }

    /// `P(ε_t = ε_{t+τ})`
    pub fn unconditional(&self) -> Vec<Option<f64>> {
        probs(self.all_counts())
    }

    /// `P(ε_t = ε_{t+τ} | MO⁰_t)`
    pub fn given_nochange(&self) -> Vec<Option<f64>> {
        probs(self.nochange_counts())
    }

    /// `P(ε_t = ε_{t+τ} | MO′_t)`
    pub fn given_change(&self) -> Vec<Option<f64>> {
        probs(self.change_counts())
    }

    /// `P̃⁰(τ) = P(ε_t = ε_{t+τ} | MO⁰_t) − 1/2`
    pub fn excess_nochange(&self) -> Vec<Option<f64>> {
        excess(self.given_nochange())
    }

    /// `P̃′(τ) = P(ε_t = ε_{t+τ} | MO′_t) − 1/2`
    pub fn excess_change(&self) -> Vec<Option<f64>> {
        excess(self.given_change())
    }

    /// The four agent/price split probabilities, in the order
    /// `(i=j, MO⁰), (i≠j, MO⁰), (i=j, MO′), (i≠j, MO′)`.
    pub fn by_agent(&self) -> [Vec<Option<f64>>; 4] {
        [
            probs(self.same_agent_nochange.iter().copied()),
            probs(self.diff_agent_nochange.iter().copied()),
            probs(self.same_agent_change.iter().copied()),
            probs(self.diff_agent_change.iter().copied()),
        ]
    }

    /// CSV with one row per lag; undefined cells are empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "tau,P_same,P_same_nochange,P_same_change,excess_nochange,excess_change,\
             P_same_agent_nochange,P_diff_agent_nochange,P_same_agent_change,P_diff_agent_change"
        )?;
        let cols = [
            self.unconditional(),
            self.given_nochange(),
            self.given_change(),
            self.excess_nochange(),
            self.excess_change(),
        ];
        let split = self.by_agent();
        for k in 0..self.tau_max() {
            write!(w, "{}", k + 1)?;
            for col in cols.iter().chain(split.iter()) {
                match col[k] {
                    Some(v) => write!(w, ",{v}")?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Empirical same-sign frequencies over all lagged pairs for `τ = 1..=tau_max`.
pub fn conditional_probabilities(log: &EventLog, tau_max: usize) -> Result<ConditionalProbabilities> {
    if !log.has_price_flags() {
        return Err(Error::MissingPriceFlags);
    }
    if tau_max == 0 || tau_max >= log.len() {
        return Err(Error::Range(format!(
            "tau_max {tau_max} must lie in 1..{}",
            log.len()
        )));
    }
    let (signs, agents, flags) = (log.signs(), log.agents(), log.price_flags());
    // Cell index: 2 * price_changed + different_agent.
    let per_lag: Vec<[SameSignCount; 4]> = (1..=tau_max)
        .into_par_iter()
        .map(|tau| {
            let mut cells = [SameSignCount::default(); 4];
            for t in 0..signs.len() - tau {
                let cell = 2 * usize::from(flags[t]) + usize::from(agents[t] != agents[t + tau]);
                cells[cell].pairs += 1;
                cells[cell].same += u64::from(signs[t] == signs[t + tau]);
            }
            cells
        })
        .collect();
    Ok(ConditionalProbabilities {
        same_agent_nochange: per_lag.iter().map(|c| c[0]).collect(),
        diff_agent_nochange: per_lag.iter().map(|c| c[1]).collect(),
        same_agent_change: per_lag.iter().map(|c| c[2]).collect(),
        diff_agent_change: per_lag.iter().map(|c| c[3]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::AgentRegistry;

    #[test]
    fn hand_counted_small_log() {
        // t:     0  1  2  3  4
        // sign:  +  +  -  +  -
        // agent: a  b  a  a  b
        // flag:  1  0  0  1  0
        let log = EventLog::from_columns(
            vec![1, 1, -1, 1, -1],
            vec![0, 1, 0, 0, 1],
            Some(vec![true, false, false, true, false]),
            AgentRegistry::numbered("a", 2),
        )
        .unwrap();
        let cp = conditional_probabilities(&log, 2).unwrap();
        // Lag 1 pairs: (0,1) diff change same; (1,2) diff nochange opposite;
        // (2,3) same nochange opposite; (3,4) diff change opposite.
        assert_eq!(cp.diff_agent_change[0], SameSignCount { pairs: 2, same: 1 });
        assert_eq!(cp.diff_agent_nochange[0], SameSignCount { pairs: 1, same: 0 });
        assert_eq!(cp.same_agent_nochange[0], SameSignCount { pairs: 1, same: 0 });
        assert_eq!(cp.same_agent_change[0], SameSignCount::default());
        assert_eq!(cp.by_agent()[2][0], None);
        assert_eq!(cp.unconditional()[0], Some(0.25));
        assert_eq!(cp.excess_change()[0], Some(0.0));
        // Lag 2 pairs: (0,2) same change opposite; (1,3) diff nochange same; (2,4) diff nochange same.
        assert_eq!(cp.same_agent_change[1], SameSignCount { pairs: 1, same: 0 });
        assert_eq!(cp.same_agent_nochange[1], SameSignCount::default());
        assert_eq!(cp.diff_agent_nochange[1], SameSignCount { pairs: 2, same: 2 });
    }

    #[test]
    fn requires_flags() {
        let log =
            EventLog::from_columns(vec![1, -1, 1], vec![0, 0, 0], None, AgentRegistry::numbered("a", 1))
                .unwrap();
        assert!(matches!(
            conditional_probabilities(&log, 1),
            Err(Error::MissingPriceFlags)
        ));
    }
}
