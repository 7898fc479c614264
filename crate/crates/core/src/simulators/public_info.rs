use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::{discrete_pareto, random_sign, INVESTOR_PREFIX};
use crate::error::{Error, Result};
use crate::event_model::{AgentRegistry, EventLog, EventLogBuilder};
use crate::rng::seeded;

/// Public-information herding model. Persistence comes from heavy-tailed run lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicInfoParams {
    /// Investor trading frequencies `P^i`; `M` is their count.
    pub frequencies: Vec<f64>,
    /// Tail exponent of run lengths, `P(n ≥ x) = (n_min/x)^run_tail`.
    pub run_tail: f64,
    pub n_min: u64,
    pub events: usize,
    pub seed: u64,
}

impl PublicInfoParams {
    pub fn validate(&self) -> Result<()> {
        validate_frequencies(&self.frequencies)?;
        if !(self.run_tail > 1.0) || !self.run_tail.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "run_tail must exceed 1, got {}",
                self.run_tail
            )));
        }
        if self.n_min == 0 || self.events == 0 {
            return Err(Error::InvalidParameter(
                "n_min and events must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn validate_frequencies(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidParameter("empty frequency vector".into()));
    }
    if p.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "frequencies must be positive and finite".into(),
        ));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "frequencies sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Successive runs of one fair random sign; each order in a run goes to an investor drawn
/// with replacement from the frequencies. The last run is truncated at `events`.
pub fn simulate_public_info(params: &PublicInfoParams) -> Result<EventLog> {
    params.validate()?;
    let mut rng = seeded(params.seed);
    let m = params.frequencies.len();
    let picker = WeightedIndex::new(&params.frequencies)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut log = EventLogBuilder::new(
        AgentRegistry::numbered(INVESTOR_PREFIX, m),
        params.events,
    );
    while log.len() < params.events {
        let sign = random_sign(&mut rng);
        let run = discrete_pareto(&mut rng, params.run_tail, params.n_min);
        let room = (params.events - log.len()) as u64;
        for _ in 0..run.min(room) {
            let investor = picker.sample(&mut rng) as u32;
            log.push(sign, investor, false);
        }
    }
    let mut log = log.finish()?;
    log.metadata.set("model", "public-info");
    log.metadata.set("investors", m);
    log.metadata.set("persistence", "heavy-tailed run length");
    log.metadata.set("run_tail", params.run_tail);
    log.metadata.set("n_min", params.n_min);
    log.metadata.set("events", params.events);
    log.metadata.set("seed", params.seed);
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut p = PublicInfoParams {
            frequencies: vec![0.5, 0.5],
            run_tail: 1.5,
            n_min: 1,
            events: 100,
            seed: 1,
        };
        assert!(simulate_public_info(&p).is_ok());
        p.frequencies = vec![0.5, 0.6];
        assert!(simulate_public_info(&p).is_err());
        p.frequencies = vec![1.0, 0.0];
        assert!(simulate_public_info(&p).is_err());
        p.frequencies = vec![1.0];
        p.run_tail = 0.9;
        assert!(simulate_public_info(&p).is_err());
    }

    #[test]
    fn exact_length_and_frequencies() {
        let p = PublicInfoParams {
            frequencies: vec![0.7, 0.2, 0.1],
            run_tail: 1.5,
            n_min: 2,
            events: 60_000,
            seed: 5,
        };
        let log = simulate_public_info(&p).unwrap();
        assert_eq!(log.len(), 60_000);
        let counts = log.agent_counts();
        for (c, f) in counts.iter().zip(&p.frequencies) {
            let est = *c as f64 / 60_000.0;
            let se = (f * (1.0 - f) / 60_000.0).sqrt();
            assert!((est - f).abs() < 5.0 * se);
        }
    }
}
