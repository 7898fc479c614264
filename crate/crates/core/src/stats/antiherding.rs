use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};
use crate::event_model::{AgentRegistry, EventLog, EventLogBuilder, Sign};
use crate::rng::seeded;
use crate::simulators::{discrete_pareto, random_sign};

/// Synthetic fixture with persistent splitters and price-sensitive contrarians.
///
/// Splitters `spl0 ..` execute Pareto-sized metaorders from a pool, as in the splitting
/// model, ignoring prices. Contrarians `con0 ..` look at the price-changing orders of
/// other agents within the last `window` events and trade against their net direction
/// with probability `response` (and with it otherwise); with no net direction in view
/// they trade a fair random sign. Every order changes the price with probability
/// `flag_prob`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiHerdingParams {
    pub splitters: usize,
    pub contrarians: usize,
    /// Probability that an event is a contrarian order.
    pub contrarian_share: f64,
    pub beta: f64,
    pub v_min: u64,
    pub pool_size: usize,
    pub flag_prob: f64,
    pub window: usize,
    pub response: f64,
    pub events: usize,
    pub seed: u64,
}

impl Default for AntiHerdingParams {
    fn default() -> Self {
        Self {
            splitters: 10,
            contrarians: 20,
            contrarian_share: 0.3,
            beta: 1.5,
            v_min: 1,
            pool_size: 4,
            flag_prob: 0.3,
            window: 50,
            response: 0.8,
            events: 200_000,
            seed: 0,
        }
    }
}

impl AntiHerdingParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must lie in [0,1], got {v}")))
            }
        };
        prob("contrarian_share", self.contrarian_share)?;
        prob("flag_prob", self.flag_prob)?;
        prob("response", self.response)?;
        if self.splitters == 0 || self.contrarians == 0 {
            return Err(Error::InvalidParameter(
                "need at least one splitter and one contrarian".into(),
            ));
        }
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must exceed 1, got {}", self.beta)));
        }
        if self.v_min == 0 || self.pool_size == 0 || self.window == 0 || self.events == 0 {
            return Err(Error::InvalidParameter(
                "v_min, pool_size, window and events must be positive".into(),
            ));
        }
        Ok(())
    }
}

struct Active {
    owner: u32,
    sign: Sign,
    remaining: u64,
}

pub fn generate_antiherding(params: &AntiHerdingParams) -> Result<EventLog> {
    params.validate()?;
    let mut rng = seeded(params.seed);
    let s = params.splitters;
    let mut registry = AgentRegistry::new();
    for k in 0..s {
        registry.intern(&format!("spl{k}"));
    }
    for k in 0..params.contrarians {
        registry.intern(&format!("con{k}"));
    }
    let fresh = |rng: &mut crate::rng::SimRng| Active {
        owner: rng.random_range(0..s) as u32,
        sign: random_sign(rng),
        remaining: discrete_pareto(rng, params.beta, params.v_min),
    };
    let mut pool: Vec<Active> = (0..params.pool_size).map(|_| fresh(&mut rng)).collect();
    // Price-changing orders still inside the window: (t, agent, sign).
    let mut flagged: VecDeque<(usize, u32, Sign)> = VecDeque::new();

    let mut log = EventLogBuilder::new(registry, params.events);
    for t in 0..params.events {
        while flagged.front().is_some_and(|f| f.0 + params.window < t) {
            flagged.pop_front();
        }
        let (sign, agent) = if rng.random::<f64>() < params.contrarian_share {
            let me = (s + rng.random_range(0..params.contrarians)) as u32;
            let net: i64 = flagged
                .iter()
                .filter(|f| f.1 != me)
                .map(|f| f.2.value() as i64)
                .sum();
            let seen = match net.signum() {
                1 => Some(Sign::Buy),
                -1 => Some(Sign::Sell),
                _ => None,
            };
            let sign = match seen {
                Some(seen) if rng.random::<f64>() < params.response => seen.flipped(),
                Some(seen) => seen,
                None => random_sign(&mut rng),
            };
            (sign, me)
        } else {
            let k = rng.random_range(0..params.pool_size);
            let slot = &mut pool[k];
            let out = (slot.sign, slot.owner);
            slot.remaining -= 1;
            if slot.remaining == 0 {
                pool[k] = fresh(&mut rng);
            }
            out
        };
        let changed = rng.random::<f64>() < params.flag_prob;
        if changed {
            flagged.push_back((t, agent, sign));
        }
        log.push(sign, agent, changed);
    }
    let mut log = log.finish()?;
    log.metadata.set("model", "anti-herding fixture");
    log.metadata.set("splitters", params.splitters);
    log.metadata.set("contrarians", params.contrarians);
    log.metadata.set("contrarian_share", params.contrarian_share);
    log.metadata.set("beta", params.beta);
    log.metadata.set("v_min", params.v_min);
    log.metadata.set("pool_size", params.pool_size);
    log.metadata.set("flag_prob", params.flag_prob);
    log.metadata.set("window", params.window);
    log.metadata.set("response", params.response);
    log.metadata.set("events", params.events);
    log.metadata.set("seed", params.seed);
    Ok(log)
}
