use rand::Rng;

use super::{discrete_pareto, random_sign, INVESTOR_PREFIX};
use crate::error::{Error, Result};
use crate::event_model::{AgentRegistry, EventLog, EventLogBuilder, Sign};
use crate::rng::seeded;

/// Pool-of-metaorders splitting model.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingModelParams {
    /// Number of investors `M`.
    pub investors: usize,
    /// Tail exponent of metaorder sizes, `P(V ≥ v) = (v_min/v)^beta`.
    pub beta: f64,
    pub v_min: u64,
    /// Number of concurrently active metaorders `K`.
    pub pool_size: usize,
    pub events: usize,
    pub seed: u64,
}

impl SplittingModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.investors == 0 {
            return Err(Error::InvalidParameter("investors must be positive".into()));
        }
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must exceed 1, got {}",
                self.beta
            )));
        }
        if self.v_min == 0 || self.pool_size == 0 || self.events == 0 {
            return Err(Error::InvalidParameter(
                "v_min, pool_size and events must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One executed (possibly truncated) metaorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metaorder {
    pub owner: u32,
    pub sign: Sign,
    /// Drawn size.
    pub size: u64,
    /// Pieces executed before the log ended.
    pub executed: u64,
    /// Event time of the first piece.
    pub first_t: usize,
}

#[derive(Clone, Copy)]
struct Slot {
    record: usize,
    remaining: u64,
}

pub fn simulate_splitting(params: &SplittingModelParams) -> Result<EventLog> {
    Ok(simulate_splitting_traced(params)?.0)
}

/// Runs the splitting model and also returns every metaorder in order of creation.
///
/// `K` slots each hold an active metaorder with a uniformly drawn owner, a fair random
/// sign and a Pareto size. Every step picks a slot uniformly, executes one unit of it,
/// and refills the slot once its metaorder is exhausted.
pub fn simulate_splitting_traced(
    params: &SplittingModelParams,
) -> Result<(EventLog, Vec<Metaorder>)> {
    params.validate()?;
    let mut rng = seeded(params.seed);
    let mut metaorders: Vec<Metaorder> = Vec::new();
    let fresh = |rng: &mut crate::rng::SimRng, metaorders: &mut Vec<Metaorder>| {
        let owner = rng.random_range(0..params.investors) as u32;
        let sign = random_sign(rng);
        let size = discrete_pareto(rng, params.beta, params.v_min);
        metaorders.push(Metaorder {
            owner,
            sign,
            size,
            executed: 0,
            first_t: usize::MAX,
        });
        Slot {
            record: metaorders.len() - 1,
            remaining: size,
        }
    };
    let mut pool: Vec<Slot> = (0..params.pool_size)
        .map(|_| fresh(&mut rng, &mut metaorders))
        .collect();

    let registry = AgentRegistry::numbered(INVESTOR_PREFIX, params.investors);
    let mut log = EventLogBuilder::new(registry, params.events);
    for t in 0..params.events {
        let k = if params.pool_size == 1 {
            0
        } else {
            rng.random_range(0..params.pool_size)
        };
        let slot = &mut pool[k];
        let meta = &mut metaorders[slot.record];
        if meta.executed == 0 {
            meta.first_t = t;
        }
        meta.executed += 1;
        log.push(meta.sign, meta.owner, false);
        slot.remaining -= 1;
        if slot.remaining == 0 {
            pool[k] = fresh(&mut rng, &mut metaorders);
        }
    }
    // Drop metaorders that never executed a piece.
    metaorders.retain(|m| m.executed > 0);
    metaorders.sort_by_key(|m| m.first_t);

    let mut log = log.finish()?;
    log.metadata.set("model", "splitting");
    log.metadata.set("investors", params.investors);
    log.metadata.set("beta", params.beta);
    log.metadata.set("v_min", params.v_min);
    log.metadata.set("pool_size", params.pool_size);
    log.metadata.set("events", params.events);
    log.metadata.set("seed", params.seed);
    Ok((log, metaorders))
}
