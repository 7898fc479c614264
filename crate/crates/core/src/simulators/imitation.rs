use rand::Rng;

use super::network::SocialNetwork;
use super::{random_sign, INVESTOR_PREFIX};
use crate::error::{Error, Result};
use crate::event_model::{AgentRegistry, EventLog, EventLogBuilder, Sign};
use crate::rng::seeded;

/// Network imitation model.
#[derive(Debug, Clone, PartialEq)]
pub struct ImitationParams {
    /// Number of investors; must equal the network size.
    pub investors: usize,
    /// Probability that a neighbor copies the active investor's state.
    pub p: f64,
    pub events: usize,
    pub seed: u64,
}

impl ImitationParams {
    pub fn validate(&self) -> Result<()> {
        if self.investors < 2 {
            return Err(Error::InvalidParameter("imitation needs at least 2 investors".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!("p must lie in [0,1], got {}", self.p)));
        }
        if self.events == 0 {
            return Err(Error::InvalidParameter("events must be positive".into()));
        }
        Ok(())
    }
}

/// Runs the imitation dynamics on `network`.
///
/// States start as independent fair signs. Each round picks an investor uniformly, who
/// trades in its own state; then every neighbor, in adjacency order, either copies that
/// state with probability `p` and trades it, or trades its own unchanged state. Output
/// stops at exactly `events` orders, possibly mid-round.
///
/// Reaching a consensus state is reported in the metadata as `absorbed=true` together
/// with the first event index at which it held.
pub fn simulate_imitation(network: &SocialNetwork, params: &ImitationParams) -> Result<EventLog> {
    params.validate()?;
    if network.len() != params.investors {
        return Err(Error::InvalidParameter(format!(
            "network has {} nodes but {} investors were requested",
            network.len(),
            params.investors
        )));
    }
    let m = params.investors;
    let mut rng = seeded(params.seed);
    let mut state: Vec<Sign> = (0..m).map(|_| random_sign(&mut rng)).collect();
    let mut buyers = state.iter().filter(|&&s| s == Sign::Buy).count();
    let mut absorbed_at = (buyers == 0 || buyers == m).then_some(0usize);

    let mut log = EventLogBuilder::new(AgentRegistry::numbered(INVESTOR_PREFIX, m), params.events);
    'rounds: while log.len() < params.events {
        let i = rng.random_range(0..m);
        let s = state[i];
        log.push(s, i as u32, false);
        for &j in network.neighbors(i) {
            if log.len() == params.events {
                break 'rounds;
            }
            let j = j as usize;
            if rng.random::<f64>() < params.p {
                if state[j] != s {
                    if s == Sign::Buy {
                        buyers += 1;
                    } else {
                        buyers -= 1;
                    }
                    state[j] = s;
                    if absorbed_at.is_none() && (buyers == 0 || buyers == m) {
                        absorbed_at = Some(log.len());
                    }
                }
                log.push(s, j as u32, false);
            } else {
                log.push(state[j], j as u32, false);
            }
        }
    }
    let mut log = log.finish()?;
    log.metadata.set("model", "imitation");
    log.metadata.set("investors", m);
    log.metadata.set("p", params.p);
    log.metadata.set("events", params.events);
    log.metadata.set("seed", params.seed);
    log.metadata.set("initial_states", "iid uniform");
    log.metadata.set("neighbor_order", "adjacency (attachment order)");
    log.metadata.set("noise_injection", "unimplemented");
    log.metadata.set("absorbed", absorbed_at.is_some());
    if let Some(t) = absorbed_at {
        log.metadata.set("absorbed_at", t);
        log::warn!("imitation dynamics reached a consensus state at event {t}");
    }
    Ok(log)
}
