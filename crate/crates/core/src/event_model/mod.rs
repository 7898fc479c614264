//! Event-log representation and agent bookkeeping.
//!
//! Time is event time: the `t`-th market order in a log has index `t`, and indices are
//! always the consecutive integers `0..N`. Internally a log is stored column-wise
//! (signs, agents, flags) because every analysis in this crate scans those columns
//! at fixed lags.

mod csv;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use self::csv::{export, export_to_path, ingest, ingest_path, ingest_reader, Format};

/// Direction of a market order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum Sign {
    Buy = 1,
    Sell = -1,
}

impl Sign {
    #[inline]
    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn from_value(v: i8) -> Option<Sign> {
        match v {
            1 => Some(Sign::Buy),
            -1 => Some(Sign::Sell),
            _ => None,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Buy => Sign::Sell,
            Sign::Sell => Sign::Buy,
        }
    }
}

/// Dense agent index into an [`AgentRegistry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

impl AgentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One market order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderEvent {
    pub t: usize,
    pub sign: Sign,
    pub agent: AgentId,
    /// True iff the order moved the price.
    pub price_changed: bool,
}

/// Maps dense agent ids to external labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgentRegistry {
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl AgentRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with labels `{prefix}0 .. {prefix}{count-1}`.
    pub fn numbered(prefix: &str, count: usize) -> Self {
        let mut reg = Self::new();
        for i in 0..count {
            reg.intern(&format!("{prefix}{i}"));
        }
        reg
    }

    /// Returns the id of `label`, registering it if unseen.
    pub fn intern(&mut self, label: &str) -> AgentId {
        if let Some(&id) = self.index.get(label) {
            return AgentId(id);
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        AgentId(id)
    }

    pub fn get(&self, label: &str) -> Option<AgentId> {
        self.index.get(label).map(|&id| AgentId(id))
    }

    pub fn label(&self, id: AgentId) -> &str {
        &self.labels[id.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Ordered `key=value` annotations carried with a log (simulator parameters, provenance).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        let pos = self.entries.iter().position(|(k, _)| k == key)?;
        Some(self.entries.remove(pos).1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// A time-ordered sequence of market orders with its agent registry.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    signs: Vec<i8>,
    agents: Vec<u32>,
    price_changed: Vec<bool>,
    has_price_flags: bool,
    registry: AgentRegistry,
    pub metadata: Metadata,
}

impl EventLog {
    /// Assembles a log from columns. `price_changed` of `None` means the source had no
    /// flag column; the flags then read as `false` and price-conditional analyses refuse
    /// the log.
    pub fn from_columns(
        signs: Vec<i8>,
        agents: Vec<u32>,
        price_changed: Option<Vec<bool>>,
        registry: AgentRegistry,
    ) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::EmptyLog);
        }
        if agents.len() != signs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} signs but {} agents",
                signs.len(),
                agents.len()
            )));
        }
        if let Some(bad) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!(
                "sign {} at t={bad} is not +1 or -1",
                signs[bad]
            )));
        }
        let m = registry.len() as u32;
        if let Some(bad) = agents.iter().position(|&a| a >= m) {
            return Err(Error::InvalidParameter(format!(
                "agent {} at t={bad} is not registered",
                agents[bad]
            )));
        }
        let has_price_flags = price_changed.is_some();
        let price_changed = match price_changed {
            Some(flags) if flags.len() != signs.len() => {
                return Err(Error::InvalidParameter(format!(
                    "{} signs but {} price flags",
                    signs.len(),
                    flags.len()
                )))
            }
            Some(flags) => flags,
            None => vec![false; signs.len()],
        };
        Ok(Self {
            signs,
            agents,
            price_changed,
            has_price_flags,
            registry,
            metadata: Metadata::default(),
        })
    }

    /// Number of events `N`.
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Number of registered agents `M`.
    pub fn num_agents(&self) -> usize {
        self.registry.len()
    }

    pub fn registry(&self) -> &AgentRegistry {
        &self.registry
    }

    /// Sign column as ±1 values.
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Agent column as dense ids.
    pub fn agents(&self) -> &[u32] {
        &self.agents
    }

    pub fn price_flags(&self) -> &[bool] {
        &self.price_changed
    }

    pub fn has_price_flags(&self) -> bool {
        self.has_price_flags
    }

    pub fn event(&self, t: usize) -> OrderEvent {
        OrderEvent {
            t,
            sign: Sign::from_value(self.signs[t]).expect("validated sign"),
            agent: AgentId(self.agents[t]),
            price_changed: self.price_changed[t],
        }
    }

    pub fn events(&self) -> impl Iterator<Item = OrderEvent> + '_ {
        (0..self.len()).map(move |t| self.event(t))
    }

    /// Per-agent event counts `N^i`, indexed by agent id.
    pub fn agent_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.num_agents()];
        for &a in &self.agents {
            counts[a as usize] += 1;
        }
        counts
    }

    /// Same events with the agent column replaced; used by brokerage maps.
    pub fn with_agents(&self, agents: Vec<u32>, registry: AgentRegistry) -> Result<Self> {
        let flags = self.has_price_flags.then(|| self.price_changed.clone());
        let mut log = Self::from_columns(self.signs.clone(), agents, flags, registry)?;
        log.metadata = self.metadata.clone();
        Ok(log)
    }

    /// Returns a copy whose registry lists only agents that trade, in first-appearance order.
    pub fn compacted(&self) -> Self {
        let mut remap = vec![u32::MAX; self.num_agents()];
        let mut registry = AgentRegistry::new();
        let agents = self
            .agents
            .iter()
            .map(|&a| {
                if remap[a as usize] == u32::MAX {
                    remap[a as usize] = registry.intern(self.registry.label(AgentId(a))).0;
                }
                remap[a as usize]
            })
            .collect();
        let mut log = self.clone();
        log.agents = agents;
        log.registry = registry;
        log
    }
}

/// Incrementally builds a log; used by the simulators.
#[derive(Debug)]
pub struct EventLogBuilder {
    signs: Vec<i8>,
    agents: Vec<u32>,
    flags: Vec<bool>,
    registry: AgentRegistry,
}

impl EventLogBuilder {
    pub fn new(registry: AgentRegistry, capacity: usize) -> Self {
        Self {
            signs: Vec::with_capacity(capacity),
            agents: Vec::with_capacity(capacity),
            flags: Vec::with_capacity(capacity),
            registry,
        }
    }

    #[inline]
    pub fn push(&mut self, sign: Sign, agent: u32, price_changed: bool) {
        self.signs.push(sign.value());
        self.agents.push(agent);
        self.flags.push(price_changed);
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn finish(self) -> Result<EventLog> {
        EventLog::from_columns(self.signs, self.agents, Some(self.flags), self.registry)
    }
}

/// Activity and direction summary of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentSummary {
    pub agent: AgentId,
    /// Event count `N^i`.
    pub count: u64,
    /// Trading frequency `P^i = N^i / N`.
    pub frequency: f64,
    /// Mean sign `μ^i`; zero for an agent with no events.
    pub mean_sign: f64,
}

/// One summary per registered agent, in id order.
pub fn agent_summaries(log: &EventLog) -> Vec<AgentSummary> {
    let m = log.num_agents();
    let mut counts = vec![0u64; m];
    let mut sums = vec![0i64; m];
    for (&a, &s) in log.agents.iter().zip(&log.signs) {
        counts[a as usize] += 1;
        sums[a as usize] += s as i64;
    }
    let n = log.len() as f64;
    (0..m)
        .map(|i| AgentSummary {
            agent: AgentId(i as u32),
            count: counts[i],
            frequency: counts[i] as f64 / n,
            mean_sign: if counts[i] > 0 {
                sums[i] as f64 / counts[i] as f64
            } else {
                0.0
            },
        })
        .collect()
}

/// Keeps only events of agents with at least `min_events` events and re-indexes time.
pub fn filter_inactive(log: &EventLog, min_events: u64) -> Result<EventLog> {
    if min_events == 0 {
        return Err(Error::InvalidParameter("min_events must be at least 1".into()));
    }
    let counts = log.agent_counts();
    let mut remap = vec![u32::MAX; counts.len()];
    let mut registry = AgentRegistry::new();
    for (i, &c) in counts.iter().enumerate() {
        if c >= min_events {
            remap[i] = registry.intern(log.registry.label(AgentId(i as u32))).0;
        }
    }
    let keep: Vec<usize> = (0..log.len())
        .filter(|&t| remap[log.agents[t] as usize] != u32::MAX)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyLog);
    }
    let signs = keep.iter().map(|&t| log.signs[t]).collect();
    let agents = keep
        .iter()
        .map(|&t| remap[log.agents[t] as usize])
        .collect();
    let flags = log
        .has_price_flags
        .then(|| keep.iter().map(|&t| log.price_changed[t]).collect());
    let mut out = EventLog::from_columns(signs, agents, flags, registry)?;
    out.metadata = log.metadata.clone();
    Ok(out)
}

/// Gini coefficient of the event-count distribution over agents that trade at least once:
/// `Σ_i Σ_j |N_i − N_j| / (2 M Σ_i N_i)`.
pub fn gini(log: &EventLog) -> f64 {
    let counts: Vec<u64> = log.agent_counts().into_iter().filter(|&c| c > 0).collect();
    gini_of_counts(&counts)
}

/// Gini coefficient of a set of non-negative activity levels. Zero for an empty or
/// all-zero input.
pub fn gini_of_counts(counts: &[u64]) -> f64 {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let m = sorted.len();
    let total: u64 = sorted.iter().sum();
    if m == 0 || total == 0 {
        return 0.0;
    }
    // With ascending order, Σ_i Σ_j |x_i − x_j| = 2 Σ_k (2k − m + 1) x_k.
    let weighted: i128 = sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| (2 * k as i128 - m as i128 + 1) * x as i128)
        .sum();
    (2 * weighted) as f64 / (2.0 * m as f64 * total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_from(signs: &[i8], agents: &[u32], m: usize) -> EventLog {
        EventLog::from_columns(
            signs.to_vec(),
            agents.to_vec(),
            None,
            AgentRegistry::numbered("a", m),
        )
        .unwrap()
    }

    #[test]
    fn single_agent_summary() {
        let log = log_from(&[1, 1, -1, 1], &[0, 0, 0, 0], 1);
        let s = agent_summaries(&log);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].frequency, 1.0);
        assert_eq!(s[0].mean_sign, 0.5);
    }

    #[test]
    fn alternating_agents_share_frequency() {
        let agents: Vec<u32> = (0..100).map(|t| t % 2).collect();
        let signs = vec![1i8; 100];
        let s = agent_summaries(&log_from(&signs, &agents, 2));
        assert_eq!(s[0].frequency, 0.5);
        assert_eq!(s[1].frequency, 0.5);
    }

    #[test]
    fn filter_straddles_threshold() {
        let mut agents = vec![0u32; 150];
        agents.extend(std::iter::repeat(1).take(50));
        let signs: Vec<i8> = (0..200).map(|t| if t % 3 == 0 { -1 } else { 1 }).collect();
        let log = log_from(&signs, &agents, 2);
        let out = filter_inactive(&log, 100).unwrap();
        assert_eq!(out.len(), 150);
        assert_eq!(out.num_agents(), 1);
        assert_eq!(out.registry().label(AgentId(0)), "a0");
        assert_eq!(out.signs(), &signs[..150]);
    }

    #[test]
    fn filter_with_threshold_one_is_identity() {
        let log = log_from(&[1, -1, 1], &[0, 1, 0], 2);
        assert_eq!(filter_inactive(&log, 1).unwrap(), log);
    }

    #[test]
    fn filter_everything_is_an_error() {
        let log = log_from(&[1, -1, 1], &[0, 1, 0], 2);
        assert!(matches!(filter_inactive(&log, 10), Err(Error::EmptyLog)));
        assert!(matches!(
            filter_inactive(&log, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini_of_counts(&[5, 5, 5, 5]), 0.0);
        assert!((gini_of_counts(&[1, 1, 1, 97]) - 0.72).abs() < 1e-12);
        assert_eq!(gini_of_counts(&[42]), 0.0);
    }

    #[test]
    fn rejects_bad_columns() {
        let reg = AgentRegistry::numbered("a", 1);
        assert!(matches!(
            EventLog::from_columns(vec![], vec![], None, reg.clone()),
            Err(Error::EmptyLog)
        ));
        assert!(EventLog::from_columns(vec![2], vec![0], None, reg.clone()).is_err());
        assert!(EventLog::from_columns(vec![1], vec![1], None, reg).is_err());
    }

    #[test]
    fn compaction_orders_by_first_appearance() {
        let log = log_from(&[1, 1, -1], &[3, 1, 3], 5);
        let c = log.compacted();
        assert_eq!(c.num_agents(), 2);
        assert_eq!(c.agents(), &[0, 1, 0]);
        assert_eq!(c.registry().labels(), &["a3".to_string(), "a1".to_string()]);
    }
}
