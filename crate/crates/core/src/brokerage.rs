//! Brokerage maps: translating investor-level logs into broker-level logs.
//!
//! A fixed map gives every investor one broker for the whole log. A dynamic map draws a
//! fresh broker from the broker frequencies on every order. A correlated map is a fixed
//! map grown along a social network, where each investor copies the broker of the node
//! it attached to with probability `phi`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event_model::{AgentRegistry, EventLog};
use crate::rng::{seeded, stream};
use crate::simulators::frequencies::variance;
use crate::simulators::{SocialNetwork, INVESTOR_PREFIX};

/// Label prefix of brokers in profiles built from bare frequency vectors.
pub const BROKER_PREFIX: &str = "brk";

/// Events per independent random stream when applying a dynamic map.
pub const DYNAMIC_CHUNK: usize = 1 << 16;

/// Largest number of rebalancing passes in [`fixed_random_map`].
pub const MAX_REBALANCE_PASSES: usize = 100;

/// Broker trading frequencies `P′` with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct BrokerProfile {
    labels: Vec<String>,
    frequencies: Vec<f64>,
}

impl BrokerProfile {
    /// Profile labelled `brk0 ..`. Frequencies must be positive and sum to one within
    /// `1e-6`; they are renormalized so that the sum is one to rounding.
    pub fn new(frequencies: Vec<f64>) -> Result<Self> {
        let labels = (0..frequencies.len())
            .map(|b| format!("{BROKER_PREFIX}{b}"))
            .collect();
        Self::with_labels(labels, frequencies)
    }

    pub fn with_labels(labels: Vec<String>, frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::InvalidParameter("broker profile is empty".into()));
        }
        if labels.len() != frequencies.len() {
            return Err(Error::InvalidParameter(
                "one label per broker frequency required".into(),
            ));
        }
        if let Some(b) = frequencies.iter().position(|&f| !(f > 0.0) || !f.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "broker {} has frequency {}",
                labels[b], frequencies[b]
            )));
        }
        let total: f64 = frequencies.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "broker frequencies sum to {total}, expected 1"
            )));
        }
        let frequencies = frequencies.into_iter().map(|f| f / total).collect();
        Ok(Self {
            labels,
            frequencies,
        })
    }

    /// Equal frequencies over `m` brokers.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    /// Number of brokers `M′`.
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `Var[P′]`
    pub fn variance(&self) -> f64 {
        variance(&self.frequencies)
    }

    fn registry(&self) -> AgentRegistry {
        let mut reg = AgentRegistry::new();
        for label in &self.labels {
            reg.intern(label);
        }
        reg
    }

    fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.frequencies).expect("validated frequencies")
    }

    /// Reads a `broker,frequency` CSV with header.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut labels = Vec::new();
        let mut freqs = Vec::new();
        let mut header_seen = false;
        for (k, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                record: labels.len() + 1,
                line: k + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if !header_seen {
                if fields != ["broker", "frequency"] {
                    return Err(parse_err(format!(
                        "expected header `broker,frequency`, found `{line}`"
                    )));
                }
                header_seen = true;
                continue;
            }
            if fields.len() != 2 || fields[0].is_empty() {
                return Err(parse_err(format!("expected 2 fields, found `{line}`")));
            }
            let f: f64 = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad frequency `{}`", fields[1])))?;
            labels.push(fields[0].to_string());
            freqs.push(f);
        }
        if freqs.is_empty() {
            return Err(Error::InvalidParameter("broker profile file has no rows".into()));
        }
        Self::with_labels(labels, freqs)
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "broker,frequency")?;
        for (label, f) in self.labels.iter().zip(&self.frequencies) {
            writeln!(w, "{label},{f}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    FixedRandom,
    DynamicRandom,
    Correlated,
}

impl MapKind {
    pub fn label(self) -> &'static str {
        match self {
            MapKind::FixedRandom => "fixed_random",
            MapKind::DynamicRandom => "dynamic_random",
            MapKind::Correlated => "correlated",
        }
    }
}

/// Rule assigning investor-level events to brokers.
#[derive(Debug, Clone, PartialEq)]
pub struct BrokerageMap {
    kind: MapKind,
    /// Broker per investor; empty for dynamic maps.
    assignment: Vec<u32>,
    profile: BrokerProfile,
    phi: Option<f64>,
    seed: u64,
}

impl BrokerageMap {
    /// A fixed map from an explicit assignment, e.g. an identity relabeling.
    pub fn fixed(assignment: Vec<u32>, profile: BrokerProfile) -> Result<Self> {
        if let Some(&b) = assignment.iter().find(|&&b| b as usize >= profile.len()) {
            return Err(Error::InvalidParameter(format!(
                "broker {b} outside a profile of {} brokers",
                profile.len()
            )));
        }
        Ok(Self {
            kind: MapKind::FixedRandom,
            assignment,
            profile,
            phi: None,
            seed: 0,
        })
    }

    /// Independent broker draw from `profile` on every event.
    pub fn dynamic(profile: BrokerProfile, seed: u64) -> Self {
        Self {
            kind: MapKind::DynamicRandom,
            assignment: Vec::new(),
            profile,
            phi: None,
            seed,
        }
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// Broker per investor, for fixed and correlated maps.
    pub fn assignment(&self) -> Option<&[u32]> {
        (self.kind != MapKind::DynamicRandom).then_some(&self.assignment[..])
    }

    pub fn profile(&self) -> &BrokerProfile {
        &self.profile
    }

    pub fn phi(&self) -> Option<f64> {
        self.phi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_brokers(&self) -> usize {
        self.profile.len()
    }

    /// Broker frequencies implied by investor frequencies under a fixed map, or the
    /// profile itself for a dynamic map.
    pub fn realized_frequencies(&self, investor_freqs: &[f64]) -> Result<Vec<f64>> {
        if self.kind == MapKind::DynamicRandom {
            return Ok(self.profile.frequencies.clone());
        }
        if investor_freqs.len() > self.assignment.len() {
            return Err(Error::Mapping(self.assignment.len() as u32));
        }
        let mut loads = vec![0.0; self.num_brokers()];
        for (i, &f) in investor_freqs.iter().enumerate() {
            loads[self.assignment[i] as usize] += f;
        }
        Ok(loads)
    }

    /// Writes `investor,broker` rows for a fixed or correlated map.
    pub fn write_csv<W: Write>(&self, mut w: W, investors: Option<&AgentRegistry>) -> Result<()> {
        let assignment = self.assignment().ok_or_else(|| {
            Error::InvalidParameter("a dynamic map has no per-investor assignment".into())
        })?;
        writeln!(w, "# kind={}", self.kind.label())?;
        if let Some(phi) = self.phi {
            writeln!(w, "# phi={phi}")?;
        }
        writeln!(w, "# seed={}", self.seed)?;
        writeln!(w, "investor,broker")?;
        for (i, &b) in assignment.iter().enumerate() {
            let broker = &self.profile.labels[b as usize];
            match investors.and_then(|r| r.labels().get(i)) {
                Some(label) => writeln!(w, "{label},{broker}")?,
                None => writeln!(w, "{INVESTOR_PREFIX}{i},{broker}")?,
            }
        }
        Ok(())
    }
}

/// Fixed map in which each investor picks broker `b` with probability `P′^b`, followed by
/// rebalancing until every broker's aggregated investor frequency is within
/// `0.1 · min(P′)` of its target.
///
/// Investor frequencies must be non-negative and sum to one. Rebalancing repeatedly pairs
/// the broker with the largest excess with the one with the largest deficit and moves
/// investors (or swaps a pair) between them.
pub fn fixed_random_map(
    investor_freqs: &[f64],
    profile: &BrokerProfile,
    seed: u64,
) -> Result<BrokerageMap> {
    if investor_freqs.is_empty() {
        return Err(Error::InvalidParameter("no investors to assign".into()));
    }
    if investor_freqs.iter().any(|&f| !(f >= 0.0) || !f.is_finite()) {
        return Err(Error::InvalidParameter(
            "investor frequencies must be non-negative".into(),
        ));
    }
    let total: f64 = investor_freqs.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "investor frequencies sum to {total}, expected 1"
        )));
    }
    let target = profile.frequencies();
    let max_target = target.iter().cloned().fold(0.0, f64::max);
    let max_investor = investor_freqs.iter().cloned().fold(0.0, f64::max);
    if max_investor > max_target * (1.0 + 1e-12) {
        return Err(Error::Feasibility(format!(
            "an investor trades with frequency {max_investor}, above the largest broker \
             frequency {max_target}"
        )));
    }
    let tol = 0.1 * target.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut rng = seeded(seed);
    let sampler = profile.sampler();
    let mut assignment: Vec<u32> = investor_freqs
        .iter()
        .map(|_| sampler.sample(&mut rng) as u32)
        .collect();

    let mut members: Vec<Vec<u32>> = vec![Vec::new(); profile.len()];
    let mut dev: Vec<f64> = target.iter().map(|t| -t).collect();
    for (i, &b) in assignment.iter().enumerate() {
        members[b as usize].push(i as u32);
        dev[b as usize] += investor_freqs[i];
    }
    let worst = |dev: &[f64]| dev.iter().fold(0.0f64, |m, d| m.max(d.abs()));

    let mut converged = worst(&dev) <= tol;
    for _ in 0..MAX_REBALANCE_PASSES {
        if converged {
            break;
        }
        for _ in 0..profile.len() {
            if !rebalance_step(investor_freqs, &mut members, &mut dev) {
                return Err(Error::Feasibility(format!(
                    "no assignment change reduces the broker deviation {} below {tol}",
                    worst(&dev)
                )));
            }
            if worst(&dev) <= tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Feasibility(format!(
            "broker frequencies not within {tol} after {MAX_REBALANCE_PASSES} passes"
        )));
    }
    for (b, list) in members.iter().enumerate() {
        for &i in list {
            assignment[i as usize] = b as u32;
        }
    }
    Ok(BrokerageMap {
        kind: MapKind::FixedRandom,
        assignment,
        profile: profile.clone(),
        phi: None,
        seed,
    })
}

/// Ordering of broker indices by deviation, largest first.
fn by_deviation(dev: &[f64], descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..dev.len()).collect();
    idx.sort_by(|&a, &b| {
        let ord = dev[a].total_cmp(&dev[b]).then(a.cmp(&b));
        if descending {
            ord.reverse()
        } else {
            ord
        }
    });
    idx
}

/// One transfer that lowers the sum of squared deviations, preferring the broker
/// furthest from its target. Returns false if no transfer between any pair of brokers
/// lowers it.
fn rebalance_step(freqs: &[f64], members: &mut [Vec<u32>], dev: &mut [f64]) -> bool {
    let excess: Vec<usize> = by_deviation(dev, true)
        .into_iter()
        .filter(|&b| dev[b] > 0.0)
        .collect();
    let deficit: Vec<usize> = by_deviation(dev, false)
        .into_iter()
        .filter(|&b| dev[b] < 0.0)
        .collect();
    let (Some(&top_e), Some(&top_d)) = (excess.first(), deficit.first()) else {
        return false;
    };
    // The most urgent broker first, paired with partners in order of need.
    let preferred: Vec<(usize, usize)> = if dev[top_e] >= -dev[top_d] {
        deficit.iter().map(|&d| (top_e, d)).collect()
    } else {
        excess.iter().map(|&e| (e, top_d)).collect()
    };
    if preferred
        .into_iter()
        .any(|(e, d)| transfer(freqs, members, dev, e, d))
    {
        return true;
    }
    let mut pairs: Vec<(usize, usize)> = (0..dev.len())
        .flat_map(|e| (0..dev.len()).map(move |d| (e, d)))
        .filter(|&(e, d)| dev[e] > dev[d])
        .collect();
    pairs.sort_by(|a, b| (dev[b.0] - dev[b.1]).total_cmp(&(dev[a.0] - dev[a.1])).then(a.cmp(b)));
    pairs
        .into_iter()
        .any(|(e, d)| transfer(freqs, members, dev, e, d))
}

/// Investors of `list` sorted by decreasing frequency.
fn sorted_desc(freqs: &[f64], list: &[u32]) -> Vec<u32> {
    let mut order = list.to_vec();
    order.sort_by(|&a, &b| freqs[b as usize].total_cmp(&freqs[a as usize]).then(a.cmp(&b)));
    order
}

/// Greedily picks investors whose frequencies add up to at most `budget`.
fn fill(freqs: &[f64], sorted: &[u32], mut budget: f64) -> (Vec<u32>, f64) {
    let mut picked = Vec::new();
    let mut total = 0.0;
    for &i in sorted {
        let f = freqs[i as usize];
        if f > 0.0 && f <= budget {
            budget -= f;
            total += f;
            picked.push(i);
        }
    }
    (picked, total)
}

/// Moves frequency from broker `e` to broker `d`. Any net amount in
/// `(0, dev[e] − dev[d])` lowers the sum of squared deviations; half that width is ideal.
fn transfer(freqs: &[f64], members: &mut [Vec<u32>], dev: &mut [f64], e: usize, d: usize) -> bool {
    let width = dev[e] - dev[d];
    let ideal = 0.5 * width;
    let from_e = sorted_desc(freqs, &members[e]);

    let (moved, _) = fill(freqs, &from_e, ideal);
    if !moved.is_empty() {
        for i in moved {
            move_investor(freqs, members, dev, i, e, d);
        }
        return true;
    }

    // Every investor of e is larger than wanted: move one across and send smaller
    // investors of d back so that the net amount lands near the ideal.
    let from_d = sorted_desc(freqs, &members[d]);
    let mut best: Option<(f64, u32, Vec<u32>)> = None;
    for &i in &from_e {
        let fi = freqs[i as usize];
        let (back, total) = fill(freqs, &from_d, fi - ideal);
        let net = fi - total;
        if net > 0.0 && net < width {
            let gap = (net - ideal).abs();
            if best.as_ref().is_none_or(|(g, _, _)| gap < *g) {
                best = Some((gap, i, back));
            }
        }
    }
    match best {
        Some((_, i, back)) => {
            move_investor(freqs, members, dev, i, e, d);
            for j in back {
                move_investor(freqs, members, dev, j, d, e);
            }
            true
        }
        None => false,
    }
}

fn move_investor(freqs: &[f64], members: &mut [Vec<u32>], dev: &mut [f64], i: u32, from: usize, to: usize) {
    let pos = members[from].iter().position(|&x| x == i).expect("member present");
    members[from].swap_remove(pos);
    members[to].push(i);
    let f = freqs[i as usize];
    dev[from] -= f;
    dev[to] += f;
}

/// Fixed map grown along the network's attachment order: the root draws from `P′`, and
/// each later node copies the broker of the node it attached to with probability `phi`,
/// otherwise draws from `P′`. No rebalancing is done.
pub fn correlated_broker_assignment(
    network: &SocialNetwork,
    profile: &BrokerProfile,
    phi: f64,
    seed: u64,
) -> Result<BrokerageMap> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::InvalidParameter(format!("phi must lie in [0,1], got {phi}")));
    }
    let mut rng = seeded(seed);
    let sampler = profile.sampler();
    let mut assignment = Vec::with_capacity(network.len());
    for node in 0..network.len() {
        let broker = match network.parent(node) {
            None if node == 0 => sampler.sample(&mut rng) as u32,
            None => {
                return Err(Error::InvalidParameter(format!(
                    "node {node} has no recorded attachment"
                )))
            }
            Some(p) => {
                if rng.random::<f64>() < phi {
                    assignment[p as usize]
                } else {
                    sampler.sample(&mut rng) as u32
                }
            }
        };
        assignment.push(broker);
    }
    Ok(BrokerageMap {
        kind: MapKind::Correlated,
        assignment,
        profile: profile.clone(),
        phi: Some(phi),
        seed,
    })
}

/// Records a fixed map's brokers on the network nodes.
pub fn label_network(network: &mut SocialNetwork, map: &BrokerageMap) -> Result<()> {
    let assignment = map.assignment().ok_or_else(|| {
        Error::InvalidParameter("a dynamic map has no per-investor assignment".into())
    })?;
    if assignment.len() != network.len() {
        return Err(Error::InvalidParameter(format!(
            "map covers {} investors but the network has {} nodes",
            assignment.len(),
            network.len()
        )));
    }
    network.broker_of = Some(assignment.to_vec());
    Ok(())
}

/// Replaces every investor by its broker. Signs, order and price flags are unchanged.
///
/// A dynamic map draws event `t`'s broker from stream `t / DYNAMIC_CHUNK` of the map
/// seed, so the output does not depend on how chunks are scheduled.
pub fn apply_map(log: &EventLog, map: &BrokerageMap) -> Result<EventLog> {
    let agents = match map.kind {
        MapKind::FixedRandom | MapKind::Correlated => {
            if let Some(&a) = log.agents().iter().find(|&&a| a as usize >= map.assignment.len()) {
                return Err(Error::Mapping(a));
            }
            log.agents()
                .par_iter()
                .with_min_len(DYNAMIC_CHUNK)
                .map(|&a| map.assignment[a as usize])
                .collect()
        }
        MapKind::DynamicRandom => {
            let sampler = map.profile.sampler();
            let mut out = vec![0u32; log.len()];
            out.par_chunks_mut(DYNAMIC_CHUNK)
                .enumerate()
                .for_each(|(chunk, slots)| {
                    let mut rng = stream(map.seed, chunk as u64);
                    for slot in slots {
                        *slot = sampler.sample(&mut rng) as u32;
                    }
                });
            out
        }
    };
    let mut out = log.with_agents(agents, map.profile.registry())?;
    out.metadata.set("brokerage", map.kind.label());
    out.metadata.set("brokers", map.num_brokers());
    out.metadata.set("brokerage_seed", map.seed);
    if let Some(phi) = map.phi {
        out.metadata.set("phi", phi);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::{EventLogBuilder, Sign};
    use crate::simulators::build_preferential_attachment;
    use crate::simulators::frequencies::zipf;

    fn max_dev(map: &BrokerageMap, freqs: &[f64]) -> f64 {
        let loads = map.realized_frequencies(freqs).unwrap();
        loads
            .iter()
            .zip(map.profile().frequencies())
            .map(|(l, t)| (l - t).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn uniform_square_is_a_bijection() {
        for seed in 0..5 {
            let m = 40;
            let freqs = vec![1.0 / m as f64; m];
            let map = fixed_random_map(&freqs, &BrokerProfile::uniform(m).unwrap(), seed).unwrap();
            let mut seen = map.assignment().unwrap().to_vec();
            seen.sort_unstable();
            assert_eq!(seen, (0..m as u32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn zipf_investors_meet_tolerance() {
        let freqs = zipf(100, 0.7);
        let profile = BrokerProfile::uniform(10).unwrap();
        let map = fixed_random_map(&freqs, &profile, 3).unwrap();
        assert!(max_dev(&map, &freqs) <= 0.1 * 0.1);
    }

    #[test]
    fn infeasible_investor_rejected() {
        let freqs = vec![0.5, 0.25, 0.25];
        let profile = BrokerProfile::uniform(4).unwrap();
        assert!(matches!(
            fixed_random_map(&freqs, &profile, 0),
            Err(Error::Feasibility(_))
        ));
    }

    #[test]
    fn profile_csv_round_trip() {
        let profile = BrokerProfile::with_labels(
            vec!["x".into(), "y".into()],
            vec![0.25, 0.75],
        )
        .unwrap();
        let mut buf = Vec::new();
        profile.write_csv(&mut buf).unwrap();
        assert_eq!(BrokerProfile::read_csv(&buf[..]).unwrap(), profile);
        assert!(BrokerProfile::read_csv(&b"broker,frequency\nx,0.5\n"[..]).is_err());
        assert!(BrokerProfile::read_csv(&b"broker,freq\nx,1\n"[..]).is_err());
    }

    fn small_log() -> EventLog {
        let mut b = EventLogBuilder::new(AgentRegistry::numbered("inv", 3), 6);
        for (k, a) in [0u32, 1, 2, 2, 1, 0].into_iter().enumerate() {
            let s = if k % 2 == 0 { Sign::Buy } else { Sign::Sell };
            b.push(s, a, k == 3);
        }
        b.finish().unwrap()
    }

    #[test]
    fn fixed_map_relabels_only() {
        let log = small_log();
        let map = BrokerageMap::fixed(vec![1, 0, 1], BrokerProfile::uniform(2).unwrap()).unwrap();
        let out = apply_map(&log, &map).unwrap();
        assert_eq!(out.agents(), &[1, 0, 1, 1, 0, 1]);
        assert_eq!(out.signs(), log.signs());
        assert_eq!(out.price_flags(), log.price_flags());
        let short = BrokerageMap::fixed(vec![0, 0], BrokerProfile::uniform(2).unwrap()).unwrap();
        assert!(matches!(apply_map(&log, &short), Err(Error::Mapping(2))));
    }

    #[test]
    fn dynamic_map_matches_sequential_streams() {
        let n = 3 * DYNAMIC_CHUNK + 17;
        let mut b = EventLogBuilder::new(AgentRegistry::numbered("inv", 1), n);
        for _ in 0..n {
            b.push(Sign::Buy, 0, false);
        }
        let log = b.finish().unwrap();
        let profile = BrokerProfile::new(zipf(5, 1.0)).unwrap();
        let map = BrokerageMap::dynamic(profile.clone(), 21);
        let out = apply_map(&log, &map).unwrap();
        let sampler = profile.sampler();
        let mut expected = Vec::with_capacity(n);
        for chunk in 0..n.div_ceil(DYNAMIC_CHUNK) {
            let mut rng = stream(21, chunk as u64);
            let len = DYNAMIC_CHUNK.min(n - chunk * DYNAMIC_CHUNK);
            expected.extend((0..len).map(|_| sampler.sample(&mut rng) as u32));
        }
        assert_eq!(out.agents(), &expected[..]);
    }

    #[test]
    fn correlated_extremes() {
        let net = build_preferential_attachment(500, 1).unwrap();
        let profile = BrokerProfile::uniform(10).unwrap();
        let all_same = correlated_broker_assignment(&net, &profile, 1.0, 2).unwrap();
        let a = all_same.assignment().unwrap();
        assert!(a.iter().all(|&b| b == a[0]));
        let freqs = vec![1.0 / 500.0; 500];
        let v = variance(&all_same.realized_frequencies(&freqs).unwrap());
        assert!((v - 0.1 * 0.9).abs() < 1e-12);
        let mut net = net;
        label_network(&mut net, &all_same).unwrap();
        assert_eq!(net.broker_of.as_deref(), Some(a));
        assert!(correlated_broker_assignment(&net, &profile, 1.5, 2).is_err());
    }
}
