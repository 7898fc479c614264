use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Undirected tree grown by preferential attachment.
///
/// Nodes are numbered in attachment order, so walking `0..M` visits every node after the
/// node it attached to ([`SocialNetwork::parent`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialNetwork {
    adjacency: Vec<Vec<u32>>,
    parent: Vec<Option<u32>>,
    /// Per-node broker, filled by a correlated brokerage assignment.
    pub broker_of: Option<Vec<u32>>,
}

impl SocialNetwork {
    /// Builds a network from explicit parents (`None` only for the root, node 0).
    pub fn from_parents(parent: Vec<Option<u32>>) -> Result<Self> {
        if parent.len() < 2 {
            return Err(Error::InvalidParameter("a network needs at least 2 nodes".into()));
        }
        let mut adjacency = vec![Vec::new(); parent.len()];
        for (k, p) in parent.iter().enumerate() {
            match (k, p) {
                (0, None) => {}
                (k, Some(p)) if k > 0 && (*p as usize) < k => {
                    adjacency[*p as usize].push(k as u32);
                    adjacency[k].push(*p);
                }
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "node {k} has an invalid parent {p:?}"
                    )))
                }
            }
        }
        Ok(SocialNetwork {
            adjacency,
            parent,
            broker_of: None,
        })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Neighbors of `node` in the order their edges were created.
    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// The node each node attached to; `None` for the root.
    pub fn parent(&self, node: usize) -> Option<u32> {
        self.parent[node]
    }

    pub fn parents(&self) -> &[Option<u32>] {
        &self.parent
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Breadth-first connectivity check.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut queue = vec![0usize];
        seen[0] = true;
        while let Some(node) = queue.pop() {
            for &next in &self.adjacency[node] {
                if !seen[next as usize] {
                    seen[next as usize] = true;
                    queue.push(next as usize);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Grows a tree of `m` nodes: node 1 attaches to node 0, and every later node attaches
/// to one existing node chosen with probability proportional to its degree.
pub fn build_preferential_attachment(m: usize, seed: u64) -> Result<SocialNetwork> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "preferential attachment needs at least 2 nodes, got {m}"
        )));
    }
    let mut rng = seeded(seed);
    let mut parent = Vec::with_capacity(m);
    parent.push(None);
    parent.push(Some(0));
    // Every edge contributes both endpoints, so a uniform pick is degree-proportional.
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * (m - 1));
    endpoints.extend([0, 1]);
    for node in 2..m {
        let target = endpoints[rng.random_range(0..endpoints.len())];
        parent.push(Some(target));
        endpoints.extend([target, node as u32]);
    }
    SocialNetwork::from_parents(parent)
}

/// Maximum-likelihood exponent `a` of a discrete power-law degree density
/// `p(ℓ) ∼ ℓ^{-a}` for `ℓ ≥ l_min`, with the usual continuity correction.
pub fn degree_tail_exponent(network: &SocialNetwork, l_min: usize) -> Result<f64> {
    if l_min == 0 {
        return Err(Error::InvalidParameter("l_min must be positive".into()));
    }
    let floor = l_min as f64 - 0.5;
    let tail: Vec<f64> = network
        .degrees()
        .into_iter()
        .filter(|&d| d >= l_min)
        .map(|d| (d as f64 / floor).ln())
        .collect();
    if tail.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "only {} nodes with degree ≥ {l_min}",
            tail.len()
        )));
    }
    Ok(1.0 + tail.len() as f64 / tail.iter().sum::<f64>())
}
