use std::collections::VecDeque;

use super::{OracleError, RevenueEvaluator, RevenueTracker};
use crate::network::{NodeId, TicNetwork};

/// Default cap on edges with probability strictly inside (0, 1).
pub const DEFAULT_EDGE_CAP: usize = 20;
/// Largest network for which [`ExactOracle`] tabulates every subset.
pub const MAX_TABLE_NODES: usize = 16;

// Edges with p = 1 are always live and p = 0 edges never are; only the rest
// are enumerated.
struct LiveEdgeWorlds {
    certain: Vec<(usize, usize)>,
    uncertain: Vec<(usize, usize, f64)>,
}

impl LiveEdgeWorlds {
    fn new(net: &TicNetwork, advertiser: usize, cap: usize) -> Result<Self, OracleError> {
        let mut certain = Vec::new();
        let mut uncertain = Vec::new();
        for (e, &(u, v)) in net.edges().iter().enumerate() {
            let p = net.prob(e, advertiser);
            if p >= 1.0 {
                certain.push((u as usize, v as usize));
            } else if p > 0.0 {
                uncertain.push((u as usize, v as usize, p));
            }
        }
        if uncertain.len() > cap {
            return Err(OracleError::EdgeCapExceeded {
                advertiser,
                uncertain: uncertain.len(),
                cap,
            });
        }
        Ok(LiveEdgeWorlds { certain, uncertain })
    }

    /// Calls `f(probability, live uncertain-edge mask)` for every world with
    /// positive probability.
    fn for_each(&self, mut f: impl FnMut(f64, u64)) {
        let k = self.uncertain.len();
        for world in 0u64..(1u64 << k) {
            let mut prob = 1.0;
            for (b, &(_, _, p)) in self.uncertain.iter().enumerate() {
                prob *= if world >> b & 1 == 1 { p } else { 1.0 - p };
            }
            if prob > 0.0 {
                f(prob, world);
            }
        }
    }
}

/// `σ_i(S)` by full live-edge enumeration: `Σ_worlds Pr[world] · |reach(S)|`.
pub fn exact_spread(
    net: &TicNetwork,
    advertiser: usize,
    seeds: &[NodeId],
    edge_cap: usize,
) -> Result<f64, OracleError> {
    if seeds.is_empty() {
        return Ok(0.0);
    }
    let worlds = LiveEdgeWorlds::new(net, advertiser, edge_cap)?;
    let n = net.node_count();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut total = 0.0;
    worlds.for_each(|prob, live| {
        adj.iter_mut().for_each(Vec::clear);
        for &(u, v) in &worlds.certain {
            adj[u].push(v);
        }
        for (b, &(u, v, _)) in worlds.uncertain.iter().enumerate() {
            if live >> b & 1 == 1 {
                adj[u].push(v);
            }
        }
        seen.iter_mut().for_each(|s| *s = false);
        let mut reached = 0usize;
        for &s in seeds {
            if !std::mem::replace(&mut seen[s as usize], true) {
                reached += 1;
                queue.push_back(s as usize);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !std::mem::replace(&mut seen[v], true) {
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        total += prob * reached as f64;
    });
    Ok(total)
}

/// Exact revenue oracle that tabulates `σ_i(S)` for every subset `S`.
///
/// Only for tiny networks (`n ≤ 16`, few uncertain edges); it backs the
/// brute-force optimum and the approximation-ratio checks.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    n: usize,
    cpe: Vec<f64>,
    // spreads[i][mask] = σ_i(mask)
    spreads: Vec<Vec<f64>>,
}

impl ExactOracle {
    pub fn new(net: &TicNetwork, cpe: &[f64]) -> Result<Self, OracleError> {
        Self::with_edge_cap(net, cpe, DEFAULT_EDGE_CAP)
    }

    pub fn with_edge_cap(net: &TicNetwork, cpe: &[f64], edge_cap: usize) -> Result<Self, OracleError> {
        let n = net.node_count();
        if n > MAX_TABLE_NODES {
            return Err(OracleError::TooManyNodes {
                nodes: n,
                cap: MAX_TABLE_NODES,
            });
        }
        if cpe.len() != net.advertiser_count() {
            return Err(OracleError::CpeMismatch(cpe.len(), net.advertiser_count()));
        }
        let spreads = (0..net.advertiser_count())
            .map(|i| spread_table(net, i, edge_cap))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExactOracle {
            n,
            cpe: cpe.to_vec(),
            spreads,
        })
    }

    /// `σ_i` of the node set encoded by `mask`.
    pub fn spread(&self, advertiser: usize, mask: usize) -> f64 {
        self.spreads[advertiser][mask]
    }

    pub fn cpe(&self) -> &[f64] {
        &self.cpe
    }
}

fn spread_table(net: &TicNetwork, advertiser: usize, edge_cap: usize) -> Result<Vec<f64>, OracleError> {
    let n = net.node_count();
    let worlds = LiveEdgeWorlds::new(net, advertiser, edge_cap)?;
    let mut base_out = vec![0u32; n];
    for &(u, v) in &worlds.certain {
        base_out[u] |= 1 << v;
    }
    let mut table = vec![0.0; 1 << n];
    let mut out = vec![0u32; n];
    let mut reach = vec![0u32; n];
    let mut union = vec![0u32; 1 << n];
    worlds.for_each(|prob, live| {
        out.copy_from_slice(&base_out);
        for (b, &(u, v, _)) in worlds.uncertain.iter().enumerate() {
            if live >> b & 1 == 1 {
                out[u] |= 1 << v;
            }
        }
        for v in 0..n {
            let mut r = 1u32 << v;
            loop {
                let mut next = r;
                let mut bits = r;
                while bits != 0 {
                    let u = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    next |= out[u];
                }
                if next == r {
                    break;
                }
                r = next;
            }
            reach[v] = r;
        }
        for mask in 1usize..(1 << n) {
            let low = mask.trailing_zeros() as usize;
            union[mask] = union[mask & (mask - 1)] | reach[low];
            table[mask] += prob * union[mask].count_ones() as f64;
        }
    });
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct ExactTracker<'a> {
    oracle: &'a ExactOracle,
    advertiser: usize,
    mask: usize,
}

impl RevenueTracker for ExactTracker<'_> {
    fn value(&self) -> f64 {
        self.oracle.cpe[self.advertiser] * self.oracle.spreads[self.advertiser][self.mask]
    }

    fn gain(&self, v: NodeId) -> f64 {
        let with = self.mask | (1 << v);
        if with == self.mask {
            return 0.0;
        }
        let table = &self.oracle.spreads[self.advertiser];
        (self.oracle.cpe[self.advertiser] * (table[with] - table[self.mask])).max(0.0)
    }

    fn insert(&mut self, v: NodeId) {
        self.mask |= 1 << v;
    }

    fn value_with(&self, v: NodeId) -> f64 {
        self.oracle.cpe[self.advertiser] * self.oracle.spreads[self.advertiser][self.mask | 1 << v]
    }
}

impl RevenueEvaluator for ExactOracle {
    type Tracker<'a> = ExactTracker<'a>;

    fn node_count(&self) -> usize {
        self.n
    }

    fn advertiser_count(&self) -> usize {
        self.cpe.len()
    }

    fn tracker(&self, advertiser: usize) -> ExactTracker<'_> {
        ExactTracker {
            oracle: self,
            advertiser,
            mask: 0,
        }
    }

    fn revenue(&self, advertiser: usize, seeds: &[NodeId]) -> f64 {
        let mask = seeds.iter().fold(0usize, |m, &v| m | 1 << v);
        self.cpe[advertiser] * self.spreads[advertiser][mask]
    }
}
