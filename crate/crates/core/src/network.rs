//! Directed social graph with per-advertiser activation probabilities.
//!
//! Probabilities are materialized per advertiser at construction time, whether
//! they come from a per-advertiser edge list, a topic mixture or the
//! weighted-cascade rule. The reverse adjacency (used by RR sampling) and the
//! forward adjacency (used by cascades and exact enumeration) are CSR arrays
//! with advertiser-major probability blocks.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{keyed_rng, Stream};

pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { line: usize, value: f64 },
    #[error("line {line}: node id {id} is not below the declared node count {node_count}")]
    DanglingNode {
        line: usize,
        id: u64,
        node_count: usize,
    },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: u64 },
    #[error("edge {edge}: probability {value} for advertiser {advertiser} outside [0, 1]")]
    InvalidProbability {
        edge: usize,
        advertiser: usize,
        value: f64,
    },
    #[error("edge {edge} references node {node} but the network has {node_count} nodes")]
    NodeOutOfRange {
        edge: usize,
        node: NodeId,
        node_count: usize,
    },
    #[error("edge {edge} is a self-loop")]
    SelfLoopEdge { edge: usize },
    #[error("probability table has {actual} entries, expected {expected}")]
    ProbabilityTableSize { expected: usize, actual: usize },
    #[error("topic mixture: {0}")]
    Mixture(String),
    #[error("a network needs at least one advertiser")]
    NoAdvertisers,
}

/// Directed graph with activation probabilities `p[i][(u, v)]` for every
/// advertiser `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TicNetwork {
    node_count: usize,
    advertisers: usize,
    edges: Vec<(NodeId, NodeId)>,
    // edge-major: probs[e * h + i]
    probs: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    in_edges: Vec<u32>,
    // advertiser-major, aligned with in_sources: in_probs[i * m + k]
    in_probs: Vec<f64>,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_probs: Vec<f64>,
}

impl TicNetwork {
    /// Builds a network from an edge list and an edge-major probability
    /// table (`probs[e * advertisers + i]`).
    pub fn new(
        node_count: usize,
        advertisers: usize,
        edges: Vec<(NodeId, NodeId)>,
        probs: Vec<f64>,
    ) -> Result<Self, NetworkError> {
        if advertisers == 0 {
            return Err(NetworkError::NoAdvertisers);
        }
        let m = edges.len();
        if probs.len() != m * advertisers {
            return Err(NetworkError::ProbabilityTableSize {
                expected: m * advertisers,
                actual: probs.len(),
            });
        }
        for (e, &(u, v)) in edges.iter().enumerate() {
            for node in [u, v] {
                if node as usize >= node_count {
                    return Err(NetworkError::NodeOutOfRange {
                        edge: e,
                        node,
                        node_count,
                    });
                }
            }
            if u == v {
                return Err(NetworkError::SelfLoopEdge { edge: e });
            }
            for i in 0..advertisers {
                let p = probs[e * advertisers + i];
                if !(0.0..=1.0).contains(&p) {
                    return Err(NetworkError::InvalidProbability {
                        edge: e,
                        advertiser: i,
                        value: p,
                    });
                }
            }
        }

        let (in_offsets, in_order) = csr_order(node_count, edges.iter().map(|&(_, v)| v));
        let (out_offsets, out_order) = csr_order(node_count, edges.iter().map(|&(u, _)| u));
        let in_sources = in_order.iter().map(|&e| edges[e as usize].0).collect();
        let out_targets = out_order.iter().map(|&e| edges[e as usize].1).collect();
        let mut in_probs = Vec::with_capacity(m * advertisers);
        let mut out_probs = Vec::with_capacity(m * advertisers);
        for i in 0..advertisers {
            in_probs.extend(in_order.iter().map(|&e| probs[e as usize * advertisers + i]));
            out_probs.extend(out_order.iter().map(|&e| probs[e as usize * advertisers + i]));
        }

        Ok(TicNetwork {
            node_count,
            advertisers,
            edges,
            probs,
            in_offsets,
            in_sources,
            in_edges: in_order,
            in_probs,
            out_offsets,
            out_targets,
            out_probs,
        })
    }

    /// Weighted-cascade network: every advertiser gets `p(u, v) = 1 / indeg(v)`.
    pub fn weighted_cascade(
        node_count: usize,
        advertisers: usize,
        edges: Vec<(NodeId, NodeId)>,
    ) -> Result<Self, NetworkError> {
        let mut indeg = vec![0usize; node_count];
        for &(_, v) in &edges {
            if let Some(d) = indeg.get_mut(v as usize) {
                *d += 1;
            }
        }
        let probs = edges
            .iter()
            .flat_map(|&(_, v)| {
                let p = 1.0 / indeg.get(v as usize).copied().unwrap_or(1).max(1) as f64;
                std::iter::repeat_n(p, advertisers)
            })
            .collect();
        Self::new(node_count, advertisers, edges, probs)
    }

    /// The same graph keeping only advertisers `0..k`.
    pub fn restrict_advertisers(&self, k: usize) -> Result<Self, NetworkError> {
        let h = self.advertisers;
        assert!(k <= h, "cannot keep {k} of {h} advertisers");
        let probs = (0..self.edges.len())
            .flat_map(|e| self.probs[e * h..e * h + k].iter().copied())
            .collect();
        Self::new(self.node_count, k, self.edges.clone(), probs)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn advertiser_count(&self) -> usize {
        self.advertisers
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn prob(&self, edge: usize, advertiser: usize) -> f64 {
        self.probs[edge * self.advertisers + advertiser]
    }

    /// Incoming `(source, probability)` pairs of `v` under `advertiser`.
    pub fn in_neighbors(&self, v: NodeId, advertiser: usize) -> (&[NodeId], &[f64]) {
        let (lo, hi) = (self.in_offsets[v as usize], self.in_offsets[v as usize + 1]);
        let base = advertiser * self.edges.len();
        (&self.in_sources[lo..hi], &self.in_probs[base + lo..base + hi])
    }

    /// Outgoing `(target, probability)` pairs of `u` under `advertiser`.
    pub fn out_neighbors(&self, u: NodeId, advertiser: usize) -> (&[NodeId], &[f64]) {
        let (lo, hi) = (self.out_offsets[u as usize], self.out_offsets[u as usize + 1]);
        let base = advertiser * self.edges.len();
        (&self.out_targets[lo..hi], &self.out_probs[base + lo..base + hi])
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    /// Forward edge ids rebuilt from the reverse index, sorted. Used to check
    /// that the reverse adjacency is the transpose of the edge list.
    pub fn edges_from_reverse_index(&self) -> Vec<(NodeId, NodeId, u32)> {
        let mut out = Vec::with_capacity(self.edges.len());
        for v in 0..self.node_count {
            for k in self.in_offsets[v]..self.in_offsets[v + 1] {
                out.push((self.in_sources[k], v as NodeId, self.in_edges[k]));
            }
        }
        out.sort_unstable();
        out
    }

    /// Writes the network in the per-advertiser edge-list format.
    pub fn write_per_advertiser<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# nodes {} edges {} advertisers {}",
            self.node_count,
            self.edges.len(),
            self.advertisers
        )?;
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            write!(w, "{u} {v}")?;
            for i in 0..self.advertisers {
                write!(w, " {}", self.prob(e, i))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Writes the bare `src dst` edge list (weighted-cascade format).
    pub fn write_edge_pairs<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# nodes {} edges {}", self.node_count, self.edges.len())?;
        for &(u, v) in &self.edges {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }
}

// Counting sort of edge ids by key; returns (offsets, edge ids in key order).
fn csr_order(n: usize, keys: impl Iterator<Item = NodeId> + Clone) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; n + 1];
    for k in keys.clone() {
        offsets[k as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut order = vec![0u32; offsets[n]];
    for (e, k) in keys.enumerate() {
        order[cursor[k as usize]] = e as u32;
        cursor[k as usize] += 1;
    }
    (offsets, order)
}

/// Topic-aware probabilities: `p[i][e] = Σ_z φ_i(z) · p̂_z[e]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    topics: usize,
    // edge-major: edge_topic[e * topics + z]
    edge_topic: Vec<f64>,
    mixtures: Vec<Vec<f64>>,
}

impl TopicModel {
    pub fn new(topics: usize, edge_topic: Vec<f64>, mixtures: Vec<Vec<f64>>) -> Result<Self, NetworkError> {
        if topics == 0 || !edge_topic.len().is_multiple_of(topics) {
            return Err(NetworkError::Mixture(format!(
                "{} per-topic probabilities do not split into {topics} topics",
                edge_topic.len()
            )));
        }
        if let Some(p) = edge_topic.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(NetworkError::Mixture(format!("per-topic probability {p} outside [0, 1]")));
        }
        for (i, phi) in mixtures.iter().enumerate() {
            if phi.len() != topics {
                return Err(NetworkError::Mixture(format!(
                    "advertiser {i} has {} weights, expected {topics}",
                    phi.len()
                )));
            }
            if phi.iter().any(|w| !(0.0..=1.0).contains(w)) {
                return Err(NetworkError::Mixture(format!("advertiser {i} has a weight outside [0, 1]")));
            }
            let total: f64 = phi.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(NetworkError::Mixture(format!("advertiser {i} weights sum to {total}")));
            }
        }
        if mixtures.is_empty() {
            return Err(NetworkError::NoAdvertisers);
        }
        Ok(TopicModel {
            topics,
            edge_topic,
            mixtures,
        })
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn mixture(&self, advertiser: usize) -> &[f64] {
        &self.mixtures[advertiser]
    }

    pub fn topic_prob(&self, edge: usize, topic: usize) -> f64 {
        self.edge_topic[edge * self.topics + topic]
    }

    /// Edge-major per-advertiser probability table.
    pub fn materialize(&self) -> Vec<f64> {
        let m = self.edge_topic.len() / self.topics;
        let h = self.mixtures.len();
        let mut out = Vec::with_capacity(m * h);
        for e in 0..m {
            let row = &self.edge_topic[e * self.topics..(e + 1) * self.topics];
            for phi in &self.mixtures {
                let p: f64 = phi.iter().zip(row).map(|(w, p)| w * p).sum();
                out.push(p.clamp(0.0, 1.0));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeFormat {
    /// `src dst p_1 … p_h`
    PerAdvertiser,
    /// `src dst p̂_1 … p̂_L` plus a mixture file of `i φ_i(1) … φ_i(L)` lines.
    PerTopic,
    /// `src dst`; every advertiser gets `1 / indeg(dst)`.
    WeightedCascade,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub format: EdgeFormat,
    /// Mixture file, required for [`EdgeFormat::PerTopic`].
    pub mixture: Option<PathBuf>,
    /// Advertiser count for [`EdgeFormat::WeightedCascade`] (default 1).
    pub advertisers: Option<usize>,
    /// When set, node ids must already be dense in `0..node_count`; otherwise
    /// ids are remapped in order of first appearance.
    pub node_count: Option<usize>,
}

impl LoadOptions {
    pub fn new(format: EdgeFormat) -> Self {
        LoadOptions {
            format,
            mixture: None,
            advertisers: None,
            node_count: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedNetwork {
    pub network: TicNetwork,
    pub topic_model: Option<TopicModel>,
    /// `original_ids[dense] = id in the input file`.
    pub original_ids: Vec<u64>,
}

impl LoadedNetwork {
    /// Writes `dense original` lines.
    pub fn write_id_map<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (dense, orig) in self.original_ids.iter().enumerate() {
            writeln!(w, "{dense} {orig}")?;
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<BufReader<File>, NetworkError> {
    File::open(path).map(BufReader::new).map_err(|source| NetworkError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_edge_list(path: &Path, opts: &LoadOptions) -> Result<LoadedNetwork, NetworkError> {
    let edges = open(path)?;
    let mixture = match (opts.format, &opts.mixture) {
        (EdgeFormat::PerTopic, Some(p)) => Some(open(p)?),
        (EdgeFormat::PerTopic, None) => {
            return Err(NetworkError::Mixture("per_topic format needs a mixture file".into()))
        }
        _ => None,
    };
    parse_edge_list(edges, mixture, opts)
}

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String), NetworkError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(idx, line)| match line {
            Err(e) => Some(Err(NetworkError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })),
            Ok(l) => {
                let t = l.trim();
                (!t.is_empty() && !t.starts_with('#')).then(|| Ok((idx + 1, t.to_string())))
            }
        })
}

fn parse_field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, NetworkError> {
    tok.parse().map_err(|_| NetworkError::Parse {
        line,
        message: format!("cannot parse {what} from {tok:?}"),
    })
}

/// Parses an edge list (and, for `per_topic`, its mixture file) from readers.
pub fn parse_edge_list<R: BufRead, M: BufRead>(
    edges_in: R,
    mixture_in: Option<M>,
    opts: &LoadOptions,
) -> Result<LoadedNetwork, NetworkError> {
    let mut remap: HashMap<u64, NodeId> = HashMap::new();
    let mut original_ids: Vec<u64> = Vec::new();
    let mut edges = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut width: Option<usize> = None;

    for item in data_lines(edges_in) {
        let (line, text) = item?;
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(NetworkError::Parse {
                line,
                message: "expected at least `src dst`".into(),
            });
        }
        let src: u64 = parse_field(toks[0], line, "source id")?;
        let dst: u64 = parse_field(toks[1], line, "target id")?;
        if src == dst {
            return Err(NetworkError::SelfLoop { line, node: src });
        }
        let rest = &toks[2..];
        match opts.format {
            EdgeFormat::WeightedCascade => {
                if !rest.is_empty() {
                    return Err(NetworkError::Parse {
                        line,
                        message: "weighted_cascade lines carry no probabilities".into(),
                    });
                }
            }
            _ => {
                if rest.is_empty() {
                    return Err(NetworkError::Parse {
                        line,
                        message: "missing probability columns".into(),
                    });
                }
                match width {
                    None => width = Some(rest.len()),
                    Some(w) if w != rest.len() => {
                        return Err(NetworkError::Parse {
                            line,
                            message: format!("expected {w} probability columns, found {}", rest.len()),
                        })
                    }
                    _ => {}
                }
                for tok in rest {
                    let p: f64 = parse_field(tok, line, "probability")?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(NetworkError::ProbabilityOutOfRange { line, value: p });
                    }
                    values.push(p);
                }
            }
        }
        let mut dense = |id: u64| -> Result<NodeId, NetworkError> {
            match opts.node_count {
                Some(n) => {
                    if id >= n as u64 {
                        Err(NetworkError::DanglingNode {
                            line,
                            id,
                            node_count: n,
                        })
                    } else {
                        Ok(id as NodeId)
                    }
                }
                None => Ok(*remap.entry(id).or_insert_with(|| {
                    original_ids.push(id);
                    (original_ids.len() - 1) as NodeId
                })),
            }
        };
        let u = dense(src)?;
        let v = dense(dst)?;
        edges.push((u, v));
    }

    let node_count = match opts.node_count {
        Some(n) => {
            original_ids = (0..n as u64).collect();
            n
        }
        None => original_ids.len(),
    };

    let (network, topic_model) = match opts.format {
        EdgeFormat::PerAdvertiser => {
            let h = width.unwrap_or(opts.advertisers.unwrap_or(1));
            (TicNetwork::new(node_count, h, edges, values)?, None)
        }
        EdgeFormat::WeightedCascade => {
            let h = opts.advertisers.unwrap_or(1);
            (TicNetwork::weighted_cascade(node_count, h, edges)?, None)
        }
        EdgeFormat::PerTopic => {
            let mixture_in =
                mixture_in.ok_or_else(|| NetworkError::Mixture("per_topic format needs a mixture file".into()))?;
            let topics = width.unwrap_or(0);
            let mixtures = parse_mixture(mixture_in, topics)?;
            let model = TopicModel::new(topics, values, mixtures)?;
            let h = model.mixtures.len();
            (TicNetwork::new(node_count, h, edges, model.materialize())?, Some(model))
        }
    };
    Ok(LoadedNetwork {
        network,
        topic_model,
        original_ids,
    })
}

fn parse_mixture<R: BufRead>(reader: R, topics: usize) -> Result<Vec<Vec<f64>>, NetworkError> {
    let mut rows: Vec<Option<Vec<f64>>> = Vec::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let toks: Vec<&str> = text.split_whitespace().collect();
        let adv: usize = parse_field(toks[0], line, "advertiser id")?;
        let phi = toks[1..]
            .iter()
            .map(|t| parse_field::<f64>(t, line, "topic weight"))
            .collect::<Result<Vec<_>, _>>()?;
        if topics > 0 && phi.len() != topics {
            return Err(NetworkError::Parse {
                line,
                message: format!("expected {topics} topic weights, found {}", phi.len()),
            });
        }
        if rows.len() <= adv {
            rows.resize(adv + 1, None);
        }
        if rows[adv].replace(phi).is_some() {
            return Err(NetworkError::Parse {
                line,
                message: format!("advertiser {adv} listed twice"),
            });
        }
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| NetworkError::Mixture(format!("advertiser {i} has no mixture line"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticModel {
    /// Uniform random directed edges, average out-degree 4.
    ErdosRenyi,
    /// Preferential attachment, three bidirected links per arriving node.
    PowerLaw,
}

const ER_AVG_DEGREE: usize = 4;
const PA_LINKS: usize = 3;

/// Deterministic synthetic graph with weighted-cascade probabilities, equal
/// across advertisers.
pub fn generate_synthetic(n: usize, model: SyntheticModel, seed: u64, advertisers: usize) -> TicNetwork {
    assert!(n >= 1, "synthetic graphs need at least one node");
    let mut rng = keyed_rng(seed, Stream::Synthetic, model as u64, n as u64);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    match model {
        SyntheticModel::ErdosRenyi => {
            let pairs = n * (n - 1);
            let target = (ER_AVG_DEGREE * n).min(pairs / 2);
            let mut seen = std::collections::HashSet::with_capacity(target);
            while edges.len() < target {
                let u = rng.random_range(0..n) as NodeId;
                let v = rng.random_range(0..n) as NodeId;
                if u != v && seen.insert((u, v)) {
                    edges.push((u, v));
                }
            }
        }
        SyntheticModel::PowerLaw => {
            // `pool` holds each node once per incident link plus once for itself.
            let core = n.min(PA_LINKS + 1);
            let mut pool: Vec<NodeId> = Vec::new();
            for u in 0..core {
                pool.push(u as NodeId);
                for v in 0..u {
                    edges.push((v as NodeId, u as NodeId));
                    edges.push((u as NodeId, v as NodeId));
                    pool.push(u as NodeId);
                    pool.push(v as NodeId);
                }
            }
            let mut chosen = Vec::with_capacity(PA_LINKS);
            for v in core..n {
                chosen.clear();
                while chosen.len() < PA_LINKS.min(v) {
                    let t = pool[rng.random_range(0..pool.len())];
                    if !chosen.contains(&t) {
                        chosen.push(t);
                    }
                }
                pool.push(v as NodeId);
                for &t in &chosen {
                    edges.push((t, v as NodeId));
                    edges.push((v as NodeId, t));
                    pool.push(t);
                    pool.push(v as NodeId);
                }
            }
        }
    }
    TicNetwork::weighted_cascade(n, advertisers, edges).expect("generated edges are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn parse(text: &str, opts: &LoadOptions) -> Result<LoadedNetwork, NetworkError> {
        parse_edge_list(Cursor::new(text), None::<Cursor<&str>>, opts)
    }

    #[test]
    fn per_advertiser_read_back() {
        let mut opts = LoadOptions::new(EdgeFormat::PerAdvertiser);
        opts.node_count = Some(3);
        let net = parse("0 1 0.5\n1 2 0.5\n", &opts).unwrap().network;
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.advertiser_count(), 1);
        assert_eq!(net.prob(0, 0), 0.5);
        assert_eq!(net.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn per_topic_applies_mixture() {
        let opts = LoadOptions::new(EdgeFormat::PerTopic);
        let loaded = parse_edge_list(
            Cursor::new("# two topics\n0 1 1.0 0.0\n"),
            Some(Cursor::new("0 0.3 0.7\n")),
            &opts,
        )
        .unwrap();
        assert!((loaded.network.prob(0, 0) - 0.3).abs() < 1e-12);
        assert_eq!(loaded.topic_model.unwrap().topics(), 2);
    }

    #[test]
    fn weighted_cascade_uses_in_degree() {
        let mut opts = LoadOptions::new(EdgeFormat::WeightedCascade);
        opts.advertisers = Some(2);
        let net = parse("0 2\n1 2\n0 1\n", &opts).unwrap().network;
        assert_eq!(net.prob(0, 0), 0.5);
        assert_eq!(net.prob(1, 1), 0.5);
        assert_eq!(net.prob(2, 0), 1.0);
    }

    #[test]
    fn sparse_ids_are_remapped() {
        let loaded = parse("100 7 0.2\n7 42 0.9\n", &LoadOptions::new(EdgeFormat::PerAdvertiser)).unwrap();
        assert_eq!(loaded.original_ids, vec![100, 7, 42]);
        assert_eq!(loaded.network.edges(), &[(0, 1), (1, 2)]);
        let mut buf = Vec::new();
        loaded.write_id_map(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 100\n1 7\n2 42\n");
    }

    #[test]
    fn loader_errors() {
        let pa = LoadOptions::new(EdgeFormat::PerAdvertiser);
        assert!(matches!(
            parse("0 1 0.5\n0 2 1.5\n", &pa),
            Err(NetworkError::ProbabilityOutOfRange { line: 2, .. })
        ));
        assert!(matches!(parse("0 1 x\n", &pa), Err(NetworkError::Parse { line: 1, .. })));
        assert!(matches!(parse("3 3 0.1\n", &pa), Err(NetworkError::SelfLoop { line: 1, node: 3 })));
        assert!(matches!(
            parse("0 1 0.1\n0 1 0.1 0.2\n", &pa),
            Err(NetworkError::Parse { line: 2, .. })
        ));
        let mut dense = pa.clone();
        dense.node_count = Some(2);
        assert!(matches!(
            parse("# header\n0 1 0.1\n1 5 0.1\n", &dense),
            Err(NetworkError::DanglingNode { line: 3, id: 5, .. })
        ));
    }

    #[test]
    fn mixture_must_be_a_distribution() {
        let err = parse_edge_list(
            Cursor::new("0 1 0.5 0.5\n"),
            Some(Cursor::new("0 0.3 0.3\n")),
            &LoadOptions::new(EdgeFormat::PerTopic),
        );
        assert!(matches!(err, Err(NetworkError::Mixture(_))));
    }

    #[test]
    fn synthetic_degenerate_and_deterministic() {
        for model in [SyntheticModel::ErdosRenyi, SyntheticModel::PowerLaw] {
            let one = generate_synthetic(1, model, 3, 1);
            assert_eq!(one.node_count(), 1);
            assert_eq!(one.edge_count(), 0);
            let a = generate_synthetic(300, model, 11, 2);
            let b = generate_synthetic(300, model, 11, 2);
            assert_eq!(a, b);
            assert_ne!(a.edges(), generate_synthetic(300, model, 12, 2).edges());
        }
    }

    #[test]
    fn synthetic_probabilities_equal_across_advertisers() {
        let net = generate_synthetic(100, SyntheticModel::ErdosRenyi, 7, 3);
        assert!(net.edge_count() > 0);
        for e in 0..net.edge_count() {
            let p0 = net.prob(e, 0);
            assert!((0.0..=1.0).contains(&p0));
            for i in 1..3 {
                assert_eq!(net.prob(e, i), p0);
            }
        }
    }

    fn arb_network() -> impl Strategy<Value = (usize, usize, Vec<(u32, u32)>, Vec<f64>)> {
        (2usize..12, 1usize..4).prop_flat_map(|(n, h)| {
            let edge = (0..n as u32, 0..n as u32).prop_filter("no self-loops", |(u, v)| u != v);
            prop::collection::vec(edge, 0..30).prop_flat_map(move |edges| {
                let m = edges.len();
                (
                    Just(n),
                    Just(h),
                    Just(edges),
                    prop::collection::vec(0.0f64..=1.0, m * h),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn reverse_index_is_transpose((n, h, edges, probs) in arb_network()) {
            let net = TicNetwork::new(n, h, edges.clone(), probs).unwrap();
            let mut expected: Vec<_> = edges.iter().enumerate().map(|(e, &(u, v))| (u, v, e as u32)).collect();
            expected.sort_unstable();
            prop_assert_eq!(net.edges_from_reverse_index(), expected);
            for v in 0..n as u32 {
                for i in 0..h {
                    let (srcs, ps) = net.in_neighbors(v, i);
                    for (&u, &p) in srcs.iter().zip(ps) {
                        let (targets, qs) = net.out_neighbors(u, i);
                        prop_assert!(targets.iter().zip(qs).any(|(&t, &q)| t == v && q == p));
                    }
                }
            }
        }

        #[test]
        fn mixture_consistency(
            m in 1usize..20,
            topics in 1usize..5,
            h in 1usize..4,
            seed in any::<u64>(),
        ) {
            let mut rng = keyed_rng(seed, Stream::Synthetic, 99, 0);
            let edge_topic: Vec<f64> = (0..m * topics).map(|_| rng.random::<f64>()).collect();
            let mixtures: Vec<Vec<f64>> = (0..h)
                .map(|_| {
                    let raw: Vec<f64> = (0..topics).map(|_| rng.random::<f64>() + 1e-3).collect();
                    let s: f64 = raw.iter().sum();
                    raw.iter().map(|x| x / s).collect()
                })
                .collect();
            let model = TopicModel::new(topics, edge_topic, mixtures).unwrap();
            let table = model.materialize();
            for e in 0..m {
                for i in 0..h {
                    let direct: f64 = (0..topics).map(|z| model.mixture(i)[z] * model.topic_prob(e, z)).sum();
                    prop_assert!((table[e * h + i] - direct).abs() <= 1e-12);
                }
            }
        }
    }
}
