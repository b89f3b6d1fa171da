//! Reverse-reachable sets with advertiser tags.
//!
//! A tagged RR-set is drawn by picking advertiser `j` with probability
//! `cpe(j)/Γ`, a uniform root `v`, and collecting every node that reaches `v`
//! in a random live-edge graph of advertiser `j`. Then
//! `π(S) = nΓ · Pr[the set's tag j has S_j ∩ R ≠ ∅]`.

mod codec;
mod coverage;

pub use codec::{read_collection, write_collection, MAGIC};
pub use coverage::{CoverageState, RrEstimator, RrTracker};

use rand::Rng;
use thiserror::Error;

use crate::exec::{map_indexed, ExecMode};
use crate::instance::Allocation;
use crate::network::{NodeId, TicNetwork};
use crate::rng::{keyed_rng, Stream};

#[derive(Debug, Error)]
pub enum RrError {
    #[error("the RR collection is empty")]
    EmptyCollection,
    #[error("coverage state built for generation {state} but the collection is at generation {collection}")]
    StaleCoverage { state: u64, collection: u64 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed RR dump: {0}")]
    Format(String),
    #[error("payment rates must be positive and finite")]
    InvalidCpe,
}

/// Tagged RR-sets in flat storage, plus an inverted index
/// `(tag, node) → positions among that tag's sets`.
#[derive(Debug, Clone)]
pub struct RrCollection {
    n: usize,
    h: usize,
    gamma: f64,
    tags: Vec<u32>,
    offsets: Vec<usize>,
    nodes: Vec<NodeId>,
    // Position of each set among the sets sharing its tag.
    local: Vec<u32>,
    tag_counts: Vec<usize>,
    // CSR over key tag * n + node.
    index_offsets: Vec<usize>,
    index: Vec<u32>,
    generation: u64,
}

impl RrCollection {
    pub fn new(n: usize, h: usize, gamma: f64) -> Self {
        let mut c = RrCollection {
            n,
            h,
            gamma,
            tags: Vec::new(),
            offsets: vec![0],
            nodes: Vec::new(),
            local: Vec::new(),
            tag_counts: vec![0; h],
            index_offsets: Vec::new(),
            index: Vec::new(),
            generation: 0,
        };
        c.rebuild_index();
        c
    }

    /// Appends sets given as `(tag, nodes)`; node lists are sorted and
    /// deduplicated. Bumps the generation, invalidating coverage states.
    pub fn extend<I: IntoIterator<Item = (u32, Vec<NodeId>)>>(&mut self, sets: I) {
        for (tag, mut nodes) in sets {
            assert!((tag as usize) < self.h, "tag {tag} out of range");
            nodes.sort_unstable();
            nodes.dedup();
            assert!(!nodes.is_empty(), "RR-sets contain their root");
            self.tags.push(tag);
            self.nodes.extend_from_slice(&nodes);
            self.offsets.push(self.nodes.len());
        }
        self.rebuild_index();
    }

    fn rebuild_index(&mut self) {
        let (n, h) = (self.n, self.h);
        self.tag_counts = vec![0; h];
        self.local = Vec::with_capacity(self.tags.len());
        for &t in &self.tags {
            self.local.push(self.tag_counts[t as usize] as u32);
            self.tag_counts[t as usize] += 1;
        }
        let mut counts = vec![0usize; h * n + 1];
        for k in 0..self.tags.len() {
            let base = self.tags[k] as usize * n;
            for &v in self.set(k) {
                counts[base + v as usize + 1] += 1;
            }
        }
        for key in 1..counts.len() {
            counts[key] += counts[key - 1];
        }
        let mut fill = counts.clone();
        let mut index = vec![0u32; self.nodes.len()];
        for k in 0..self.tags.len() {
            let base = self.tags[k] as usize * n;
            let local = self.local[k];
            for &v in &self.nodes[self.offsets[k]..self.offsets[k + 1]] {
                let key = base + v as usize;
                index[fill[key]] = local;
                fill[key] += 1;
            }
        }
        self.index_offsets = counts;
        self.index = index;
        self.generation += 1;
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn advertiser_count(&self) -> usize {
        self.h
    }

    /// `Γ = Σ cpe(i)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Incremented on every mutation.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn tag(&self, k: usize) -> usize {
        self.tags[k] as usize
    }

    /// Sorted node ids of set `k`.
    pub fn set(&self, k: usize) -> &[NodeId] {
        &self.nodes[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn tag_count(&self, tag: usize) -> usize {
        self.tag_counts[tag]
    }

    /// Total number of node entries over all sets.
    pub fn total_size(&self) -> usize {
        self.nodes.len()
    }

    /// Positions (among tag `tag`'s sets) of the sets that contain `v`.
    pub fn sets_containing(&self, tag: usize, v: NodeId) -> &[u32] {
        let key = tag * self.n + v as usize;
        &self.index[self.index_offsets[key]..self.index_offsets[key + 1]]
    }

    /// `nΓ / |R|`, the revenue represented by one covered set.
    pub fn unit_revenue(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.n as f64 * self.gamma / self.len() as f64
        }
    }

    /// `π̃(S)`: `nΓ/|R|` times the number of sets whose tag `j` has
    /// `S_j ∩ R ≠ ∅`.
    pub fn estimate_pi(&self, alloc: &Allocation) -> Result<f64, RrError> {
        if self.is_empty() {
            return Err(RrError::EmptyCollection);
        }
        let mut covered = 0usize;
        for i in 0..self.h.min(alloc.advertiser_count()) {
            covered += self.covered_count(i, alloc.seeds(i));
        }
        Ok(covered as f64 * self.unit_revenue())
    }

    /// `π̃_i(S)`, counting only sets tagged `i`.
    pub fn estimate_pi_i(&self, advertiser: usize, seeds: &[NodeId]) -> Result<f64, RrError> {
        if self.is_empty() {
            return Err(RrError::EmptyCollection);
        }
        Ok(self.covered_count(advertiser, seeds) as f64 * self.unit_revenue())
    }

    /// Number of tag-`advertiser` sets hit by `seeds`.
    pub fn covered_count(&self, advertiser: usize, seeds: &[NodeId]) -> usize {
        let mut state = CoverageState::new(self, advertiser);
        for &v in seeds {
            state.commit_unchecked(self, v);
        }
        state.covered()
    }

    /// Structural self-check: every index entry points at a set of the right
    /// tag that contains the node, and every membership is indexed once.
    pub fn index_is_consistent(&self) -> bool {
        let mut by_tag: Vec<Vec<usize>> = vec![Vec::new(); self.h];
        for k in 0..self.len() {
            by_tag[self.tag(k)].push(k);
        }
        let mut entries = 0usize;
        for (tag, ids) in by_tag.iter().enumerate() {
            if ids.len() != self.tag_counts[tag] {
                return false;
            }
            for v in 0..self.n as NodeId {
                let list = self.sets_containing(tag, v);
                entries += list.len();
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return false;
                }
                if !list.iter().all(|&l| {
                    ids.get(l as usize)
                        .is_some_and(|&k| self.set(k).binary_search(&v).is_ok())
                }) {
                    return false;
                }
            }
        }
        entries == self.nodes.len()
    }
}

/// Per-worker scratch for reverse BFS.
#[derive(Debug, Clone)]
pub struct RrScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<NodeId>,
}

impl RrScratch {
    pub fn new(n: usize) -> Self {
        RrScratch {
            stamp: vec![0; n],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }
}

/// Reverse BFS from `root` in a random live-edge graph of `advertiser`.
///
/// Each node is expanded once, so every incoming edge of a reached node has
/// its coin flipped at most once. Zero-probability edges are skipped.
pub fn reverse_reachable<R: Rng>(
    net: &TicNetwork,
    advertiser: usize,
    root: NodeId,
    rng: &mut R,
    s: &mut RrScratch,
) -> Vec<NodeId> {
    let epoch = s.next_epoch();
    s.queue.clear();
    s.stamp[root as usize] = epoch;
    s.queue.push(root);
    let mut head = 0;
    while head < s.queue.len() {
        let v = s.queue[head];
        head += 1;
        let (sources, probs) = net.in_neighbors(v, advertiser);
        for (&u, &p) in sources.iter().zip(probs) {
            if p > 0.0 && s.stamp[u as usize] != epoch && rng.random::<f64>() < p {
                s.stamp[u as usize] = epoch;
                s.queue.push(u);
            }
        }
    }
    let mut out = s.queue.clone();
    out.sort_unstable();
    out
}

/// Draws tagged RR-sets; set `k` of a collection always comes from the
/// generator keyed by `(seed, stream, k)`.
#[derive(Debug, Clone)]
pub struct RrSampler<'n> {
    net: &'n TicNetwork,
    cumulative: Vec<f64>,
    gamma: f64,
    seed: u64,
    stream: Stream,
    mode: ExecMode,
}

impl<'n> RrSampler<'n> {
    pub fn new(net: &'n TicNetwork, cpe: &[f64], seed: u64, stream: Stream) -> Result<Self, RrError> {
        if cpe.len() != net.advertiser_count() || cpe.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(RrError::InvalidCpe);
        }
        let mut acc = 0.0;
        let cumulative = cpe
            .iter()
            .map(|&c| {
                acc += c;
                acc
            })
            .collect();
        Ok(RrSampler {
            net,
            cumulative,
            gamma: acc,
            seed,
            stream,
            mode: ExecMode::default(),
        })
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn network(&self) -> &'n TicNetwork {
        self.net
    }

    /// Set number `index` of this sampler's stream.
    pub fn sample(&self, index: u64, scratch: &mut RrScratch) -> (u32, Vec<NodeId>) {
        let mut rng = keyed_rng(self.seed, self.stream, 0, index);
        let x = rng.random::<f64>() * self.gamma;
        let tag = self
            .cumulative
            .iter()
            .position(|&c| x < c)
            .unwrap_or(self.cumulative.len() - 1);
        let root = rng.random_range(0..self.net.node_count() as NodeId);
        (tag as u32, reverse_reachable(self.net, tag, root, &mut rng, scratch))
    }

    /// Empty collection matching this sampler's network and `Γ`.
    pub fn empty_collection(&self) -> RrCollection {
        RrCollection::new(self.net.node_count(), self.net.advertiser_count(), self.gamma)
    }

    pub fn collection(&self, size: usize) -> RrCollection {
        let mut c = self.empty_collection();
        self.grow(&mut c, size);
        c
    }

    /// Appends sets `|coll| .. target`; existing sets are untouched.
    pub fn grow(&self, coll: &mut RrCollection, target: usize) {
        let start = coll.len();
        if target <= start {
            return;
        }
        let n = self.net.node_count();
        let sets = map_indexed(self.mode, start..target, || RrScratch::new(n), |s, k| self.sample(k as u64, s));
        coll.extend(sets);
    }
}

/// Singleton spreads `σ_i(v)` estimated from `samples` RR-sets per advertiser
/// (all tagged `i`): `σ_i(v) ≈ n · hits(v) / samples`, raised to at least 1.
///
/// Used once to freeze seed costs in sampling mode.
pub fn singleton_spreads(net: &TicNetwork, samples: usize, seed: u64, mode: ExecMode) -> Vec<Vec<f64>> {
    let n = net.node_count();
    (0..net.advertiser_count())
        .map(|i| {
            let sets = map_indexed(mode, 0..samples, || RrScratch::new(n), |s, k| {
                let mut rng = keyed_rng(seed, Stream::CostEstimation, i as u64, k as u64);
                let root = rng.random_range(0..n as NodeId);
                reverse_reachable(net, i, root, &mut rng, s)
            });
            let mut hits = vec![0u64; n];
            for set in &sets {
                for &v in set {
                    hits[v as usize] += 1;
                }
            }
            hits.iter()
                .map(|&c| (n as f64 * c as f64 / samples.max(1) as f64).max(1.0))
                .collect()
        })
        .collect()
}
