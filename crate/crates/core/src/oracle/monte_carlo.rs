use rand::Rng;

use super::{RevenueEvaluator, RevenueTracker};
use crate::exec::{sum_indexed, ExecMode};
use crate::network::{NodeId, TicNetwork};
use crate::rng::{keyed_rng, Stream};

struct CascadeScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<NodeId>,
}

impl CascadeScratch {
    fn new(n: usize) -> Self {
        CascadeScratch {
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

// One forward IC cascade; every out-edge of an activated node flips its coin once.
fn cascade<R: Rng>(net: &TicNetwork, advertiser: usize, seeds: &[NodeId], rng: &mut R, s: &mut CascadeScratch) -> u64 {
    let epoch = s.next_epoch();
    s.queue.clear();
    for &v in seeds {
        if s.stamp[v as usize] != epoch {
            s.stamp[v as usize] = epoch;
            s.queue.push(v);
        }
    }
    let mut head = 0;
    while head < s.queue.len() {
        let u = s.queue[head];
        head += 1;
        let (targets, probs) = net.out_neighbors(u, advertiser);
        for (&v, &p) in targets.iter().zip(probs) {
            if p > 0.0 && s.stamp[v as usize] != epoch && rng.random::<f64>() < p {
                s.stamp[v as usize] = epoch;
                s.queue.push(v);
            }
        }
    }
    s.queue.len() as u64
}

/// Forward Monte-Carlo estimate of `σ_i(S)` from `walks` cascades.
///
/// Walk `k` draws from the generator keyed by `(seed, advertiser, k)`, so the
/// estimate does not depend on the execution mode.
pub fn mc_spread(
    net: &TicNetwork,
    advertiser: usize,
    seeds: &[NodeId],
    walks: usize,
    seed: u64,
    mode: ExecMode,
) -> f64 {
    assert!(walks >= 1, "at least one walk is required");
    if seeds.is_empty() {
        return 0.0;
    }
    let total = sum_indexed(
        mode,
        0..walks,
        || CascadeScratch::new(net.node_count()),
        |scratch, k| {
            let mut rng = keyed_rng(seed, Stream::MonteCarlo, advertiser as u64, k as u64);
            cascade(net, advertiser, seeds, &mut rng, scratch)
        },
    );
    total as f64 / walks as f64
}

/// Revenue evaluator backed by forward simulation with common random numbers.
#[derive(Debug, Clone)]
pub struct MonteCarloOracle<'n> {
    net: &'n TicNetwork,
    cpe: Vec<f64>,
    walks: usize,
    seed: u64,
    mode: ExecMode,
}

impl<'n> MonteCarloOracle<'n> {
    pub fn new(net: &'n TicNetwork, cpe: &[f64], walks: usize, seed: u64) -> Self {
        MonteCarloOracle {
            net,
            cpe: cpe.to_vec(),
            walks,
            seed,
            mode: ExecMode::default(),
        }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    fn estimate(&self, advertiser: usize, seeds: &[NodeId]) -> f64 {
        self.cpe[advertiser] * mc_spread(self.net, advertiser, seeds, self.walks, self.seed, self.mode)
    }
}

#[derive(Debug, Clone)]
pub struct MonteCarloTracker<'a> {
    oracle: &'a MonteCarloOracle<'a>,
    advertiser: usize,
    seeds: Vec<NodeId>,
    value: f64,
}

impl RevenueTracker for MonteCarloTracker<'_> {
    fn value(&self) -> f64 {
        self.value
    }

    fn gain(&self, v: NodeId) -> f64 {
        if self.seeds.contains(&v) {
            return 0.0;
        }
        let mut with = self.seeds.clone();
        with.push(v);
        (self.oracle.estimate(self.advertiser, &with) - self.value).max(0.0)
    }

    fn insert(&mut self, v: NodeId) {
        if !self.seeds.contains(&v) {
            self.seeds.push(v);
            self.value = self.oracle.estimate(self.advertiser, &self.seeds);
        }
    }
}

impl<'n> RevenueEvaluator for MonteCarloOracle<'n> {
    type Tracker<'a>
        = MonteCarloTracker<'a>
    where
        Self: 'a;

    fn node_count(&self) -> usize {
        self.net.node_count()
    }

    fn advertiser_count(&self) -> usize {
        self.cpe.len()
    }

    fn tracker(&self, advertiser: usize) -> MonteCarloTracker<'_> {
        MonteCarloTracker {
            oracle: self,
            advertiser,
            seeds: Vec::new(),
            value: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_spread;

    #[test]
    fn empty_seed_set_spreads_nothing() {
        let net = TicNetwork::new(2, 1, vec![(0, 1)], vec![0.5]).unwrap();
        assert_eq!(mc_spread(&net, 0, &[], 10, 1, ExecMode::Sequential), 0.0);
    }

    #[test]
    fn deterministic_dag_reaches_everything() {
        let edges = vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)];
        let net = TicNetwork::new(5, 1, edges, vec![1.0; 5]).unwrap();
        for walks in [1, 7, 100] {
            assert_eq!(mc_spread(&net, 0, &[0], walks, 3, ExecMode::default()), 5.0);
        }
    }

    #[test]
    fn path_half_converges() {
        let net = TicNetwork::new(2, 1, vec![(0, 1)], vec![0.5]).unwrap();
        let walks = 1_000_000;
        let est = mc_spread(&net, 0, &[0], walks, 99, ExecMode::default());
        // Binomial sd of the mean: 0.5 / sqrt(walks) = 5e-4; 0.005 is 10 sd.
        assert!((est - 1.5).abs() < 0.005, "estimate {est}");
    }

    #[test]
    fn modes_agree_bitwise() {
        let net = crate::network::generate_synthetic(200, crate::network::SyntheticModel::PowerLaw, 5, 1);
        let a = mc_spread(&net, 0, &[0, 5, 9], 2000, 17, ExecMode::Sequential);
        let b = mc_spread(&net, 0, &[0, 5, 9], 2000, 17, ExecMode::Parallel);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn tracker_gains_match_differences() {
        let net = TicNetwork::new(3, 1, vec![(0, 1), (1, 2)], vec![0.5, 0.5]).unwrap();
        let oracle = MonteCarloOracle::new(&net, &[1.0], 200_000, 4);
        let mut t = oracle.tracker(0);
        let g = t.gain(0);
        t.insert(0);
        assert!((t.value() - g).abs() < 1e-12);
        assert_eq!(t.gain(0), 0.0);
        let exact = exact_spread(&net, 0, &[0], 20).unwrap();
        assert!((t.value() - exact).abs() < 0.01);
    }
}
