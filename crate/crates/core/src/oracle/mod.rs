//! Revenue evaluation.
//!
//! [`RevenueEvaluator`] is the single interface the solvers see. It is
//! implemented by the exact live-edge enumerator, the forward Monte-Carlo
//! estimator and the RR-set estimator (`crate::rr::RrEstimator`), so the
//! oracle-mode algorithms run unchanged in sampling mode.

mod additive;
mod brute_force;
mod exact;
mod monte_carlo;

pub use additive::{AdditiveOracle, AdditiveTracker};
pub use brute_force::{brute_force_optimum, BruteForceCaps};
pub use exact::{exact_spread, ExactOracle, ExactTracker, DEFAULT_EDGE_CAP, MAX_TABLE_NODES};
pub use monte_carlo::{mc_spread, MonteCarloOracle, MonteCarloTracker};

use thiserror::Error;

use crate::instance::Allocation;
use crate::network::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{uncertain} edges with probability in (0,1) for advertiser {advertiser}; exact enumeration is capped at {cap}")]
    EdgeCapExceeded {
        advertiser: usize,
        uncertain: usize,
        cap: usize,
    },
    #[error("exact subset tables support at most {cap} nodes, network has {nodes}")]
    TooManyNodes { nodes: usize, cap: usize },
    #[error("brute force is capped at {max_nodes} nodes and {max_advertisers} advertisers, instance has {nodes} and {advertisers}")]
    BruteForceCap {
        nodes: usize,
        advertisers: usize,
        max_nodes: usize,
        max_advertisers: usize,
    },
    #[error("{0} payment rates given for {1} advertisers")]
    CpeMismatch(usize, usize),
}

/// Revenue `π_i(S) = cpe(i) · σ_i(S)` for every advertiser `i`.
pub trait RevenueEvaluator: Sync {
    type Tracker<'a>: RevenueTracker
    where
        Self: 'a;

    fn node_count(&self) -> usize;
    fn advertiser_count(&self) -> usize;

    /// Incremental state for one advertiser, starting from the empty set.
    fn tracker(&self, advertiser: usize) -> Self::Tracker<'_>;

    fn revenue(&self, advertiser: usize, seeds: &[NodeId]) -> f64 {
        let mut t = self.tracker(advertiser);
        for &v in seeds {
            t.insert(v);
        }
        t.value()
    }

    fn total_revenue(&self, alloc: &Allocation) -> f64 {
        (0..alloc.advertiser_count())
            .map(|i| self.revenue(i, alloc.seeds(i)))
            .sum()
    }
}

/// Revenue of a growing seed set for one advertiser.
pub trait RevenueTracker: Clone {
    /// `π_i(S)`.
    fn value(&self) -> f64;
    /// `π_i(v | S)`; zero when `v ∈ S`.
    fn gain(&self, v: NodeId) -> f64;
    fn insert(&mut self, v: NodeId);

    /// `π_i(S ∪ {v})`. Implementations override this when the sum
    /// `value() + gain(v)` would round differently from a fresh evaluation.
    fn value_with(&self, v: NodeId) -> f64 {
        self.value() + self.gain(v)
    }
}
