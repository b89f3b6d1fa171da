//! Oracle-mode allocation algorithms.
//!
//! Everything here is generic over [`RevenueEvaluator`]; the sampling solver
//! runs the same code on an RR-set estimator with scaled budgets.

mod greedy;
mod lazy;
mod search;
mod threshold;

pub use greedy::{fill, global_greedy, greedy_single, GreedyKey, OnInfeasible};
pub use lazy::{LazyQueue, Pick};
pub use search::{search, Endpoint, SearchResult};
pub use threshold::{threshold_greedy, ThresholdGreedyResult};

use crate::instance::{marginal_rate, Allocation, CostTable};
use crate::network::NodeId;
use crate::oracle::{RevenueEvaluator, RevenueTracker};

/// Approximation ratio `λ(h, τ)` of [`rm_with_oracle`].
pub fn approximation_ratio(advertisers: usize, tau: f64) -> f64 {
    match advertisers {
        0 | 1 => 1.0 / 3.0,
        2 | 3 => 1.0 / (2.0 * (advertisers as f64 + 1.0) * (1.0 + tau)),
        h => 1.0 / ((h as f64 + 6.0) * (1.0 + tau)),
    }
}

/// Depletion threshold the binary search uses for `h` advertisers.
pub fn b_min(advertisers: usize) -> usize {
    if advertisers <= 3 {
        1
    } else {
        2
    }
}

/// Evaluator, costs and budgets of one solve, with singleton revenues cached.
pub struct Problem<'a, E: RevenueEvaluator> {
    pub eval: &'a E,
    pub costs: &'a CostTable,
    pub budgets: &'a [f64],
    pub cpe: &'a [f64],
    singles: Vec<f64>,
}

impl<'a, E: RevenueEvaluator> Problem<'a, E> {
    pub fn new(eval: &'a E, costs: &'a CostTable, budgets: &'a [f64], cpe: &'a [f64]) -> Self {
        let n = eval.node_count();
        let h = eval.advertiser_count();
        assert_eq!(costs.advertiser_count(), h, "cost table advertiser count");
        assert_eq!(costs.node_count(), n, "cost table node count");
        assert_eq!(budgets.len(), h, "one budget per advertiser");
        assert_eq!(cpe.len(), h, "one cpe per advertiser");
        let mut singles = Vec::with_capacity(h * n);
        for i in 0..h {
            let t = eval.tracker(i);
            singles.extend((0..n as NodeId).map(|v| t.gain(v)));
        }
        Problem {
            eval,
            costs,
            budgets,
            cpe,
            singles,
        }
    }

    pub fn node_count(&self) -> usize {
        self.eval.node_count()
    }

    pub fn advertiser_count(&self) -> usize {
        self.eval.advertiser_count()
    }

    /// `π_i({v})`.
    pub fn single(&self, advertiser: usize, v: NodeId) -> f64 {
        self.singles[advertiser * self.node_count() + v as usize]
    }

    /// `c_i(v) + π_i({v}) ≤ B_i`.
    pub fn singleton_feasible(&self, advertiser: usize, v: NodeId) -> bool {
        self.costs.cost(advertiser, v) + self.single(advertiser, v) <= self.budgets[advertiser]
    }

    pub fn revenue(&self, alloc: &Allocation) -> f64 {
        self.eval.total_revenue(alloc)
    }
}

/// `γ_max = max_{v, j} B_j · ζ_j(v | ∅)`.
pub fn gamma_max<E: RevenueEvaluator>(p: &Problem<'_, E>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..p.advertiser_count() {
        for v in 0..p.node_count() as NodeId {
            best = best.max(p.budgets[j] * marginal_rate(p.single(j, v), p.costs.cost(j, v)));
        }
    }
    best
}

/// Result of [`rm_with_oracle`]: a single greedy run for `h = 1`, otherwise
/// a binary search over thresholds.
#[derive(Debug, Clone)]
pub enum OracleOutcome {
    Single(Allocation),
    Search(SearchResult),
}

impl OracleOutcome {
    pub fn allocation(&self) -> &Allocation {
        match self {
            OracleOutcome::Single(a) => a,
            OracleOutcome::Search(r) => &r.best,
        }
    }

    pub fn into_allocation(self) -> Allocation {
        match self {
            OracleOutcome::Single(a) => a,
            OracleOutcome::Search(r) => r.best,
        }
    }
}

/// Greedy for one advertiser, otherwise threshold search with
/// `b_min = 1` (`h ≤ 3`) or `b_min = 2` (`h ≥ 4`).
pub fn rm_with_oracle<E: RevenueEvaluator>(p: &Problem<'_, E>, tau: f64) -> OracleOutcome {
    let h = p.advertiser_count();
    if h == 1 {
        let seeds = greedy_single(p, 0..p.node_count() as NodeId, 0);
        let alloc = Allocation::from_sets(p.node_count(), vec![seeds]).expect("one advertiser");
        OracleOutcome::Single(alloc)
    } else {
        OracleOutcome::Search(search(p, tau, b_min(h)))
    }
}
