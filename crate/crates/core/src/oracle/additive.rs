use super::{OracleError, RevenueEvaluator, RevenueTracker};
use crate::network::NodeId;

/// Revenue that is additive over seeds: `π_i(S) = Σ_{v∈S} w_i(v)`.
///
/// Models instances where seeds reach pairwise disjoint audiences, such as
/// hand-built toy examples quoted by singleton revenue alone.
#[derive(Debug, Clone)]
pub struct AdditiveOracle {
    n: usize,
    // weights[i][v] = π_i({v})
    weights: Vec<Vec<f64>>,
}

impl AdditiveOracle {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self, OracleError> {
        let n = weights.first().map_or(0, Vec::len);
        if weights.iter().any(|w| w.len() != n) {
            return Err(OracleError::CpeMismatch(weights.len(), n));
        }
        Ok(AdditiveOracle { n, weights })
    }
}

#[derive(Debug, Clone)]
pub struct AdditiveTracker<'a> {
    weights: &'a [f64],
    seeds: Vec<bool>,
    value: f64,
}

impl RevenueTracker for AdditiveTracker<'_> {
    fn value(&self) -> f64 {
        self.value
    }

    fn gain(&self, v: NodeId) -> f64 {
        if self.seeds[v as usize] {
            0.0
        } else {
            self.weights[v as usize]
        }
    }

    fn insert(&mut self, v: NodeId) {
        if !std::mem::replace(&mut self.seeds[v as usize], true) {
            self.value += self.weights[v as usize];
        }
    }
}

impl RevenueEvaluator for AdditiveOracle {
    type Tracker<'a> = AdditiveTracker<'a>;

    fn node_count(&self) -> usize {
        self.n
    }

    fn advertiser_count(&self) -> usize {
        self.weights.len()
    }

    fn tracker(&self, advertiser: usize) -> AdditiveTracker<'_> {
        AdditiveTracker {
            weights: &self.weights[advertiser],
            seeds: vec![false; self.n],
            value: 0.0,
        }
    }
}
