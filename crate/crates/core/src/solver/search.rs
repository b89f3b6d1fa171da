use super::{gamma_max, threshold_greedy, Problem};
use crate::instance::Allocation;
use crate::oracle::RevenueEvaluator;

/// A probed threshold and what [`threshold_greedy`] returned for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Endpoint {
    pub allocation: Allocation,
    pub b: usize,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Highest-revenue allocation among all probes.
    pub best: Allocation,
    pub best_revenue: f64,
    /// Last probe with `b ≥ b_min`; `None` if there was none.
    pub t1: Option<Endpoint>,
    /// Last probe with `b < b_min`; `None` if there was none.
    pub t2: Option<Endpoint>,
    /// Final search interval `[γ_1, γ_2]`.
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_max: f64,
    /// `(γ, b, revenue)` of every probe, in order.
    pub probes: Vec<(f64, usize, f64)>,
}

impl SearchResult {
    pub fn b1(&self) -> usize {
        self.t1.as_ref().map_or(0, |t| t.b)
    }

    pub fn b2(&self) -> usize {
        self.t2.as_ref().map_or(0, |t| t.b)
    }
}

/// Binary search for the threshold of [`threshold_greedy`].
///
/// Keeps `[γ_1, γ_2]`, starting from `[0, (1+τ)γ_max]` with a first probe at
/// `γ = 0`. A probe depleting at least `b_min` budgets moves `γ_1` up,
/// otherwise `γ_2` comes down. Stops once `(1+τ)γ_1 ≥ γ_2` or
/// `γ_2 ≤ min_i cpe(i) / (h+6)`.
pub fn search<E: RevenueEvaluator>(p: &Problem<'_, E>, tau: f64, b_min: usize) -> SearchResult {
    let h = p.advertiser_count();
    let gmax = gamma_max(p);
    let min_cpe = p.cpe.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = min_cpe / (h as f64 + 6.0);

    let mut gamma1 = 0.0;
    let mut gamma2 = (1.0 + tau) * gmax;
    let mut gamma = gamma1;
    let mut t1: Option<Endpoint> = None;
    let mut t2: Option<Endpoint> = None;
    let mut probes = Vec::new();
    let mut best: Option<(Allocation, f64)> = None;

    loop {
        let r = threshold_greedy(p, gamma);
        let rev = p.revenue(&r.allocation);
        probes.push((gamma, r.b, rev));
        if best.as_ref().is_none_or(|(_, b)| rev > *b) {
            best = Some((r.allocation.clone(), rev));
        }
        let end = Endpoint {
            allocation: r.allocation,
            b: r.b,
            gamma,
        };
        if r.b >= b_min {
            gamma1 = gamma;
            t1 = Some(end);
        } else {
            gamma2 = gamma;
            t2 = Some(end);
        }
        gamma = (gamma1 + gamma2) / 2.0;
        if (1.0 + tau) * gamma1 >= gamma2 || gamma2 <= floor {
            break;
        }
    }

    let (mut best, mut best_revenue) = best.expect("at least one probe");
    if gmax == 0.0 {
        // No element has positive revenue.
        best = Allocation::new(p.node_count(), h);
        best_revenue = 0.0;
    }
    SearchResult {
        best,
        best_revenue,
        t1,
        t2,
        gamma1,
        gamma2,
        gamma_max: gmax,
        probes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::CostTable;
    use crate::oracle::AdditiveOracle;

    #[test]
    fn one_node_instance() {
        let eval = AdditiveOracle::new(vec![vec![2.0], vec![1.0]]).unwrap();
        let costs = CostTable::new(2, 1, vec![1.0, 1.0]).unwrap();
        let p = Problem::new(&eval, &costs, &[5.0, 5.0], &[2.0, 1.0]);
        let r = search(&p, 0.1, 1);
        assert_eq!(r.best.seed_count(), 1);
        assert_eq!(r.best.owner(0), Some(0));
        assert!(r.gamma1 <= r.gamma2);
        assert!(r.probes.iter().all(|&(_, _, rev)| rev <= r.best_revenue));
    }

    #[test]
    fn zero_gamma_max_returns_empty() {
        let eval = AdditiveOracle::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let costs = CostTable::new(2, 2, vec![1.0; 4]).unwrap();
        let p = Problem::new(&eval, &costs, &[5.0, 5.0], &[1.0, 1.0]);
        let r = search(&p, 0.1, 1);
        assert_eq!(r.probes.len(), 1);
        assert!(r.best.is_empty());
    }
}
