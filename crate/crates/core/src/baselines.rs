//! Cost-agnostic and cost-sensitive greedy baselines.
//!
//! Both scan all `(node, advertiser)` elements whose singleton fits the
//! budget and repeatedly take the best one: by marginal gain (CA) or by
//! marginal rate (CS). Elements that no longer fit are skipped; CA can
//! instead stop at the first misfit.

use crate::instance::Allocation;
use crate::oracle::RevenueEvaluator;
use crate::solver::{global_greedy, GreedyKey, OnInfeasible, Problem};

pub use crate::solver::OnInfeasible as CaMode;

/// Cost-agnostic greedy: largest marginal gain first.
pub fn ca_greedy<E: RevenueEvaluator>(p: &Problem<'_, E>, mode: OnInfeasible) -> Allocation {
    global_greedy(p, &Allocation::new(p.node_count(), p.advertiser_count()), GreedyKey::Gain, mode)
}

/// Cost-sensitive greedy: largest marginal rate first.
pub fn cs_greedy<E: RevenueEvaluator>(p: &Problem<'_, E>) -> Allocation {
    global_greedy(
        p,
        &Allocation::new(p.node_count(), p.advertiser_count()),
        GreedyKey::Rate,
        OnInfeasible::Skip,
    )
}
