use super::{LazyQueue, Problem};
use crate::instance::{marginal_rate, Allocation};
use crate::network::NodeId;
use crate::oracle::{RevenueEvaluator, RevenueTracker};

/// Marginal-rate greedy for advertiser `i` over `candidates`.
///
/// Candidates whose singleton already breaks `c_i(v) + π_i(v) ≤ B_i` are
/// dropped first. Nodes are added in order of `ζ_i(v | S)` until the first
/// one that does not fit; that stopple node `D` ends the loop, and the better
/// of `S` and `{D}` is returned (ties keep `S`).
pub fn greedy_single<E: RevenueEvaluator>(
    p: &Problem<'_, E>,
    candidates: impl IntoIterator<Item = NodeId>,
    i: usize,
) -> Vec<NodeId> {
    let budget = p.budgets[i];
    let mut queue = LazyQueue::new(p.advertiser_count());
    for v in candidates {
        if p.singleton_feasible(i, v) {
            let g = p.single(i, v);
            queue.push(i, v, marginal_rate(g, p.costs.cost(i, v)), g);
        }
    }
    let mut tracker = p.eval.tracker(i);
    let mut cost = 0.0;
    let mut seeds = Vec::new();
    let mut stopple = None;
    loop {
        let pick = queue.pop(
            |_, _| true,
            |_, v| {
                let g = tracker.gain(v);
                (marginal_rate(g, p.costs.cost(i, v)), g)
            },
        );
        let Some(pick) = pick else { break };
        let u = pick.node;
        let c = p.costs.cost(i, u);
        if cost + c + tracker.value_with(u) <= budget {
            tracker.insert(u);
            cost += c;
            seeds.push(u);
            queue.bump(i);
        } else {
            stopple = Some(u);
            break;
        }
    }
    match stopple {
        Some(d) if p.single(i, d) > tracker.value() => vec![d],
        _ => seeds,
    }
}

/// Selection key of [`global_greedy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyKey {
    /// Marginal gain `π_j(v | S_j)`.
    Gain,
    /// Marginal rate `ζ_j(v | S_j)`.
    Rate,
}

/// What [`global_greedy`] does when the best element does not fit its budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnInfeasible {
    /// Drop the element and keep going.
    #[default]
    Skip,
    /// Terminate.
    Stop,
}

/// Greedy over all `(node, advertiser)` elements, extending `partial`.
///
/// Candidates are the budget-feasible singletons. The best element by `key`
/// is admitted when its node is unassigned and the advertiser's budget still
/// holds `c_i(S_i ∪ {u}) + π_i(S_i ∪ {u}) ≤ B_i`. Elements with zero marginal
/// gain are never admitted.
pub fn global_greedy<E: RevenueEvaluator>(
    p: &Problem<'_, E>,
    partial: &Allocation,
    key: GreedyKey,
    on_infeasible: OnInfeasible,
) -> Allocation {
    let n = p.node_count();
    let h = p.advertiser_count();
    let mut alloc = partial.clone();
    let mut trackers: Vec<_> = (0..h).map(|i| p.eval.tracker(i)).collect();
    let mut cost = vec![0.0; h];
    for i in 0..h {
        for &v in partial.seeds(i) {
            trackers[i].insert(v);
            cost[i] += p.costs.cost(i, v);
        }
    }
    let score = |g: f64, c: f64| match key {
        GreedyKey::Gain => g,
        GreedyKey::Rate => marginal_rate(g, c),
    };

    let mut queue = LazyQueue::new(h);
    for j in 0..h {
        for v in 0..n as NodeId {
            if alloc.owner(v).is_none() && p.singleton_feasible(j, v) {
                let g = trackers[j].gain(v);
                queue.push(j, v, score(g, p.costs.cost(j, v)), g);
            }
        }
    }
    loop {
        let pick = queue.pop(
            |_, v| alloc.owner(v).is_none(),
            |j, v| {
                let g = trackers[j].gain(v);
                (score(g, p.costs.cost(j, v)), g)
            },
        );
        let Some(pick) = pick else { break };
        // Keys are zero exactly when gains are; everything left is zero too.
        if pick.gain <= 0.0 {
            break;
        }
        let (i, u) = (pick.advertiser, pick.node);
        let c = p.costs.cost(i, u);
        if cost[i] + c + trackers[i].value_with(u) <= p.budgets[i] {
            alloc.assign(u, i).expect("node checked unassigned");
            trackers[i].insert(u);
            cost[i] += c;
            queue.bump(i);
        } else if on_infeasible == OnInfeasible::Stop {
            break;
        }
    }
    alloc
}

/// Marginal-rate completion of `partial` under the budgets.
pub fn fill<E: RevenueEvaluator>(p: &Problem<'_, E>, partial: &Allocation) -> Allocation {
    global_greedy(p, partial, GreedyKey::Rate, OnInfeasible::Skip)
}
