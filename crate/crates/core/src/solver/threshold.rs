use super::{fill, greedy_single, LazyQueue, Problem};
use crate::instance::{marginal_rate, Allocation};
use crate::network::NodeId;
use crate::oracle::{RevenueEvaluator, RevenueTracker};

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGreedyResult {
    pub allocation: Allocation,
    /// Number of advertisers whose budget was depleted.
    pub b: usize,
}

/// Gain-greedy with a marginal-rate threshold `γ`.
///
/// Elements are taken in order of marginal gain `π_j(v | S_j)`. An element
/// `(u, i)` is admitted only if `ζ_i(u | S_i ∪ D_i) ≥ γ / B_i`, advertiser `i`
/// has no stopple node yet and `u` is not already placed. The first element
/// that would break advertiser `i`'s budget becomes its stopple node `D_i`
/// and marks `i` depleted. The loop ends when the candidates run out or all
/// advertisers are depleted.
///
/// When exactly one advertiser is depleted it is also given a plain greedy
/// run `A_i` over the nodes outside every `S_j`. Each advertiser then keeps
/// the best of `S_j`, `D_j`, `A_j`, and the result is completed by [`fill`].
pub fn threshold_greedy<E: RevenueEvaluator>(p: &Problem<'_, E>, gamma: f64) -> ThresholdGreedyResult {
    let n = p.node_count();
    let h = p.advertiser_count();
    let mut trackers: Vec<_> = (0..h).map(|i| p.eval.tracker(i)).collect();
    let mut cost = vec![0.0; h];
    let mut sets: Vec<Vec<NodeId>> = vec![Vec::new(); h];
    let mut stopple: Vec<Option<NodeId>> = vec![None; h];
    let mut placed = vec![false; n];
    let mut depleted: Vec<usize> = Vec::new();

    let mut queue = LazyQueue::new(h);
    for j in 0..h {
        for v in 0..n as NodeId {
            if p.singleton_feasible(j, v) {
                let g = p.single(j, v);
                queue.push(j, v, g, g);
            }
        }
    }

    while depleted.len() < h {
        // Elements of depleted advertisers or placed nodes would be skipped
        // when they reach the top, so they are dropped without evaluation.
        let pick = queue.pop(
            |j, v| stopple[j].is_none() && !placed[v as usize],
            |j, v| {
                let g = trackers[j].gain(v);
                (g, g)
            },
        );
        let Some(pick) = pick else { break };
        let (i, u) = (pick.advertiser, pick.node);
        let c = p.costs.cost(i, u);
        // With D_i empty, ζ_i(u | S_i ∪ D_i) is the rate against S_i alone.
        if stopple[i].is_some() || marginal_rate(pick.gain, c) < gamma / p.budgets[i] {
            continue;
        }
        if placed[u as usize] {
            continue;
        }
        placed[u as usize] = true;
        if cost[i] + c + trackers[i].value_with(u) <= p.budgets[i] {
            trackers[i].insert(u);
            cost[i] += c;
            sets[i].push(u);
            queue.bump(i);
        } else {
            stopple[i] = Some(u);
            depleted.push(i);
        }
    }

    let mut extra: Option<(usize, Vec<NodeId>)> = None;
    if let [i] = depleted[..] {
        let mut in_s = vec![false; n];
        for &v in sets.iter().flatten() {
            in_s[v as usize] = true;
        }
        let candidates = (0..n as NodeId).filter(|&v| !in_s[v as usize]);
        extra = Some((i, greedy_single(p, candidates, i)));
    }

    let mut best_sets = Vec::with_capacity(h);
    for j in 0..h {
        let mut best = sets[j].clone();
        let mut best_rev = trackers[j].value();
        if let Some(d) = stopple[j] {
            if p.single(j, d) > best_rev {
                best = vec![d];
                best_rev = p.single(j, d);
            }
        }
        if let Some((i, a)) = &extra {
            if *i == j && p.eval.revenue(j, a) > best_rev {
                best = a.clone();
            }
        }
        best_sets.push(best);
    }
    let partial = Allocation::from_sets(n, best_sets).expect("kept sets are disjoint");
    ThresholdGreedyResult {
        allocation: fill(p, &partial),
        b: depleted.len(),
    }
}
