use super::{OracleError, RevenueEvaluator};
use crate::instance::{Allocation, CostTable};
use crate::network::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceCaps {
    pub max_nodes: usize,
    pub max_advertisers: usize,
}

impl Default for BruteForceCaps {
    fn default() -> Self {
        BruteForceCaps {
            max_nodes: 10,
            max_advertisers: 3,
        }
    }
}

fn mask_nodes(mask: usize) -> Vec<NodeId> {
    (0..usize::BITS as NodeId).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Exact optimum of the revenue-maximization problem under `eval`.
///
/// Searches every assignment of nodes to `{none, 1..h}` that satisfies
/// `c_i(S_i) + π_i(S_i) ≤ B_i` for all `i`. The search is a subset dynamic
/// program: `best_k(M)` is the best revenue of advertisers `0..=k` using only
/// nodes in `M`, maximised over every feasible `S ⊆ M` for advertiser `k`.
pub fn brute_force_optimum<E: RevenueEvaluator>(
    eval: &E,
    costs: &CostTable,
    budgets: &[f64],
    caps: BruteForceCaps,
) -> Result<(Allocation, f64), OracleError> {
    let n = eval.node_count();
    let h = eval.advertiser_count();
    if n > caps.max_nodes || h > caps.max_advertisers || n >= usize::BITS as usize {
        return Err(OracleError::BruteForceCap {
            nodes: n,
            advertisers: h,
            max_nodes: caps.max_nodes,
            max_advertisers: caps.max_advertisers,
        });
    }
    let full = (1usize << n) - 1;

    // value[i][S], or None when S is infeasible for advertiser i.
    let value: Vec<Vec<Option<f64>>> = (0..h)
        .map(|i| {
            (0..=full)
                .map(|mask| {
                    let seeds = mask_nodes(mask);
                    let rev = eval.revenue(i, &seeds);
                    let cost: f64 = seeds.iter().map(|&v| costs.cost(i, v)).sum();
                    (cost + rev <= budgets[i]).then_some(rev)
                })
                .collect()
        })
        .collect();

    // best[k][M], choice[k][M]
    let mut best: Vec<Vec<f64>> = Vec::with_capacity(h);
    let mut choice: Vec<Vec<usize>> = Vec::with_capacity(h);
    for i in 0..h {
        let mut b = vec![f64::NEG_INFINITY; full + 1];
        let mut c = vec![0usize; full + 1];
        for m in 0..=full {
            let mut s = m;
            loop {
                if let Some(v) = value[i][s] {
                    let rest = if i == 0 { 0.0 } else { best[i - 1][m & !s] };
                    if v + rest > b[m] {
                        b[m] = v + rest;
                        c[m] = s;
                    }
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & m;
            }
        }
        best.push(b);
        choice.push(c);
    }

    let mut alloc = Allocation::new(n, h);
    if h == 0 {
        return Ok((alloc, 0.0));
    }
    let opt = best[h - 1][full];
    let mut remaining = full;
    for i in (0..h).rev() {
        let s = choice[i][remaining];
        for v in mask_nodes(s) {
            alloc.assign(v, i).expect("subsets chosen from disjoint remainders");
        }
        remaining &= !s;
    }
    Ok((alloc, opt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::TicNetwork;
    use crate::oracle::ExactOracle;

    #[test]
    fn single_node_large_budget() {
        let net = TicNetwork::new(1, 1, vec![], vec![]).unwrap();
        let oracle = ExactOracle::new(&net, &[2.0]).unwrap();
        let costs = CostTable::new(1, 1, vec![0.5]).unwrap();
        let (alloc, opt) = brute_force_optimum(&oracle, &costs, &[100.0], BruteForceCaps::default()).unwrap();
        assert_eq!(alloc.seeds(0), &[0]);
        assert_eq!(opt, 2.0);
    }

    #[test]
    fn nothing_affordable() {
        let net = TicNetwork::new(2, 1, vec![(0, 1)], vec![0.5]).unwrap();
        let oracle = ExactOracle::new(&net, &[1.0]).unwrap();
        let costs = CostTable::new(1, 2, vec![1.0, 1.0]).unwrap();
        let (alloc, opt) = brute_force_optimum(&oracle, &costs, &[1.5], BruteForceCaps::default()).unwrap();
        assert!(alloc.is_empty());
        assert_eq!(opt, 0.0);
    }

    #[test]
    fn star_two_advertisers_matches_enumeration() {
        // Star centre 0 pointing at leaves 1..3.
        let net = TicNetwork::new(
            4,
            2,
            vec![(0, 1), (0, 2), (0, 3)],
            vec![0.5, 0.2, 0.5, 0.2, 0.5, 0.2],
        )
        .unwrap();
        let cpe = [1.0, 2.0];
        let oracle = ExactOracle::new(&net, &cpe).unwrap();
        let costs = CostTable::new(2, 4, vec![0.5, 0.2, 0.2, 0.2, 0.3, 0.1, 0.1, 0.1]).unwrap();
        let budgets = [3.0, 3.0];
        let (alloc, opt) = brute_force_optimum(&oracle, &costs, &budgets, BruteForceCaps::default()).unwrap();

        // Literal labelling enumeration over {none, 0, 1}^4.
        let mut best = f64::NEG_INFINITY;
        for code in 0..81usize {
            let mut sets = [Vec::new(), Vec::new()];
            let mut c = code;
            for v in 0..4u32 {
                match c % 3 {
                    1 => sets[0].push(v),
                    2 => sets[1].push(v),
                    _ => {}
                }
                c /= 3;
            }
            let feasible = (0..2).all(|i| {
                let cost: f64 = sets[i].iter().map(|&v| costs.cost(i, v)).sum();
                cost + oracle.revenue(i, &sets[i]) <= budgets[i]
            });
            if feasible {
                best = best.max(oracle.revenue(0, &sets[0]) + oracle.revenue(1, &sets[1]));
            }
        }
        assert!((opt - best).abs() < 1e-12);
        assert!((oracle.total_revenue(&alloc) - opt).abs() < 1e-12);
    }

    #[test]
    fn caps_are_enforced() {
        let net = TicNetwork::new(11, 1, vec![], vec![]).unwrap();
        let oracle = ExactOracle::new(&net, &[1.0]).unwrap();
        let costs = CostTable::new(1, 11, vec![1.0; 11]).unwrap();
        assert!(matches!(
            brute_force_optimum(&oracle, &costs, &[5.0], BruteForceCaps::default()),
            Err(OracleError::BruteForceCap { .. })
        ));
    }
}
