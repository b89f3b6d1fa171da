//! Randomized property checks on tiny instances, run by `revmax verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{ca_greedy, cs_greedy};
use crate::instance::{seed_cost, CostModel, CostSpec, CostTable};
use crate::network::{NodeId, TicNetwork};
use crate::oracle::{brute_force_optimum, BruteForceCaps, ExactOracle, RevenueEvaluator};
use crate::rr::{read_collection, write_collection, RrSampler};
use crate::rng::Stream;
use crate::solver::{approximation_ratio, greedy_single, rm_with_oracle, OnInfeasible, Problem};

/// A random instance small enough for the exact oracle and brute force.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub net: TicNetwork,
    pub costs: CostTable,
    pub budgets: Vec<f64>,
    pub cpe: Vec<f64>,
}

impl TinyInstance {
    pub fn oracle(&self) -> ExactOracle {
        ExactOracle::new(&self.net, &self.cpe).expect("tiny instances fit the exact oracle")
    }
}

/// Draws a network on `2..=max_nodes` nodes with at most `max_edges`
/// positive-probability edges, costs from `model` with a random `α`, and
/// budgets between the cheapest singleton payment and a few times it.
pub fn random_tiny_instance(rng: &mut impl Rng, max_nodes: usize, max_edges: usize, h: usize, model: CostModel) -> TinyInstance {
    let n = rng.random_range(2..=max_nodes);
    let m = rng.random_range(0..=max_edges.min(n * (n - 1)));
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    while edges.len() < m {
        let u = rng.random_range(0..n) as NodeId;
        let v = rng.random_range(0..n) as NodeId;
        if u != v && !edges.contains(&(u, v)) {
            edges.push((u, v));
        }
    }
    let probs: Vec<f64> = (0..m * h).map(|_| rng.random_range(0.05..=1.0)).collect();
    let net = TicNetwork::new(n, h, edges, probs).expect("valid random network");
    let cpe: Vec<f64> = (0..h).map(|_| rng.random_range(0.5..2.0)).collect();
    let ones = vec![1.0; h];
    let oracle = ExactOracle::new(&net, &ones).expect("tiny");
    let alpha = rng.random_range(0.05..1.0);
    let spec = CostSpec::Model { model, alpha };
    let values: Vec<f64> = (0..h)
        .flat_map(|i| (0..n).map(move |v| (i, v)))
        .map(|(i, v)| seed_cost(&spec, v as NodeId, i, oracle.spread(i, 1 << v)).expect("non-negative alpha"))
        .collect();
    let costs = CostTable::new(h, n, values).expect("valid costs");
    let budgets = (0..h)
        .map(|i| {
            let cheapest = (0..n)
                .map(|v| costs.cost(i, v as NodeId) + cpe[i] * oracle.spread(i, 1 << v))
                .fold(f64::INFINITY, f64::min);
            cheapest * rng.random_range(0.8..4.0)
        })
        .collect();
    TinyInstance { net, costs, budgets, cpe }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub trials: usize,
    pub violations: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

const MODELS: [CostModel; 3] = [CostModel::Linear, CostModel::Quasilinear, CostModel::Superlinear];
const SLACK: f64 = 1e-9;

fn check(name: &'static str, trials: usize, seed: u64, mut ok: impl FnMut(&mut ChaCha8Rng, usize) -> bool) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let violations = (0..trials).filter(|&t| !ok(&mut rng, t)).count();
    CheckResult { name, trials, violations }
}

/// Runs every property check with `trials` random instances each.
pub fn run_property_suite(trials: usize, seed: u64) -> Vec<CheckResult> {
    let caps = BruteForceCaps {
        max_nodes: 8,
        max_advertisers: 5,
    };
    vec![
        check("greedy_single reaches a third of the optimum", trials, seed, |rng, t| {
            let x = random_tiny_instance(rng, 7, 10, 1, MODELS[t % 3]);
            let o = x.oracle();
            let p = Problem::new(&o, &x.costs, &x.budgets, &x.cpe);
            let s = greedy_single(&p, 0..x.net.node_count() as NodeId, 0);
            let (_, opt) = brute_force_optimum(&o, &x.costs, &x.budgets, caps).expect("within caps");
            p.eval.revenue(0, &s) >= opt / 3.0 - SLACK
        }),
        check("oracle solver reaches λ(h, τ) of the optimum", trials, seed + 1, |rng, t| {
            let h = 1 + t % 4;
            let x = random_tiny_instance(rng, 6, 8, h, MODELS[t % 3]);
            let o = x.oracle();
            let p = Problem::new(&o, &x.costs, &x.budgets, &x.cpe);
            let a = rm_with_oracle(&p, 0.1).into_allocation();
            let (_, opt) = brute_force_optimum(&o, &x.costs, &x.budgets, caps).expect("within caps");
            p.revenue(&a) >= approximation_ratio(h, 0.1) * opt - SLACK
        }),
        check("allocations are disjoint and reruns identical", trials, seed + 2, |rng, t| {
            let h = 1 + t % 3;
            let x = random_tiny_instance(rng, 8, 12, h, MODELS[t % 3]);
            let o = x.oracle();
            let p = Problem::new(&o, &x.costs, &x.budgets, &x.cpe);
            let runs = || {
                [
                    rm_with_oracle(&p, 0.1).into_allocation(),
                    ca_greedy(&p, OnInfeasible::Skip),
                    ca_greedy(&p, OnInfeasible::Stop),
                    cs_greedy(&p),
                ]
            };
            let (a, b) = (runs(), runs());
            a == b && a.iter().all(|s| s.is_pairwise_disjoint())
        }),
        check("RR collections survive a binary round trip", trials.min(20), seed + 3, |rng, t| {
            let x = random_tiny_instance(rng, 8, 12, 1 + t % 3, MODELS[t % 3]);
            let sampler = RrSampler::new(&x.net, &x.cpe, rng.random(), Stream::Selection).expect("positive cpe");
            let coll = sampler.collection(500);
            let mut buf = Vec::new();
            write_collection(&coll, &mut buf).expect("in-memory write");
            match read_collection(&mut buf.as_slice(), x.net.advertiser_count()) {
                Ok(back) => {
                    back.len() == coll.len()
                        && (0..back.len()).all(|k| back.tag(k) == coll.tag(k) && back.set(k) == coll.set(k))
                }
                Err(_) => false,
            }
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_quickly() {
        for r in run_property_suite(12, 3) {
            assert!(r.passed(), "{} failed {} of {}", r.name, r.violations, r.trials);
        }
    }

    #[test]
    fn tiny_instance_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_tiny_instance(&mut rng, 6, 6, 2, CostModel::Linear);
        assert_eq!(x.costs.advertiser_count(), 2);
        assert!(x.budgets.iter().all(|&b| b > 0.0));
    }
}
