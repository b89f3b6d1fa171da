//! Reference implementations shared by the integration tests. Nothing here
//! calls into the solver code: spreads come from enumerating live-edge worlds
//! and optima from enumerating node labellings.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revmax::network::{NodeId, TicNetwork};
use revmax::{Allocation, CostTable};

/// `spread[i][mask]` for every advertiser and node subset, by summing
/// reachability over all `2^m` live-edge worlds.
pub struct WorldOracle {
    pub n: usize,
    pub cpe: Vec<f64>,
    pub spread: Vec<Vec<f64>>,
}

impl WorldOracle {
    pub fn new(n: usize, edges: &[(usize, usize)], probs: &[Vec<f64>], cpe: &[f64]) -> Self {
        assert!(n <= 16 && edges.len() <= 16);
        let m = edges.len();
        let spread = probs
            .iter()
            .map(|p| {
                let mut table = vec![0.0; 1 << n];
                for world in 0..1usize << m {
                    let mut weight = 1.0;
                    for (e, pe) in p.iter().enumerate() {
                        weight *= if world >> e & 1 == 1 { *pe } else { 1.0 - pe };
                    }
                    if weight == 0.0 {
                        continue;
                    }
                    // reach[v]: nodes reachable from v in this world.
                    let mut reach: Vec<usize> = (0..n).map(|v| 1 << v).collect();
                    loop {
                        let mut changed = false;
                        for (e, &(u, v)) in edges.iter().enumerate() {
                            if world >> e & 1 == 1 && reach[u] | reach[v] != reach[u] {
                                reach[u] |= reach[v];
                                changed = true;
                            }
                        }
                        if !changed {
                            break;
                        }
                    }
                    for (mask, slot) in table.iter_mut().enumerate() {
                        let mut r = 0usize;
                        for (v, rv) in reach.iter().enumerate() {
                            if mask >> v & 1 == 1 {
                                r |= rv;
                            }
                        }
                        *slot += weight * r.count_ones() as f64;
                    }
                }
                table
            })
            .collect();
        WorldOracle {
            n,
            cpe: cpe.to_vec(),
            spread,
        }
    }

    pub fn h(&self) -> usize {
        self.cpe.len()
    }

    pub fn pi_i(&self, i: usize, seeds: &[NodeId]) -> f64 {
        let mask = seeds.iter().fold(0usize, |m, &v| m | 1 << v);
        self.cpe[i] * self.spread[i][mask]
    }

    pub fn pi(&self, alloc: &Allocation) -> f64 {
        (0..self.h()).map(|i| self.pi_i(i, alloc.seeds(i))).sum()
    }

    /// Optimum over every labelling of nodes with `{none, 0..h}` satisfying
    /// `c_i(S_i) + π_i(S_i) ≤ B_i`.
    pub fn optimum(&self, cost: &[Vec<f64>], budgets: &[f64]) -> f64 {
        let h = self.h();
        let mut label = vec![0usize; self.n];
        let mut best = 0.0f64;
        loop {
            let mut masks = vec![0usize; h];
            let mut c = vec![0.0; h];
            for (v, &l) in label.iter().enumerate() {
                if l > 0 {
                    masks[l - 1] |= 1 << v;
                    c[l - 1] += cost[l - 1][v];
                }
            }
            let mut total = 0.0;
            let mut ok = true;
            for i in 0..h {
                let r = self.cpe[i] * self.spread[i][masks[i]];
                if c[i] + r > budgets[i] {
                    ok = false;
                    break;
                }
                total += r;
            }
            if ok {
                best = best.max(total);
            }
            // Next labelling in base h+1.
            let mut k = 0;
            while k < self.n {
                label[k] += 1;
                if label[k] <= h {
                    break;
                }
                label[k] = 0;
                k += 1;
            }
            if k == self.n {
                return best;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Model {
    Linear,
    Quasilinear,
    Superlinear,
}

pub const MODELS: [Model; 3] = [Model::Linear, Model::Quasilinear, Model::Superlinear];

pub fn model_cost(model: Model, alpha: f64, spread: f64) -> f64 {
    let s = spread.max(1.0);
    match model {
        Model::Linear => alpha * s,
        Model::Quasilinear => alpha * s * s.ln(),
        Model::Superlinear => alpha * s * s,
    }
}

/// A random brute-forceable instance together with its reference oracle.
pub struct Tiny {
    pub net: TicNetwork,
    pub edges: Vec<(usize, usize)>,
    pub probs: Vec<Vec<f64>>,
    pub cost: Vec<Vec<f64>>,
    pub costs: CostTable,
    pub budgets: Vec<f64>,
    pub cpe: Vec<f64>,
    pub oracle: WorldOracle,
}

impl Tiny {
    pub fn optimum(&self) -> f64 {
        self.oracle.optimum(&self.cost, &self.budgets)
    }

    pub fn budget_feasible(&self, alloc: &Allocation, factor: f64) -> bool {
        (0..self.cpe.len()).all(|i| {
            let c: f64 = alloc.seeds(i).iter().map(|&v| self.cost[i][v as usize]).sum();
            c + self.oracle.pi_i(i, alloc.seeds(i)) <= factor * self.budgets[i] + 1e-9
        })
    }
}

/// `n ∈ [2, max_n]`, at most `max_m` edges with probabilities in
/// `[0.05, 1]`, cpe in `[0.5, 2)`, and budgets between 0.7 and 5 times the
/// cheapest singleton payment of each advertiser.
pub fn random_tiny(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize, h: usize, model: Model) -> Tiny {
    let n = rng.random_range(2..=max_n);
    let m = rng.random_range(0..=max_m.min(n * (n - 1)));
    let mut edges = Vec::new();
    while edges.len() < m {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v && !edges.contains(&(u, v)) {
            edges.push((u, v));
        }
    }
    let probs: Vec<Vec<f64>> = (0..h).map(|_| (0..m).map(|_| rng.random_range(0.05..=1.0)).collect()).collect();
    let cpe: Vec<f64> = (0..h).map(|_| rng.random_range(0.5..2.0)).collect();
    let alpha = rng.random_range(0.05..1.0);
    let unit = WorldOracle::new(n, &edges, &probs, &vec![1.0; h]);
    let cost: Vec<Vec<f64>> = (0..h)
        .map(|i| (0..n).map(|v| model_cost(model, alpha, unit.spread[i][1 << v])).collect())
        .collect();
    let budgets: Vec<f64> = (0..h)
        .map(|i| {
            let cheapest = (0..n)
                .map(|v| cost[i][v] + cpe[i] * unit.spread[i][1 << v])
                .fold(f64::INFINITY, f64::min);
            cheapest * rng.random_range(0.7..5.0)
        })
        .collect();
    let edge_major: Vec<f64> = (0..m).flat_map(|e| probs.iter().map(move |p| p[e])).collect();
    let net = TicNetwork::new(
        n,
        h,
        edges.iter().map(|&(u, v)| (u as NodeId, v as NodeId)).collect(),
        edge_major,
    )
    .expect("valid network");
    let costs = CostTable::new(h, n, cost.concat()).expect("valid costs");
    let oracle = WorldOracle::new(n, &edges, &probs, &cpe);
    Tiny {
        net,
        edges,
        probs,
        cost,
        costs,
        budgets,
        cpe,
        oracle,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
