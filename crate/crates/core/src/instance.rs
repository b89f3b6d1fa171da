//! The revenue-maximization problem: advertisers, seed costs, solver
//! parameters and allocations.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::NodeId;
use crate::oracle::RevenueEvaluator;
use crate::solver::approximation_ratio;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("advertiser {advertiser}: budget {value} must be positive")]
    Budget { advertiser: usize, value: f64 },
    #[error("advertiser {advertiser}: cpe {value} must be positive")]
    Cpe { advertiser: usize, value: f64 },
    #[error("{budgets} budgets but {cpe} cpe values")]
    LengthMismatch { budgets: usize, cpe: usize },
    #[error("an instance needs at least one advertiser")]
    NoAdvertisers,
    #[error("cost coefficient alpha = {0} must be non-negative")]
    Alpha(f64),
    #[error("no cost for node {node}, advertiser {advertiser} in the explicit cost table")]
    MissingCost { node: NodeId, advertiser: usize },
    #[error("cost {value} for node {node}, advertiser {advertiser} must be finite and non-negative")]
    InvalidCost {
        node: NodeId,
        advertiser: usize,
        value: f64,
    },
    #[error("cost table has {actual} entries, expected {expected}")]
    CostTableSize { expected: usize, actual: usize },
    #[error("parameter {name} = {value} outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("epsilon = {epsilon} must be below the approximation ratio lambda = {lambda}")]
    EpsilonTooLarge { epsilon: f64, lambda: f64 },
    #[error("node {node} is already assigned to advertiser {owner}")]
    AlreadyAssigned { node: NodeId, owner: usize },
    #[error("node {node} or advertiser {advertiser} out of range")]
    OutOfRange { node: NodeId, advertiser: usize },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
}

/// Seed-incentive models; costs scale with the node's singleton spread `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    /// `α · σ`
    Linear,
    /// `α · σ · ln σ`
    Quasilinear,
    /// `α · σ²`
    Superlinear,
}

impl CostModel {
    pub fn cost(self, alpha: f64, spread: f64) -> f64 {
        match self {
            CostModel::Linear => alpha * spread,
            CostModel::Quasilinear => alpha * spread * spread.ln(),
            CostModel::Superlinear => alpha * spread * spread,
        }
    }
}

/// Where seed costs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    Model { model: CostModel, alpha: f64 },
    Table(HashMap<(NodeId, usize), f64>),
}

/// `c_i(u)` for node `u` and advertiser `i`.
///
/// Spreads below 1 (possible only through estimation noise) are raised to 1,
/// since a seed always activates itself.
pub fn seed_cost(spec: &CostSpec, u: NodeId, advertiser: usize, singleton_spread: f64) -> Result<f64, InstanceError> {
    match spec {
        CostSpec::Model { model, alpha } => {
            if *alpha < 0.0 {
                return Err(InstanceError::Alpha(*alpha));
            }
            Ok(model.cost(*alpha, singleton_spread.max(1.0)))
        }
        CostSpec::Table(table) => table
            .get(&(u, advertiser))
            .copied()
            .ok_or(InstanceError::MissingCost { node: u, advertiser }),
    }
}

/// Reads `node advertiser cost` lines (`#` comments allowed).
pub fn load_cost_table(path: &Path) -> Result<HashMap<(NodeId, usize), f64>, InstanceError> {
    let err = |message: String| InstanceError::Config {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let mut table = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let parsed = (toks.len() == 3)
            .then(|| Some((toks[0].parse().ok()?, toks[1].parse().ok()?, toks[2].parse().ok()?)))
            .flatten();
        let (u, i, c): (NodeId, usize, f64) =
            parsed.ok_or_else(|| err(format!("line {}: expected `node advertiser cost`", idx + 1)))?;
        table.insert((u, i), c);
    }
    Ok(table)
}

/// Dense `c_i(u)` table, advertiser-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    advertisers: usize,
    nodes: usize,
    values: Vec<f64>,
}

impl CostTable {
    pub fn new(advertisers: usize, nodes: usize, values: Vec<f64>) -> Result<Self, InstanceError> {
        if values.len() != advertisers * nodes {
            return Err(InstanceError::CostTableSize {
                expected: advertisers * nodes,
                actual: values.len(),
            });
        }
        for (k, &c) in values.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(InstanceError::InvalidCost {
                    node: (k % nodes.max(1)) as NodeId,
                    advertiser: k / nodes.max(1),
                    value: c,
                });
            }
        }
        Ok(CostTable {
            advertisers,
            nodes,
            values,
        })
    }

    /// Materializes `spec` given singleton spreads `spreads[i][u]`.
    pub fn from_spec(spec: &CostSpec, spreads: &[Vec<f64>]) -> Result<Self, InstanceError> {
        let h = spreads.len();
        let n = spreads.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(h * n);
        for (i, row) in spreads.iter().enumerate() {
            for (u, &s) in row.iter().enumerate() {
                values.push(seed_cost(spec, u as NodeId, i, s)?);
            }
        }
        Self::new(h, n, values)
    }

    pub fn cost(&self, advertiser: usize, u: NodeId) -> f64 {
        self.values[advertiser * self.nodes + u as usize]
    }

    /// `c_i(S) = Σ_{u∈S} c_i(u)`.
    pub fn set_cost(&self, advertiser: usize, seeds: &[NodeId]) -> f64 {
        seeds.iter().map(|&u| self.cost(advertiser, u)).sum()
    }

    pub fn advertiser_count(&self) -> usize {
        self.advertisers
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn row(&self, advertiser: usize) -> &[f64] {
        &self.values[advertiser * self.nodes..(advertiser + 1) * self.nodes]
    }
}

/// Advertisers' budgets, payment rates and seed costs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    budgets: Vec<f64>,
    cpe: Vec<f64>,
    costs: CostTable,
}

impl ProblemInstance {
    pub fn new(budgets: Vec<f64>, cpe: Vec<f64>, costs: CostTable) -> Result<Self, InstanceError> {
        if budgets.len() != cpe.len() || costs.advertiser_count() != budgets.len() {
            return Err(InstanceError::LengthMismatch {
                budgets: budgets.len(),
                cpe: cpe.len(),
            });
        }
        if budgets.is_empty() {
            return Err(InstanceError::NoAdvertisers);
        }
        for (i, &b) in budgets.iter().enumerate() {
            if !(b > 0.0 && b.is_finite()) {
                return Err(InstanceError::Budget { advertiser: i, value: b });
            }
        }
        for (i, &c) in cpe.iter().enumerate() {
            if !(c > 0.0 && c.is_finite()) {
                return Err(InstanceError::Cpe { advertiser: i, value: c });
            }
        }
        Ok(ProblemInstance { budgets, cpe, costs })
    }

    pub fn advertiser_count(&self) -> usize {
        self.budgets.len()
    }

    pub fn node_count(&self) -> usize {
        self.costs.node_count()
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn cpe(&self) -> &[f64] {
        &self.cpe
    }

    pub fn costs(&self) -> &CostTable {
        &self.costs
    }

    /// `Γ = Σ_i cpe(i)`.
    pub fn gamma(&self) -> f64 {
        self.cpe.iter().sum()
    }

    pub fn min_budget(&self) -> f64 {
        self.budgets.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_cpe(&self) -> f64 {
        self.cpe.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Budgets multiplied by `factor`.
    pub fn scaled_budgets(&self, factor: f64) -> Vec<f64> {
        self.budgets.iter().map(|b| b * factor).collect()
    }

    pub fn with_budgets(&self, budgets: Vec<f64>) -> Result<Self, InstanceError> {
        Self::new(budgets, self.cpe.clone(), self.costs.clone())
    }
}

fn check_open_unit(name: &'static str, value: f64) -> Result<(), InstanceError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(InstanceError::Parameter {
            name,
            value,
            range: "(0, 1)",
        })
    }
}

/// Accuracy, confidence and slack parameters of the sampling solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub epsilon: f64,
    pub delta: f64,
    pub rho: f64,
    pub tau: f64,
    pub seed: u64,
}

impl SolverParams {
    /// Validates the parameters for an instance with `advertisers`
    /// advertisers; `epsilon` must lie in `(0, λ(h, τ))`.
    pub fn new(epsilon: f64, delta: f64, rho: f64, tau: f64, seed: u64, advertisers: usize) -> Result<Self, InstanceError> {
        check_open_unit("delta", delta)?;
        check_open_unit("rho", rho)?;
        check_open_unit("tau", tau)?;
        let lambda = approximation_ratio(advertisers, tau);
        if !(epsilon > 0.0) {
            return Err(InstanceError::Parameter {
                name: "epsilon",
                value: epsilon,
                range: "(0, lambda)",
            });
        }
        if epsilon >= lambda {
            return Err(InstanceError::EpsilonTooLarge { epsilon, lambda });
        }
        Ok(SolverParams {
            epsilon,
            delta,
            rho,
            tau,
            seed,
        })
    }
}

/// Pairwise-disjoint seed sets `S_1 … S_h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    owner: Vec<Option<u32>>,
    sets: Vec<Vec<NodeId>>,
}

impl Allocation {
    pub fn new(nodes: usize, advertisers: usize) -> Self {
        Allocation {
            owner: vec![None; nodes],
            sets: vec![Vec::new(); advertisers],
        }
    }

    pub fn from_sets(nodes: usize, sets: Vec<Vec<NodeId>>) -> Result<Self, InstanceError> {
        let mut alloc = Allocation::new(nodes, sets.len());
        for (i, set) in sets.into_iter().enumerate() {
            for v in set {
                alloc.assign(v, i)?;
            }
        }
        Ok(alloc)
    }

    /// Adds `node` to `S_advertiser`; rejects nodes already owned by anyone.
    pub fn assign(&mut self, node: NodeId, advertiser: usize) -> Result<(), InstanceError> {
        if node as usize >= self.owner.len() || advertiser >= self.sets.len() {
            return Err(InstanceError::OutOfRange { node, advertiser });
        }
        if let Some(owner) = self.owner[node as usize] {
            return Err(InstanceError::AlreadyAssigned {
                node,
                owner: owner as usize,
            });
        }
        self.owner[node as usize] = Some(advertiser as u32);
        self.sets[advertiser].push(node);
        Ok(())
    }

    pub fn owner(&self, node: NodeId) -> Option<usize> {
        self.owner.get(node as usize).copied().flatten().map(|o| o as usize)
    }

    pub fn seeds(&self, advertiser: usize) -> &[NodeId] {
        &self.sets[advertiser]
    }

    pub fn sets(&self) -> &[Vec<NodeId>] {
        &self.sets
    }

    pub fn advertiser_count(&self) -> usize {
        self.sets.len()
    }

    pub fn node_count(&self) -> usize {
        self.owner.len()
    }

    pub fn seed_count(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.seed_count() == 0
    }

    /// `(node, advertiser)` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.sets
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&v| (v, i)))
    }

    /// Recomputes disjointness from the seed sets alone.
    pub fn is_pairwise_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.pairs().all(|(v, _)| seen.insert(v))
    }

    /// Seed sets with each set sorted, for order-insensitive comparison.
    pub fn canonical(&self) -> Vec<Vec<NodeId>> {
        self.sets
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort_unstable();
                s
            })
            .collect()
    }

    pub fn total_cost(&self, costs: &CostTable) -> f64 {
        (0..self.sets.len()).map(|i| costs.set_cost(i, &self.sets[i])).sum()
    }
}

/// `ζ = gain / (cost + gain)`, with `0/0` defined as 0.
pub fn marginal_rate(gain: f64, cost: f64) -> f64 {
    let gain = gain.max(0.0);
    let denom = cost + gain;
    if denom <= 0.0 {
        0.0
    } else {
        gain / denom
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvertiserUsage {
    pub cost: f64,
    pub revenue: f64,
    pub budget: f64,
    /// `(c_i(S_i) + π_i(S_i)) / B_i`
    pub utilization: f64,
    pub within_budget: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub feasible: bool,
    pub advertisers: Vec<AdvertiserUsage>,
}

/// Checks `c_i(S_i) + π_i(S_i) ≤ slack · B_i` for every advertiser.
pub fn check_budget_feasible<E: RevenueEvaluator>(
    alloc: &Allocation,
    eval: &E,
    costs: &CostTable,
    budgets: &[f64],
    slack: f64,
) -> BudgetReport {
    let advertisers: Vec<AdvertiserUsage> = (0..alloc.advertiser_count())
        .map(|i| {
            let cost = costs.set_cost(i, alloc.seeds(i));
            let revenue = eval.revenue(i, alloc.seeds(i));
            AdvertiserUsage {
                cost,
                revenue,
                budget: budgets[i],
                utilization: (cost + revenue) / budgets[i],
                within_budget: cost + revenue <= slack * budgets[i],
            }
        })
        .collect();
    BudgetReport {
        feasible: advertisers.iter().all(|a| a.within_budget),
        advertisers,
    }
}

/// Instance configuration file (TOML).
///
/// ```toml
/// budgets = [20.0, 30.0]
/// cpe = [1.0, 1.5]
/// cost_model = "linear"      # linear | quasilinear | superlinear | table
/// alpha = 0.2
/// # cost_table = "costs.txt" # for cost_model = "table"
/// epsilon = 0.02
/// delta = 0.01
/// rho = 0.1
/// tau = 0.1
/// seed = 7
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    /// Advertiser count; optional, must match the list lengths when given.
    pub h: Option<usize>,
    pub budgets: Vec<f64>,
    pub cpe: Vec<f64>,
    pub cost_model: String,
    #[serde(default)]
    pub alpha: f64,
    pub cost_table: Option<PathBuf>,
    pub epsilon: f64,
    pub delta: f64,
    pub rho: f64,
    pub tau: f64,
    #[serde(default)]
    pub seed: u64,
}

impl InstanceConfig {
    pub fn load(path: &Path) -> Result<Self, InstanceError> {
        let text = fs::read_to_string(path).map_err(|e| InstanceError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            InstanceError::Config { message, .. } => InstanceError::Config {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        if let (Some(table), Some(dir)) = (&cfg.cost_table, path.parent()) {
            if table.is_relative() {
                cfg.cost_table = Some(dir.join(table));
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let cfg: InstanceConfig = toml::from_str(text).map_err(|e| InstanceError::Config {
            path: PathBuf::from("<instance>"),
            message: e.to_string(),
        })?;
        if let Some(h) = cfg.h {
            if h != cfg.budgets.len() || h != cfg.cpe.len() {
                return Err(InstanceError::LengthMismatch {
                    budgets: cfg.budgets.len(),
                    cpe: cfg.cpe.len(),
                });
            }
        }
        Ok(cfg)
    }

    pub fn advertiser_count(&self) -> usize {
        self.budgets.len()
    }

    pub fn cost_spec(&self) -> Result<CostSpec, InstanceError> {
        let model = match self.cost_model.as_str() {
            "linear" => CostModel::Linear,
            "quasilinear" => CostModel::Quasilinear,
            "superlinear" => CostModel::Superlinear,
            "table" => {
                let path = self.cost_table.as_ref().ok_or_else(|| InstanceError::Config {
                    path: PathBuf::from("<instance>"),
                    message: "cost_model = \"table\" needs cost_table".into(),
                })?;
                return Ok(CostSpec::Table(load_cost_table(path)?));
            }
            other => {
                return Err(InstanceError::Config {
                    path: PathBuf::from("<instance>"),
                    message: format!("unknown cost_model {other:?}"),
                })
            }
        };
        if self.alpha < 0.0 {
            return Err(InstanceError::Alpha(self.alpha));
        }
        Ok(CostSpec::Model {
            model,
            alpha: self.alpha,
        })
    }

    pub fn params(&self) -> Result<SolverParams, InstanceError> {
        SolverParams::new(
            self.epsilon,
            self.delta,
            self.rho,
            self.tau,
            self.seed,
            self.advertiser_count(),
        )
    }
}
