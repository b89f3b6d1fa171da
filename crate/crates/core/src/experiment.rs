//! Experiment driver: builds instances, runs solvers, scores allocations on
//! fresh RR-sets and writes metric tables.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{ca_greedy, cs_greedy};
use crate::exec::{map_indexed, ExecMode};
use crate::instance::{Allocation, CostTable, InstanceConfig, InstanceError, ProblemInstance, SolverParams};
use crate::network::{generate_synthetic, load_edge_list, EdgeFormat, LoadOptions, NetworkError, SyntheticModel, TicNetwork};
use crate::oracle::ExactOracle;
use crate::rng::Stream;
use crate::rr::{singleton_spreads, RrCollection, RrError, RrEstimator, RrSampler};
use crate::sampling::{rm_without_oracle, IterationRecord, SamplingError, SamplingOptions, SamplingOutcome};
use crate::solver::{rm_with_oracle, OnInfeasible, Problem};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Rr(#[from] RrError),
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Formats like C's `%.6g`: six significant digits, trailing zeros removed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let s = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&s).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Singleton spreads `σ_i({v})` for cost models: exact when the network is
/// small enough to enumerate, otherwise estimated from `samples` RR-sets per
/// advertiser on a dedicated stream.
pub fn cost_spreads(net: &TicNetwork, samples: usize, seed: u64, mode: ExecMode) -> Vec<Vec<f64>> {
    let ones = vec![1.0; net.advertiser_count()];
    match ExactOracle::new(net, &ones) {
        Ok(oracle) => (0..net.advertiser_count())
            .map(|i| (0..net.node_count()).map(|v| oracle.spread(i, 1 << v)).collect())
            .collect(),
        Err(_) => singleton_spreads(net, samples, seed, mode),
    }
}

/// Problem instance from a config and precomputed singleton spreads.
pub fn build_instance(cfg: &InstanceConfig, spreads: &[Vec<f64>]) -> Result<ProblemInstance, InstanceError> {
    let h = cfg.advertiser_count();
    let costs = CostTable::from_spec(&cfg.cost_spec()?, &spreads[..h.min(spreads.len())])?;
    ProblemInstance::new(cfg.budgets.clone(), cfg.cpe.clone(), costs)
}

/// Fresh evaluation collection, independent of every solver stream.
pub fn evaluation_collection(net: &TicNetwork, cpe: &[f64], samples: usize, seed: u64, mode: ExecMode) -> Result<RrCollection, RrError> {
    Ok(RrSampler::new(net, cpe, seed, Stream::Evaluation)?.with_mode(mode).collection(samples))
}

/// Revenue and cost figures of one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub revenue: f64,
    pub cost: f64,
    /// `(π + Σ c_i) / Σ B_i`.
    pub budget_usage: f64,
    /// `π / (π + Σ c_i)`, 0 when both are 0.
    pub rate_of_return: f64,
    pub seeds: usize,
}

/// Scores `alloc` on an evaluation collection against the true budgets.
pub fn evaluate_on(coll: &RrCollection, alloc: &Allocation, inst: &ProblemInstance) -> Result<Evaluation, RrError> {
    let revenue = coll.estimate_pi(alloc)?;
    let cost = alloc.total_cost(inst.costs());
    let total = revenue + cost;
    Ok(Evaluation {
        revenue,
        cost,
        budget_usage: total / inst.budgets().iter().sum::<f64>(),
        rate_of_return: if total > 0.0 { revenue / total } else { 0.0 },
        seeds: alloc.seed_count(),
    })
}

/// Scores `alloc` on `samples` fresh RR-sets.
pub fn evaluate_allocation(
    alloc: &Allocation,
    net: &TicNetwork,
    inst: &ProblemInstance,
    samples: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<Evaluation, RrError> {
    let coll = evaluation_collection(net, inst.cpe(), samples, seed, mode)?;
    evaluate_on(&coll, alloc, inst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Progressive sampling solver.
    Rma,
    /// Oracle-mode algorithm on a single RR collection.
    RmOracle,
    /// Cost-agnostic greedy.
    Ca,
    /// Cost-sensitive greedy.
    Cs,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Rma => "rma",
            SolverKind::RmOracle => "rm_oracle",
            SolverKind::Ca => "ca",
            SolverKind::Cs => "cs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaStop {
    #[default]
    Skip,
    Stop,
}

impl From<CaStop> for OnInfeasible {
    fn from(s: CaStop) -> Self {
        match s {
            CaStop::Skip => OnInfeasible::Skip,
            CaStop::Stop => OnInfeasible::Stop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub format: EdgeFormat,
    /// Advertiser count for `weighted_cascade` and `per_topic` inputs.
    pub advertisers: Option<usize>,
    /// Topic-mixture file for `per_topic` inputs.
    pub mixture: Option<PathBuf>,
    /// Dense node count; ids must then lie in `0..node_count`.
    pub node_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub model: SyntheticModel,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the instance's advertiser count.
    pub advertisers: Option<usize>,
}

/// Sweep axes; exactly one must be set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Cost coefficients.
    pub alpha: Option<Vec<f64>>,
    /// Factors applied to every instance budget.
    pub budget: Option<Vec<f64>>,
    /// Advertiser counts; the first `h` advertisers of the instance are used.
    pub h: Option<Vec<usize>>,
    pub epsilon: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint {
    Alpha(f64),
    Budget(f64),
    Advertisers(usize),
    Epsilon(f64),
}

impl SweepPoint {
    pub fn axis(self) -> &'static str {
        match self {
            SweepPoint::Alpha(_) => "alpha",
            SweepPoint::Budget(_) => "budget",
            SweepPoint::Advertisers(_) => "h",
            SweepPoint::Epsilon(_) => "epsilon",
        }
    }

    pub fn value(self) -> f64 {
        match self {
            SweepPoint::Alpha(x) | SweepPoint::Budget(x) | SweepPoint::Epsilon(x) => x,
            SweepPoint::Advertisers(h) => h as f64,
        }
    }
}

impl SweepSpec {
    pub fn points(&self) -> Result<Vec<SweepPoint>, ExperimentError> {
        let mut axes = Vec::new();
        if let Some(v) = &self.alpha {
            axes.push(v.iter().map(|&x| SweepPoint::Alpha(x)).collect::<Vec<_>>());
        }
        if let Some(v) = &self.budget {
            axes.push(v.iter().map(|&x| SweepPoint::Budget(x)).collect());
        }
        if let Some(v) = &self.h {
            axes.push(v.iter().map(|&x| SweepPoint::Advertisers(x)).collect());
        }
        if let Some(v) = &self.epsilon {
            axes.push(v.iter().map(|&x| SweepPoint::Epsilon(x)).collect());
        }
        match axes.len() {
            1 if !axes[0].is_empty() => Ok(axes.pop().unwrap()),
            1 => Err(ExperimentError::Config("the sweep axis has no values".into())),
            0 => Err(ExperimentError::Config("no sweep axis given (alpha, budget, h or epsilon)".into())),
            _ => Err(ExperimentError::Config("exactly one sweep axis may be set".into())),
        }
    }
}

fn default_solvers() -> Vec<SolverKind> {
    vec![SolverKind::Rma, SolverKind::Cs, SolverKind::Ca]
}

fn default_eval_samples() -> usize {
    100_000
}

fn default_spread_samples() -> usize {
    10_000
}

/// Experiment configuration (TOML).
///
/// ```toml
/// instance = "instance.toml"
/// solvers = ["rma", "cs", "ca"]
/// eval_samples = 100000
/// output = "alpha.csv"
/// seed = 1
///
/// [synthetic]
/// n = 5000
/// model = "power_law"
///
/// [sweep]
/// alpha = [0.1, 0.2, 0.3, 0.4, 0.5]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<DatasetSpec>,
    pub synthetic: Option<SyntheticSpec>,
    pub instance: PathBuf,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default = "default_eval_samples")]
    pub eval_samples: usize,
    pub output: Option<PathBuf>,
    /// Overrides the instance seed when given.
    pub seed: Option<u64>,
    /// Writes 0 for wall time so reruns are byte-identical.
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub boosting: bool,
    /// RR-sets per advertiser for sampled singleton spreads.
    #[serde(default = "default_spread_samples")]
    pub spread_samples: usize,
    /// Collection size for baselines when RMA is not part of the run.
    #[serde(default = "default_eval_samples")]
    pub baseline_samples: usize,
    /// Cap on the progressive sampler's collection size.
    pub theta_max: Option<f64>,
    #[serde(default)]
    pub ca_mode: CaStop,
    #[serde(default)]
    pub sequential: bool,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    /// Loads a config file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.instance);
        if let Some(d) = &mut self.dataset {
            fix(&mut d.path);
            if let Some(m) = &mut d.mixture {
                fix(m);
            }
        }
        if let Some(o) = &mut self.output {
            fix(o);
        }
    }

    pub fn mode(&self) -> ExecMode {
        if self.sequential {
            ExecMode::Sequential
        } else {
            ExecMode::default()
        }
    }

    /// Loads or generates the network with `advertisers` advertisers.
    pub fn network(&self, advertisers: usize) -> Result<TicNetwork, ExperimentError> {
        load_network(self.dataset.as_ref(), self.synthetic.as_ref(), advertisers)
    }
}

/// Network from a dataset or synthetic spec (exactly one must be given).
pub fn load_network(
    dataset: Option<&DatasetSpec>,
    synthetic: Option<&SyntheticSpec>,
    advertisers: usize,
) -> Result<TicNetwork, ExperimentError> {
    match (dataset, synthetic) {
        (Some(d), None) => {
            let mut opts = LoadOptions::new(d.format);
            opts.advertisers = Some(d.advertisers.unwrap_or(advertisers));
            opts.mixture = d.mixture.clone();
            opts.node_count = d.node_count;
            Ok(load_edge_list(&d.path, &opts)?.network)
        }
        (None, Some(s)) => Ok(generate_synthetic(s.n, s.model, s.seed, s.advertisers.unwrap_or(advertisers))),
        _ => Err(ExperimentError::Config("give exactly one of a dataset or a synthetic graph".into())),
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub solver: SolverKind,
    pub axis: &'static str,
    pub value: f64,
    /// Budget multiplier the solver was given (`1 + ϱ` for baselines).
    pub budget_scale: f64,
    pub eval: Evaluation,
    pub wall_time: f64,
    pub rr_sets: usize,
}

pub const CSV_HEADER: [&str; 11] = [
    "solver",
    "axis",
    "value",
    "budget_scale",
    "revenue",
    "cost",
    "budget_usage",
    "rate_of_return",
    "seeds",
    "wall_time_s",
    "rr_sets",
];

pub fn write_csv<W: Write>(rows: &[MetricsRow], w: W) -> Result<(), ExperimentError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record([
            r.solver.name().to_string(),
            r.axis.to_string(),
            format_sig6(r.value),
            format_sig6(r.budget_scale),
            format_sig6(r.eval.revenue),
            format_sig6(r.eval.cost),
            format_sig6(r.eval.budget_usage),
            format_sig6(r.eval.rate_of_return),
            r.eval.seeds.to_string(),
            format_sig6(r.wall_time),
            r.rr_sets.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub const ITERATION_HEADER: [&str; 10] = [
    "iteration", "r1_size", "r2_size", "pi_r1", "pi_r2", "lb", "ub", "beta", "feasible", "boost",
];

/// Per-iteration diagnostics of the progressive sampler as CSV.
pub fn write_iterations_csv<W: Write>(rows: &[IterationRecord], w: W) -> Result<(), ExperimentError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ITERATION_HEADER)?;
    for r in rows {
        out.write_record([
            r.iteration.to_string(),
            r.r1_size.to_string(),
            r.r2_size.to_string(),
            format_sig6(r.pi_r1),
            format_sig6(r.pi_r2),
            format_sig6(r.lb),
            format_sig6(r.ub),
            format_sig6(r.beta),
            r.feasible.to_string(),
            r.boost.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Everything one sweep point needs besides the config.
struct PointSetup {
    net: TicNetwork,
    inst: ProblemInstance,
    params: SolverParams,
}

fn point_setup(
    point: SweepPoint,
    base: &InstanceConfig,
    net: &TicNetwork,
    spreads: &[Vec<f64>],
    seed: Option<u64>,
) -> Result<PointSetup, ExperimentError> {
    let mut cfg = base.clone();
    let mut net = net.clone();
    match point {
        SweepPoint::Alpha(a) => cfg.alpha = a,
        SweepPoint::Budget(f) => cfg.budgets.iter_mut().for_each(|b| *b *= f),
        SweepPoint::Epsilon(e) => cfg.epsilon = e,
        SweepPoint::Advertisers(h) => {
            if h == 0 || h > cfg.budgets.len() || h > cfg.cpe.len() || h > net.advertiser_count() {
                return Err(ExperimentError::Config(format!(
                    "h = {h} needs at least {h} budgets, cpe values and network advertisers"
                )));
            }
            cfg.budgets.truncate(h);
            cfg.cpe.truncate(h);
            cfg.h = None;
            net = net.restrict_advertisers(h)?;
        }
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let inst = build_instance(&cfg, spreads)?;
    let params = cfg.params()?;
    Ok(PointSetup { net, inst, params })
}

fn run_point(cfg: &ExperimentConfig, point: SweepPoint, setup: &PointSetup) -> Result<Vec<MetricsRow>, ExperimentError> {
    let PointSetup { net, inst, params } = setup;
    let (net, inst, params) = (net, inst, *params);
    let mode = cfg.mode();
    let eval_coll = evaluation_collection(net, inst.cpe(), cfg.eval_samples, params.seed, mode)?;
    let timed = |start: Instant| if cfg.deterministic { 0.0 } else { start.elapsed().as_secs_f64() };
    let row = |solver, scale, alloc: &Allocation, wall, rr_sets| -> Result<MetricsRow, ExperimentError> {
        Ok(MetricsRow {
            solver,
            axis: point.axis(),
            value: point.value(),
            budget_scale: scale,
            eval: evaluate_on(&eval_coll, alloc, inst)?,
            wall_time: wall,
            rr_sets,
        })
    };

    let mut rows = Vec::new();
    let mut shared: Option<RrCollection> = None;
    if cfg.solvers.contains(&SolverKind::Rma) {
        let start = Instant::now();
        let opts = SamplingOptions {
            boosting: cfg.boosting,
            mode,
            theta_max_override: cfg.theta_max,
        };
        let out = rm_without_oracle(net, inst, &params, &opts)?;
        let wall = timed(start);
        rows.push((SolverKind::Rma, row(SolverKind::Rma, 1.0, &out.allocation, wall, out.rr_sets())?));
        shared = Some(out.r1);
    }
    let shared = match shared {
        Some(c) if !c.is_empty() => c,
        _ => RrSampler::new(net, inst.cpe(), params.seed, Stream::Baseline)?
            .with_mode(mode)
            .collection(cfg.baseline_samples),
    };
    let est = RrEstimator::new(&shared);
    let fair = inst.scaled_budgets(1.0 + params.rho);
    for &solver in &cfg.solvers {
        let start = Instant::now();
        let (alloc, scale) = match solver {
            SolverKind::Rma => continue,
            SolverKind::RmOracle => {
                let p = Problem::new(&est, inst.costs(), inst.budgets(), inst.cpe());
                (rm_with_oracle(&p, params.tau).into_allocation(), 1.0)
            }
            SolverKind::Ca => {
                let p = Problem::new(&est, inst.costs(), &fair, inst.cpe());
                (ca_greedy(&p, cfg.ca_mode.into()), 1.0 + params.rho)
            }
            SolverKind::Cs => {
                let p = Problem::new(&est, inst.costs(), &fair, inst.cpe());
                (cs_greedy(&p), 1.0 + params.rho)
            }
        };
        let wall = timed(start);
        rows.push((solver, row(solver, scale, &alloc, wall, shared.len())?));
    }
    // Rows follow the configured solver order.
    let mut ordered = Vec::with_capacity(rows.len());
    for s in &cfg.solvers {
        if let Some(pos) = rows.iter().position(|(k, _)| k == s) {
            ordered.push(rows.swap_remove(pos).1);
        }
    }
    Ok(ordered)
}

/// Result of a single solver run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solver: SolverKind,
    pub allocation: Allocation,
    pub eval: Evaluation,
    pub budget_scale: f64,
    pub wall_time: f64,
    pub rr_sets: usize,
    /// Set for the progressive sampler.
    pub sampling: Option<SamplingOutcome>,
}

/// Runs one solver on one instance. Baselines and the oracle-mode solver use
/// a collection of `baseline_samples` RR-sets.
pub fn solve(
    cfg: &ExperimentConfig,
    instance: &InstanceConfig,
    net: &TicNetwork,
    solver: SolverKind,
) -> Result<SolveReport, ExperimentError> {
    let mode = cfg.mode();
    let mut icfg = instance.clone();
    if let Some(s) = cfg.seed {
        icfg.seed = s;
    }
    let spreads = cost_spreads(net, cfg.spread_samples, icfg.seed, mode);
    let inst = build_instance(&icfg, &spreads)?;
    let params = icfg.params()?;
    let start = Instant::now();
    let (allocation, budget_scale, rr_sets, sampling) = match solver {
        SolverKind::Rma => {
            let opts = SamplingOptions {
                boosting: cfg.boosting,
                mode,
                theta_max_override: cfg.theta_max,
            };
            let out = rm_without_oracle(net, &inst, &params, &opts)?;
            (out.allocation.clone(), 1.0, out.rr_sets(), Some(out))
        }
        _ => {
            let coll = RrSampler::new(net, inst.cpe(), params.seed, Stream::Baseline)?
                .with_mode(mode)
                .collection(cfg.baseline_samples);
            let est = RrEstimator::new(&coll);
            let fair = inst.scaled_budgets(1.0 + params.rho);
            let (alloc, scale) = match solver {
                SolverKind::RmOracle => {
                    let p = Problem::new(&est, inst.costs(), inst.budgets(), inst.cpe());
                    (rm_with_oracle(&p, params.tau).into_allocation(), 1.0)
                }
                SolverKind::Ca => {
                    let p = Problem::new(&est, inst.costs(), &fair, inst.cpe());
                    (ca_greedy(&p, cfg.ca_mode.into()), 1.0 + params.rho)
                }
                _ => {
                    let p = Problem::new(&est, inst.costs(), &fair, inst.cpe());
                    (cs_greedy(&p), 1.0 + params.rho)
                }
            };
            (alloc, scale, coll.len(), None)
        }
    };
    let wall_time = if cfg.deterministic { 0.0 } else { start.elapsed().as_secs_f64() };
    let eval = evaluate_allocation(&allocation, net, &inst, cfg.eval_samples, params.seed, mode)?;
    Ok(SolveReport {
        solver,
        allocation,
        eval,
        budget_scale,
        wall_time,
        rr_sets,
        sampling,
    })
}

/// Runs every `(solver, sweep point)` pair; rows are grouped by point in
/// sweep order, then by solver in config order.
pub fn run_sweep(cfg: &ExperimentConfig, instance: &InstanceConfig, net: &TicNetwork) -> Result<Vec<MetricsRow>, ExperimentError> {
    if cfg.solvers.is_empty() {
        return Err(ExperimentError::Config("no solvers selected".into()));
    }
    let points = cfg.sweep.points()?;
    let mode = cfg.mode();
    let seed = cfg.seed.unwrap_or(instance.seed);
    let spreads = cost_spreads(net, cfg.spread_samples, seed, mode);
    let setups = points
        .iter()
        .map(|&p| point_setup(p, instance, net, &spreads, cfg.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let results = map_indexed(mode, 0..points.len(), || (), |_, k| run_point(cfg, points[k], &setups[k]));
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}
