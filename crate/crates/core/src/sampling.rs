//! Progressive RR-set sampling with validation-based stopping.
//!
//! Two collections grow in lockstep: `R1` drives the oracle-mode solver (with
//! budgets relaxed to `(1+ϱ/2)B_i`), `R2` validates the result. The loop
//! stops once the validated lower bound on the solution and the upper bound
//! on the optimum certify ratio `λ − ε` and every budget is within
//! `(1+ϱ)B_i` with high probability, or once `|R1|` reaches `θ_max`.

use std::f64::consts::E;

use thiserror::Error;

use crate::exec::ExecMode;
use crate::instance::{Allocation, ProblemInstance, SolverParams};
use crate::network::TicNetwork;
use crate::rng::Stream;
use crate::rr::{RrCollection, RrError, RrEstimator, RrSampler};
use crate::solver::{approximation_ratio, b_min, rm_with_oracle, OracleOutcome, Problem, SearchResult};

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("q = ln((h+2)/(δ'·t_max)) = {0} is not positive; increase h or decrease delta")]
    NonPositiveQ(f64),
    #[error("the network has no nodes")]
    EmptyNetwork,
    #[error("instance and network disagree: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Rr(#[from] RrError),
}

/// `μ ln(e n / μ)`, taken as 0 at `μ = 0`.
pub fn mu_term(mu: usize, n: usize) -> f64 {
    if mu == 0 {
        0.0
    } else {
        let m = mu as f64;
        m * (E * n as f64 / m).ln()
    }
}

/// `μ_i`: how many of advertiser `i`'s cheapest nodes fit in `slack · B_i`
/// by cost alone (an upper bound on any feasible seed count).
pub fn compute_mu(inst: &ProblemInstance, slack: f64) -> Vec<usize> {
    (0..inst.advertiser_count())
        .map(|i| {
            let mut row = inst.costs().row(i).to_vec();
            row.sort_by(f64::total_cmp);
            let cap = slack * inst.budgets()[i];
            let mut total = 0.0;
            row.iter()
                .take_while(|&&c| {
                    total += c;
                    total <= cap
                })
                .count()
        })
        .collect()
}

/// Sample-size schedule of the progressive sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSchedule {
    /// `δ' = δ / 4`.
    pub delta_prime: f64,
    pub lambda: f64,
    pub theta_hat: f64,
    pub theta_bar: f64,
    /// `max(θ̂, θ̄)`.
    pub theta_max: f64,
    /// `4nΓ(2+ϱ/3) / (ϱ² B_min) · ln(h/δ')`.
    pub theta_0: f64,
    /// `⌈log₂(θ_max/θ_0)⌉`, at least 1.
    pub t_max: u32,
    /// `ln((h+2) / (δ' t_max))`.
    pub q: f64,
    pub mu: Vec<usize>,
}

impl SamplingSchedule {
    /// Size of the first pair of collections: `⌈θ_0⌉`, at most `⌈θ_max⌉`.
    pub fn initial_size(&self) -> usize {
        (self.theta_0.min(self.theta_max).ceil() as usize).max(1)
    }
}

/// Inputs of [`compute_theta_bounds`] that come from the instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleInputs {
    pub n: usize,
    pub h: usize,
    /// `Γ = Σ cpe(i)`.
    pub gamma: f64,
    pub b_min: f64,
}

impl ScheduleInputs {
    pub fn of(inst: &ProblemInstance) -> Self {
        ScheduleInputs {
            n: inst.node_count(),
            h: inst.advertiser_count(),
            gamma: inst.gamma(),
            b_min: inst.min_budget(),
        }
    }
}

/// Evaluates `θ̂_max`, `θ̄_max`, `θ_0`, `t_max` and `q` with `δ' = δ/4`.
pub fn compute_theta_bounds(
    x: ScheduleInputs,
    params: &SolverParams,
    mu: &[usize],
) -> Result<SamplingSchedule, SamplingError> {
    let n = x.n as f64;
    let h = x.h as f64;
    let (eps, rho) = (params.epsilon, params.rho);
    let dp = params.delta / 4.0;
    let lambda = approximation_ratio(x.h, params.tau);

    let sum_mu: f64 = mu.iter().map(|&m| mu_term(m, x.n)).sum();
    let l4 = (4.0 / dp).ln();
    let theta_hat = 2.0 * n / (eps * eps) * (lambda * l4.sqrt() + (lambda * (l4 + sum_mu)).sqrt()).powi(2);

    let mu_max = mu.iter().copied().max().unwrap_or(0);
    let theta_bar =
        8.0 * n * x.gamma * (1.0 + rho) / (rho * rho * x.b_min) * ((4.0 * h / dp).ln() + mu_term(mu_max, x.n));
    let theta_max = theta_hat.max(theta_bar);

    let theta_0 = 4.0 * n * x.gamma * (2.0 + rho / 3.0) / (rho * rho * x.b_min) * (h / dp).ln();
    let t_max = ((theta_max / theta_0).log2().ceil().max(1.0)) as u32;
    let q = ((h + 2.0) / (dp * t_max as f64)).ln();
    if !(q > 0.0) {
        return Err(SamplingError::NonPositiveQ(q));
    }
    Ok(SamplingSchedule {
        delta_prime: dp,
        lambda,
        theta_hat,
        theta_bar,
        theta_max,
        theta_0,
        t_max,
        q,
        mu: mu.to_vec(),
    })
}

/// Upper confidence bound `(√(x|R|/nΓ + q/2) + √(q/2))² · nΓ/|R|`.
pub fn ub_value(estimate: f64, size: usize, q: f64, n_gamma: f64) -> f64 {
    let scale = n_gamma / size as f64;
    let a = estimate / scale;
    ((a + q / 2.0).sqrt() + (q / 2.0).sqrt()).powi(2) * scale
}

/// Lower confidence bound `((√(x|R|/nΓ + 2q/9) − √(q/2))² − q/18) · nΓ/|R|`,
/// clamped at 0.
pub fn lb_value(estimate: f64, size: usize, q: f64, n_gamma: f64) -> f64 {
    let scale = n_gamma / size as f64;
    let a = estimate / scale;
    let raw = (((a + 2.0 * q / 9.0).sqrt() - (q / 2.0).sqrt()).powi(2) - q / 18.0) * scale;
    raw.max(0.0)
}

/// Upper bound `z` on the estimate-space optimum `π̃(O, R1)`, derived from
/// the threshold search endpoints.
pub fn seek_ub(outcome: &OracleOutcome, lambda: f64, b_min: usize, h: usize, r1: &RrCollection) -> f64 {
    let pi = |a: &Allocation| r1.estimate_pi(a).unwrap_or(0.0);
    let trivial = pi(outcome.allocation()) / lambda;
    let s = match outcome {
        OracleOutcome::Single(_) => return trivial,
        OracleOutcome::Search(s) => s,
    };
    seek_ub_from_search(s, trivial, lambda, b_min, h, pi)
}

fn seek_ub_from_search(
    s: &SearchResult,
    trivial: f64,
    lambda: f64,
    b_min: usize,
    h: usize,
    pi: impl Fn(&Allocation) -> f64,
) -> f64 {
    let hf = h as f64;
    let mut z = f64::INFINITY;
    let b1 = s.b1();
    if b1 < b_min {
        if let Some(t2) = &s.t2 {
            z = 6.0 * pi(&t2.allocation);
        }
    }
    if b1 >= b_min {
        match &s.t2 {
            Some(t2) if t2.b == 0 => z = 2.0 * pi(&t2.allocation) + hf * t2.gamma,
            Some(t2) if t2.b == 1 => z = 6.0 * pi(&t2.allocation) + hf * t2.gamma,
            Some(_) => {}
            None => {
                if let Some(t1) = &s.t1 {
                    z = pi(&t1.allocation) / lambda;
                }
            }
        }
    }
    z.min(trivial)
}

/// Bound checks of one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `UB(S_i)` from `R2`, per advertiser.
    pub ub_advertiser: Vec<f64>,
    /// `LB(S)` from `R2`.
    pub lb: f64,
    /// `z` from the search endpoints.
    pub z: f64,
    /// `UB(O)` from `z` and `R1`.
    pub ub_opt: f64,
    /// `LB(S) / UB(O)`.
    pub beta: f64,
    pub feasible: bool,
}

/// One solve-and-check round.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub r1_size: usize,
    pub r2_size: usize,
    pub pi_r1: f64,
    pub pi_r2: f64,
    pub lb: f64,
    pub ub: f64,
    pub beta: f64,
    pub feasible: bool,
    pub boost: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Ratio and budgets certified.
    Converged,
    /// `|R1|` reached `θ_max` before certification.
    SampleBudgetExhausted,
    /// No advertiser can afford any single seed.
    NoFeasibleSingleton,
}

#[derive(Debug, Clone, Default)]
pub struct SamplingOptions {
    pub boosting: bool,
    pub mode: ExecMode,
    /// Replaces the computed `θ_max` (to cap work or force an early stop).
    pub theta_max_override: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SamplingOutcome {
    pub allocation: Allocation,
    pub report: BoundReport,
    pub schedule: SamplingSchedule,
    pub iterations: Vec<IterationRecord>,
    pub stop: StopReason,
    /// Whether the boosted re-solve was returned.
    pub boosted: bool,
    pub r1: RrCollection,
    pub r2: RrCollection,
}

impl SamplingOutcome {
    /// RR-sets drawn for selection and validation.
    pub fn rr_sets(&self) -> usize {
        self.r1.len() + self.r2.len()
    }
}

struct Round {
    allocation: Allocation,
    report: BoundReport,
    pi_r1: f64,
    pi_r2: f64,
}

struct Checker<'a> {
    inst: &'a ProblemInstance,
    params: &'a SolverParams,
    relaxed: Vec<f64>,
    lambda: f64,
    b_min: usize,
    q: f64,
    theta_max: f64,
}

impl Checker<'_> {
    fn run(&self, r1: &RrCollection, r2: &RrCollection) -> Round {
        let inst = self.inst;
        let h = inst.advertiser_count();
        let est = RrEstimator::new(r1);
        let problem = Problem::new(&est, inst.costs(), &self.relaxed, inst.cpe());
        let outcome = rm_with_oracle(&problem, self.params.tau);
        let z = seek_ub(&outcome, self.lambda, self.b_min, h, r1);
        let alloc = outcome.into_allocation();

        let n_gamma = inst.node_count() as f64 * inst.gamma();
        let mut feasible = true;
        let mut ub_advertiser = Vec::with_capacity(h);
        for i in 0..h {
            let seeds = alloc.seeds(i);
            let est_i = r2.estimate_pi_i(i, seeds).unwrap_or(0.0);
            let ub = ub_value(est_i, r2.len(), self.q, n_gamma);
            if ub > (1.0 + self.params.rho) * inst.budgets()[i] - inst.costs().set_cost(i, seeds) {
                feasible = false;
            }
            ub_advertiser.push(ub);
        }
        let pi_r2 = r2.estimate_pi(&alloc).unwrap_or(0.0);
        let pi_r1 = r1.estimate_pi(&alloc).unwrap_or(0.0);
        let lb = lb_value(pi_r2, r2.len(), self.q, n_gamma);
        let ub_opt = ub_value(z, r1.len(), self.q, n_gamma);
        let beta = if ub_opt > 0.0 { lb / ub_opt } else { 0.0 };
        Round {
            allocation: alloc,
            report: BoundReport {
                ub_advertiser,
                lb,
                z,
                ub_opt,
                beta,
                feasible,
            },
            pi_r1,
            pi_r2,
        }
    }

    fn certified(&self, r: &Round) -> bool {
        r.report.beta >= self.lambda - self.params.epsilon && r.report.feasible
    }

    fn stops(&self, r: &Round, r1_len: usize) -> bool {
        self.certified(r) || r1_len as f64 >= self.theta_max
    }
}

fn record(iteration: usize, r1: &RrCollection, r2: &RrCollection, round: &Round, boost: bool) -> IterationRecord {
    IterationRecord {
        iteration,
        r1_size: r1.len(),
        r2_size: r2.len(),
        pi_r1: round.pi_r1,
        pi_r2: round.pi_r2,
        lb: round.report.lb,
        ub: round.report.ub_opt,
        beta: round.report.beta,
        feasible: round.report.feasible,
        boost,
    }
}

/// Growth factor of the optional boosting round.
pub const BOOST_FACTOR: usize = 15;
/// `π̃(S, R2) / π̃(S, R1)` below which boosting kicks in.
pub const BOOST_RATIO: f64 = 0.8;

/// Progressive sampling solver with a `(λ − ε, 1 + ϱ)` bicriteria guarantee
/// holding with probability at least `1 − δ`.
pub fn rm_without_oracle(
    net: &TicNetwork,
    inst: &ProblemInstance,
    params: &SolverParams,
    opts: &SamplingOptions,
) -> Result<SamplingOutcome, SamplingError> {
    let n = net.node_count();
    let h = inst.advertiser_count();
    if n == 0 {
        return Err(SamplingError::EmptyNetwork);
    }
    if inst.node_count() != n || net.advertiser_count() != h {
        return Err(SamplingError::Mismatch(format!(
            "network has {n} nodes and {} advertisers, instance {} and {h}",
            net.advertiser_count(),
            inst.node_count()
        )));
    }
    let mu = compute_mu(inst, 1.0 + params.rho);
    let mut schedule = compute_theta_bounds(ScheduleInputs::of(inst), params, &mu)?;
    if let Some(t) = opts.theta_max_override {
        schedule.theta_max = t;
    }
    let relaxed = inst.scaled_budgets(1.0 + params.rho / 2.0);
    let checker = Checker {
        inst,
        params,
        relaxed,
        lambda: schedule.lambda,
        b_min: b_min(h),
        q: schedule.q,
        theta_max: schedule.theta_max,
    };

    let sel = RrSampler::new(net, inst.cpe(), params.seed, Stream::Selection)?.with_mode(opts.mode);
    let val = RrSampler::new(net, inst.cpe(), params.seed, Stream::Validation)?.with_mode(opts.mode);

    // A seed always earns at least cpe(i), so a node whose cost leaves less
    // than that can never be chosen, whatever the samples say.
    let any_feasible = (0..h).any(|i| {
        (0..n as u32).any(|v| inst.costs().cost(i, v) + inst.cpe()[i] <= checker.relaxed[i])
    });
    if !any_feasible {
        return Ok(SamplingOutcome {
            allocation: Allocation::new(n, h),
            report: BoundReport {
                ub_advertiser: vec![0.0; h],
                lb: 0.0,
                z: 0.0,
                ub_opt: 0.0,
                beta: 0.0,
                feasible: true,
            },
            schedule,
            iterations: Vec::new(),
            stop: StopReason::NoFeasibleSingleton,
            boosted: false,
            r1: sel.empty_collection(),
            r2: val.empty_collection(),
        });
    }

    let size = schedule.initial_size();
    let mut r1 = sel.collection(size);
    let mut r2 = val.collection(size);
    let mut iterations = Vec::new();
    let mut round;
    loop {
        round = checker.run(&r1, &r2);
        iterations.push(record(iterations.len(), &r1, &r2, &round, false));
        if checker.stops(&round, r1.len()) {
            break;
        }
        let next = 2 * r1.len();
        sel.grow(&mut r1, next);
        val.grow(&mut r2, next);
    }
    let mut stop = if checker.certified(&round) {
        StopReason::Converged
    } else {
        StopReason::SampleBudgetExhausted
    };

    let mut boosted = false;
    if opts.boosting && round.pi_r1 > 0.0 && round.pi_r2 / round.pi_r1 < BOOST_RATIO {
        let target = BOOST_FACTOR * r1.len();
        sel.grow(&mut r1, target);
        val.grow(&mut r2, target);
        let retry = checker.run(&r1, &r2);
        iterations.push(record(iterations.len(), &r1, &r2, &retry, true));
        if checker.stops(&retry, r1.len()) {
            stop = if checker.certified(&retry) {
                StopReason::Converged
            } else {
                StopReason::SampleBudgetExhausted
            };
            round = retry;
            boosted = true;
        }
    }

    Ok(SamplingOutcome {
        allocation: round.allocation,
        report: round.report,
        schedule,
        iterations,
        stop,
        boosted,
        r1,
        r2,
    })
}
