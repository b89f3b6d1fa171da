use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use revmax::baselines::cs_greedy;
use revmax::instance::{CostModel, CostSpec};
use revmax::network::{generate_synthetic, SyntheticModel};
use revmax::rr::{singleton_spreads, RrEstimator};
use revmax::{rm_without_oracle, CostTable, ExecMode, Problem, ProblemInstance, SamplingOptions, SolverParams};

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn setup() -> (revmax::TicNetwork, ProblemInstance, SolverParams) {
    let net = generate_synthetic(2_000, SyntheticModel::PowerLaw, 5, 3);
    let spreads = singleton_spreads(&net, 2_000, 5, ExecMode::default());
    let spec = CostSpec::Model {
        model: CostModel::Linear,
        alpha: 0.3,
    };
    let costs = CostTable::from_spec(&spec, &spreads).unwrap();
    let inst = ProblemInstance::new(vec![300.0, 400.0, 500.0], vec![1.0, 1.0, 1.5], costs).unwrap();
    let params = SolverParams::new(0.05, 0.1, 0.1, 0.1, 11, 3).unwrap();
    (net, inst, params)
}

fn progressive_sampler(c: &mut Criterion) {
    let (net, inst, params) = setup();
    let mut group = c.benchmark_group("rma_2k_capped");
    group.sample_size(10);
    for (name, mode) in MODES {
        let opts = SamplingOptions {
            mode,
            theta_max_override: Some(50_000.0),
            ..Default::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| rm_without_oracle(&net, &inst, &params, &opts).unwrap())
        });
    }
    group.finish();
}

fn cost_sensitive_greedy(c: &mut Criterion) {
    let (net, inst, params) = setup();
    let opts = SamplingOptions {
        theta_max_override: Some(50_000.0),
        ..Default::default()
    };
    let out = rm_without_oracle(&net, &inst, &params, &opts).unwrap();
    let est = RrEstimator::new(&out.r1);
    let budgets = inst.scaled_budgets(1.1);
    c.bench_function("cs_greedy_on_r1", |b| {
        b.iter(|| cs_greedy(&Problem::new(&est, inst.costs(), &budgets, inst.cpe())))
    });
}

criterion_group!(benches, progressive_sampler, cost_sensitive_greedy);
criterion_main!(benches);
