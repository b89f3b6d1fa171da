use std::fs;
use std::path::Path;

use revmax::experiment::{
    build_instance, evaluate_allocation, run_sweep, write_csv, ExperimentConfig, SolverKind, SweepSpec, CSV_HEADER,
};
use revmax::instance::{CostSpec, InstanceConfig};
use revmax::network::{generate_synthetic, load_edge_list, EdgeFormat, LoadOptions, NetworkError, SyntheticModel};
use revmax::oracle::exact_spread;
use revmax::rr::{read_collection, write_collection, RrSampler};
use revmax::rng::Stream;
use revmax::{Allocation, CostTable, ExecMode, ProblemInstance, TicNetwork};

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn edge_list_files_in_every_format() {
    let dir = tempfile::tempdir().unwrap();

    let per_adv = write(dir.path(), "adv.txt", "# src dst p1 p2\n10 20 0.5 0.25\n20 30 1.0 0.0\n");
    let loaded = load_edge_list(&per_adv, &LoadOptions::new(EdgeFormat::PerAdvertiser)).unwrap();
    let net = &loaded.network;
    assert_eq!((net.node_count(), net.advertiser_count(), net.edge_count()), (3, 2, 2));
    assert_eq!(loaded.original_ids, vec![10, 20, 30]);
    assert_eq!(net.prob(0, 1), 0.25);
    let mut out = Vec::new();
    net.write_per_advertiser(&mut out).unwrap();
    let back = write(dir.path(), "back.txt", std::str::from_utf8(&out).unwrap());
    let again = load_edge_list(&back, &LoadOptions::new(EdgeFormat::PerAdvertiser)).unwrap().network;
    assert_eq!(again.edges(), net.edges());
    for e in 0..net.edge_count() {
        for i in 0..2 {
            assert_eq!(again.prob(e, i), net.prob(e, i));
        }
    }

    let topics = write(dir.path(), "topics.txt", "0 1 0.6 0.0\n1 2 0.2 0.4\n");
    let mixture = write(dir.path(), "mix.txt", "0 0.5 0.5\n1 0.3 0.7\n");
    let mut opts = LoadOptions::new(EdgeFormat::PerTopic);
    opts.mixture = Some(mixture);
    let net = load_edge_list(&topics, &opts).unwrap().network;
    assert!((net.prob(0, 1) - 0.3 * 0.6).abs() < 1e-12);
    assert!((net.prob(1, 1) - (0.3 * 0.2 + 0.7 * 0.4)).abs() < 1e-12);
    opts.mixture = None;
    assert!(load_edge_list(&topics, &opts).is_err());

    let pairs = write(dir.path(), "wc.txt", "0 2\n1 2\n2 0\n");
    let mut opts = LoadOptions::new(EdgeFormat::WeightedCascade);
    opts.advertisers = Some(3);
    let net = load_edge_list(&pairs, &opts).unwrap().network;
    assert_eq!(net.advertiser_count(), 3);
    assert_eq!(net.prob(0, 2), 0.5);
    assert_eq!(net.prob(2, 0), 1.0);

    let mut dense = LoadOptions::new(EdgeFormat::WeightedCascade);
    dense.node_count = Some(2);
    assert!(matches!(load_edge_list(&pairs, &dense), Err(NetworkError::DanglingNode { id: 2, .. })));
    assert!(load_edge_list(&dir.path().join("missing.txt"), &LoadOptions::new(EdgeFormat::WeightedCascade)).is_err());
}

#[test]
fn synthetic_graphs_are_reproducible() {
    for model in [SyntheticModel::ErdosRenyi, SyntheticModel::PowerLaw] {
        let a = generate_synthetic(500, model, 11, 2);
        let b = generate_synthetic(500, model, 11, 2);
        assert_eq!(a.edges(), b.edges());
        assert_ne!(a.edges(), generate_synthetic(500, model, 12, 2).edges());
        let one = generate_synthetic(1, model, 0, 1);
        assert_eq!((one.node_count(), one.edge_count()), (1, 0));
    }
}

#[test]
fn instance_config_reads_a_cost_table_next_to_it() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "costs.txt", "# node advertiser cost\n0 0 1.5\n1 0 2.5\n0 1 3.0\n1 1 0.5\n");
    let path = write(
        dir.path(),
        "inst.toml",
        "budgets = [10.0, 12.0]\ncpe = [1.0, 2.0]\ncost_model = \"table\"\ncost_table = \"costs.txt\"\nepsilon = 0.05\ndelta = 0.01\nrho = 0.1\ntau = 0.1\n",
    );
    let cfg = InstanceConfig::load(&path).unwrap();
    assert!(cfg.cost_table.as_ref().unwrap().is_absolute());
    let CostSpec::Table(_) = cfg.cost_spec().unwrap() else { panic!("expected a table") };
    let inst = build_instance(&cfg, &[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert_eq!(inst.costs().row(1), &[3.0, 0.5]);
    assert!(cfg.params().is_ok());

    let bad = write(dir.path(), "bad.toml", "h = 3\nbudgets = [1.0]\ncpe = [1.0]\ncost_model = \"linear\"\nepsilon = 0.1\ndelta = 0.1\nrho = 0.1\ntau = 0.1\n");
    assert!(InstanceConfig::load(&bad).is_err());
}

#[test]
fn evaluation_tracks_exact_revenue() {
    let net = TicNetwork::new(3, 1, vec![(0, 1), (1, 2)], vec![0.5, 0.5]).unwrap();
    let inst = ProblemInstance::new(vec![10.0], vec![2.0], CostTable::new(1, 3, vec![0.2; 3]).unwrap()).unwrap();
    let alloc = Allocation::from_sets(3, vec![vec![0]]).unwrap();
    let exact = 2.0 * exact_spread(&net, 0, &[0], 64).unwrap();
    let a = evaluate_allocation(&alloc, &net, &inst, 1_000_000, 5, ExecMode::default()).unwrap();
    assert!((a.revenue - exact).abs() <= 0.01 * exact, "{} vs {exact}", a.revenue);
    assert!((a.cost - 0.2).abs() < 1e-12);
    let b = evaluate_allocation(&alloc, &net, &inst, 1_000_000, 5, ExecMode::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn collections_survive_a_file_round_trip() {
    let net = generate_synthetic(200, SyntheticModel::PowerLaw, 2, 3);
    let coll = RrSampler::new(&net, &[1.0, 0.5, 2.0], 8, Stream::Selection).unwrap().collection(3000);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r1.bin");
    write_collection(&coll, fs::File::create(&path).unwrap()).unwrap();
    let back = read_collection(std::io::BufReader::new(fs::File::open(&path).unwrap()), 3).unwrap();
    assert_eq!(back.len(), coll.len());
    for k in 0..coll.len() {
        assert_eq!((back.tag(k), back.set(k)), (coll.tag(k), coll.set(k)));
    }
}

fn small_setup(sweep: SweepSpec) -> (ExperimentConfig, InstanceConfig, TicNetwork) {
    let instance = InstanceConfig::parse(
        "budgets = [30.0, 40.0]\ncpe = [1.0, 1.5]\ncost_model = \"linear\"\nalpha = 0.3\nepsilon = 0.1\ndelta = 0.05\nrho = 0.2\ntau = 0.1\nseed = 3\n",
    )
    .unwrap();
    let mut cfg = ExperimentConfig::parse("instance = \"unused.toml\"\n[synthetic]\nn = 300\nmodel = \"erdos_renyi\"\nseed = 4\n").unwrap();
    cfg.sweep = sweep;
    cfg.eval_samples = 20_000;
    cfg.spread_samples = 2_000;
    cfg.baseline_samples = 20_000;
    cfg.theta_max = Some(40_000.0);
    cfg.deterministic = true;
    let net = cfg.network(2).unwrap();
    (cfg, instance, net)
}

#[test]
fn alpha_sweep_yields_a_row_per_solver_and_point() {
    let alphas = vec![0.1, 0.2, 0.3, 0.4, 0.5];
    let (cfg, instance, net) = small_setup(SweepSpec {
        alpha: Some(alphas.clone()),
        ..SweepSpec::default()
    });
    let rows = run_sweep(&cfg, &instance, &net).unwrap();
    assert_eq!(rows.len(), 15);
    for kind in [SolverKind::Rma, SolverKind::Cs, SolverKind::Ca] {
        let mine: Vec<f64> = rows.iter().filter(|r| r.solver == kind).map(|r| r.value).collect();
        assert_eq!(mine, alphas);
    }
    assert!(rows.iter().all(|r| r.axis == "alpha" && r.wall_time == 0.0));
}

#[test]
fn budget_sweep_gives_baselines_the_relaxed_budget() {
    let (mut cfg, instance, net) = small_setup(SweepSpec {
        budget: Some(vec![1.0]),
        ..SweepSpec::default()
    });
    cfg.solvers = vec![SolverKind::Rma, SolverKind::RmOracle, SolverKind::Ca, SolverKind::Cs];
    let rows = run_sweep(&cfg, &instance, &net).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let want = match r.solver {
            SolverKind::Rma | SolverKind::RmOracle => 1.0,
            SolverKind::Ca | SolverKind::Cs => 1.2,
        };
        assert!((r.budget_scale - want).abs() < 1e-12, "{:?}", r.solver);
    }
    assert_eq!(rows.iter().map(|r| r.solver).collect::<Vec<_>>(), cfg.solvers);
}

#[test]
fn advertiser_sweep_uses_leading_advertisers() {
    let (cfg, instance, net) = small_setup(SweepSpec {
        h: Some(vec![1, 2]),
        ..SweepSpec::default()
    });
    let rows = run_sweep(&cfg, &instance, &net).unwrap();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let total_budget = if r.value == 1.0 { 30.0 } else { 70.0 };
        let spent = r.eval.budget_usage * total_budget;
        assert!((spent - (r.eval.revenue + r.eval.cost)).abs() < 1e-6);
    }
}

#[test]
fn csv_output_is_stable_and_formatted() {
    let (cfg, instance, net) = small_setup(SweepSpec {
        epsilon: Some(vec![0.1]),
        ..SweepSpec::default()
    });
    let mut a = Vec::new();
    write_csv(&run_sweep(&cfg, &instance, &net).unwrap(), &mut a).unwrap();
    let mut b = Vec::new();
    write_csv(&run_sweep(&cfg, &instance, &net).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), CSV_HEADER.len());
        let revenue = fields[4];
        let digits = revenue.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
        assert!(digits <= 6 + usize::from(revenue.starts_with("0.")), "{revenue}");
    }
}

#[test]
fn experiment_config_resolves_paths_against_its_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "exp.toml",
        "instance = \"inst.toml\"\noutput = \"out/alpha.csv\"\nsolvers = [\"rma\", \"rm_oracle\"]\n[dataset]\npath = \"g.txt\"\nformat = \"weighted_cascade\"\n[sweep]\nalpha = [0.1]\n",
    );
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.instance, dir.path().join("inst.toml"));
    assert_eq!(cfg.output.as_deref(), Some(dir.path().join("out/alpha.csv").as_path()));
    assert_eq!(cfg.dataset.unwrap().path, dir.path().join("g.txt"));
    assert_eq!(cfg.eval_samples, 100_000);
    assert!(ExperimentConfig::parse("instance = \"x\"\nbogus = 1\n").is_err());
}
