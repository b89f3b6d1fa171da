use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use revmax::experiment::{
    format_sig6, run_sweep, solve, write_csv, write_iterations_csv, ExperimentConfig, MetricsRow, SolverKind,
};
use revmax::network::{generate_synthetic, SyntheticModel};
use revmax::rr::write_collection;
use revmax::verify::run_property_suite;
use revmax::InstanceConfig;

#[derive(Parser)]
#[command(name = "revmax", version, about = "Revenue maximization for incentivized social advertising")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and print its allocation and metrics.
    Solve(SolveArgs),
    /// Run solvers over a parameter sweep and write a CSV table.
    Sweep(SweepArgs),
    /// Generate a synthetic network and write it as an edge list.
    Gen(GenArgs),
    /// Run randomized property checks on tiny instances.
    Verify(VerifyArgs),
}

/// Flags shared by `solve` and `sweep`; each maps to an experiment config key.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Experiment config (TOML); its values override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance config (TOML).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Edge-list file.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// per_advertiser, per_topic or weighted_cascade.
    #[arg(long)]
    format: Option<String>,
    /// Topic-mixture file for per_topic datasets.
    #[arg(long)]
    mixture: Option<PathBuf>,
    /// Advertiser count for weighted_cascade and per_topic datasets.
    #[arg(long)]
    advertisers: Option<usize>,
    /// Node count of a synthetic graph (instead of a dataset).
    #[arg(long)]
    synthetic_n: Option<usize>,
    /// erdos_renyi or power_law.
    #[arg(long)]
    model: Option<String>,
    /// Seed of the synthetic graph.
    #[arg(long)]
    graph_seed: Option<u64>,
    /// RR-sets used to score allocations.
    #[arg(long)]
    eval_samples: Option<usize>,
    /// Master seed; overrides the instance seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report 0 for wall time.
    #[arg(long)]
    deterministic: bool,
    /// Enable the boosted re-solve of the progressive sampler.
    #[arg(long)]
    boosting: bool,
    #[arg(long)]
    spread_samples: Option<usize>,
    #[arg(long)]
    baseline_samples: Option<usize>,
    /// Cap on the progressive sampler's collection size.
    #[arg(long)]
    theta_max: Option<f64>,
    /// skip or stop.
    #[arg(long)]
    ca_mode: Option<String>,
    /// Disable data-parallel loops.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// rma, rm_oracle, ca or cs.
    #[arg(long, default_value = "rma")]
    solver: String,
    /// Write per-iteration diagnostics of the progressive sampler as CSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Dump the final selection collection in binary form.
    #[arg(long)]
    dump_rr: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated solver list.
    #[arg(long, value_delimiter = ',')]
    solvers: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Budget multipliers.
    #[arg(long, value_delimiter = ',')]
    budget: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    h: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "power_law")]
    model: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    advertisers: usize,
    /// per_advertiser (probabilities) or weighted_cascade (bare pairs).
    #[arg(long, default_value = "per_advertiser")]
    format: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Random instances per check.
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn set<T: Into<Value>>(t: &mut Table, key: &str, v: Option<T>) {
    if let Some(v) = v {
        t.insert(key.into(), v.into());
    }
}

fn path_value(p: &Path) -> Value {
    Value::String(p.to_string_lossy().into_owned())
}

fn int(x: usize) -> Value {
    Value::Integer(x as i64)
}

fn flag_table(c: &CommonArgs) -> Table {
    let mut t = Table::new();
    set(&mut t, "instance", c.instance.as_deref().map(path_value));
    if let Some(path) = &c.dataset {
        let mut d = Table::new();
        d.insert("path".into(), path_value(path));
        set(&mut d, "format", c.format.clone());
        set(&mut d, "mixture", c.mixture.as_deref().map(path_value));
        set(&mut d, "advertisers", c.advertisers.map(int));
        t.insert("dataset".into(), Value::Table(d));
    }
    if let Some(n) = c.synthetic_n {
        let mut s = Table::new();
        s.insert("n".into(), int(n));
        s.insert("model".into(), c.model.clone().unwrap_or_else(|| "power_law".into()).into());
        set(&mut s, "seed", c.graph_seed.map(|x| x as i64));
        set(&mut s, "advertisers", c.advertisers.map(int));
        t.insert("synthetic".into(), Value::Table(s));
    }
    set(&mut t, "eval_samples", c.eval_samples.map(int));
    set(&mut t, "seed", c.seed.map(|x| x as i64));
    set(&mut t, "deterministic", c.deterministic.then_some(true));
    set(&mut t, "boosting", c.boosting.then_some(true));
    set(&mut t, "spread_samples", c.spread_samples.map(int));
    set(&mut t, "baseline_samples", c.baseline_samples.map(int));
    set(&mut t, "theta_max", c.theta_max);
    set(&mut t, "ca_mode", c.ca_mode.clone());
    set(&mut t, "sequential", c.sequential.then_some(true));
    t
}

/// Rewrites relative paths of a config table against `dir`.
fn anchor_paths(t: &mut Table, dir: &Path) {
    let fix = |v: &mut Value| {
        if let Value::String(s) = v {
            if Path::new(s).is_relative() {
                *s = dir.join(&*s).to_string_lossy().into_owned();
            }
        }
    };
    for key in ["instance", "output"] {
        if let Some(v) = t.get_mut(key) {
            fix(v);
        }
    }
    if let Some(Value::Table(d)) = t.get_mut("dataset") {
        for key in ["path", "mixture"] {
            if let Some(v) = d.get_mut(key) {
                fix(v);
            }
        }
    }
}

/// Config-file keys win over flags; tables merge key by key.
fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn build_config(common: &CommonArgs, mut flags: Table) -> Result<ExperimentConfig> {
    merge(&mut flags, flag_table(common));
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut file: Table = text.parse().with_context(|| format!("parsing {}", path.display()))?;
        anchor_paths(&mut file, path.parent().unwrap_or(Path::new(".")));
        merge(&mut flags, file);
    }
    if !flags.contains_key("instance") {
        bail!("an instance config is required (--instance or `instance` in --config)");
    }
    Value::Table(flags).try_into::<ExperimentConfig>().context("invalid experiment configuration")
}

fn load_inputs(cfg: &ExperimentConfig) -> Result<(InstanceConfig, revmax::TicNetwork)> {
    let instance = InstanceConfig::load(&cfg.instance).with_context(|| format!("instance {}", cfg.instance.display()))?;
    let net = cfg.network(instance.advertiser_count()).context("loading the network")?;
    if net.advertiser_count() < instance.advertiser_count() {
        bail!(
            "the network has {} advertisers but the instance needs {}",
            net.advertiser_count(),
            instance.advertiser_count()
        );
    }
    Ok((instance, net))
}

fn parse_solver(name: &str) -> Result<SolverKind> {
    Value::String(name.into()).try_into::<SolverKind>().with_context(|| format!("unknown solver {name:?}"))
}

fn metrics_line(r: &MetricsRow) -> String {
    format!(
        "revenue={} cost={} budget_usage={} rate_of_return={} seeds={} wall_time_s={} rr_sets={}",
        format_sig6(r.eval.revenue),
        format_sig6(r.eval.cost),
        format_sig6(r.eval.budget_usage),
        format_sig6(r.eval.rate_of_return),
        r.eval.seeds,
        format_sig6(r.wall_time),
        r.rr_sets
    )
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let mut flags = Table::new();
    flags.insert("solvers".into(), Value::Array(vec![args.solver.clone().into()]));
    let cfg = build_config(&args.common, flags)?;
    let solver = match cfg.solvers.as_slice() {
        [s] => *s,
        _ => parse_solver(&args.solver)?,
    };
    let (instance, net) = load_inputs(&cfg)?;
    let report = solve(&cfg, &instance, &net, solver)?;
    let mut out = io::stdout().lock();
    writeln!(out, "solver {}", solver.name())?;
    for (i, seeds) in report.allocation.canonical().iter().enumerate() {
        let list: Vec<String> = seeds.iter().map(|v| v.to_string()).collect();
        writeln!(out, "advertiser {i}: {}", list.join(" "))?;
    }
    let row = MetricsRow {
        solver,
        axis: "none",
        value: 0.0,
        budget_scale: report.budget_scale,
        eval: report.eval,
        wall_time: report.wall_time,
        rr_sets: report.rr_sets,
    };
    writeln!(out, "{}", metrics_line(&row))?;
    if let Some(s) = &report.sampling {
        writeln!(
            out,
            "stop={:?} iterations={} beta={} feasible={} boosted={}",
            s.stop,
            s.iterations.len(),
            format_sig6(s.report.beta),
            s.report.feasible,
            s.boosted
        )?;
        if let Some(path) = &args.diagnostics {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_iterations_csv(&s.iterations, BufWriter::new(f))?;
        }
        if let Some(path) = &args.dump_rr {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(f);
            write_collection(&s.r1, &mut w)?;
            w.flush()?;
        }
    } else if args.diagnostics.is_some() || args.dump_rr.is_some() {
        bail!("--diagnostics and --dump-rr need --solver rma");
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut flags = Table::new();
    if !args.solvers.is_empty() {
        flags.insert("solvers".into(), Value::Array(args.solvers.iter().cloned().map(Value::from).collect()));
    }
    let mut sweep = Table::new();
    let floats = |v: &[f64]| Value::Array(v.iter().map(|&x| Value::Float(x)).collect());
    if !args.alpha.is_empty() {
        sweep.insert("alpha".into(), floats(&args.alpha));
    }
    if !args.budget.is_empty() {
        sweep.insert("budget".into(), floats(&args.budget));
    }
    if !args.h.is_empty() {
        sweep.insert("h".into(), Value::Array(args.h.iter().map(|&x| int(x)).collect()));
    }
    if !args.epsilon.is_empty() {
        sweep.insert("epsilon".into(), floats(&args.epsilon));
    }
    if !sweep.is_empty() {
        flags.insert("sweep".into(), Value::Table(sweep));
    }
    set(&mut flags, "output", args.output.as_deref().map(path_value));
    let cfg = build_config(&args.common, flags)?;
    let (instance, net) = load_inputs(&cfg)?;
    let rows = run_sweep(&cfg, &instance, &net)?;
    match &cfg.output {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, BufWriter::new(f))?;
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let model = Value::String(args.model.clone())
        .try_into::<SyntheticModel>()
        .with_context(|| format!("unknown model {:?}", args.model))?;
    let net = generate_synthetic(args.n, model, args.seed, args.advertisers);
    let f = File::create(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    let mut w = BufWriter::new(f);
    match args.format.as_str() {
        "per_advertiser" => net.write_per_advertiser(&mut w)?,
        "weighted_cascade" => net.write_edge_pairs(&mut w)?,
        other => bail!("gen writes per_advertiser or weighted_cascade, not {other:?}"),
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let mut ok = true;
    for r in run_property_suite(args.trials, args.seed) {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!("{status} {} ({} violations in {} trials)", r.name, r.violations, r.trials);
        ok &= r.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Gen(a) => cmd_gen(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
