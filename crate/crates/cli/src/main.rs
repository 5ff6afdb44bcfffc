//! `dpgs`: command-line front end for node-private graph stream statistics.
//!
//! Every output starts with a `# manifest:` line holding the subcommand, its
//! flags, the seed and the derived parameters. Re-running a manifest
//! reproduces the output byte for byte.
//!
//! Exit codes: 0 success, 1 input error or failed check, 2 usage error,
//! 70 internal error.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dpgs_core::bench::{run_suite, SUITES};
use dpgs_core::stability::{exhaustive_sweep, verify_stability, Relation, SweepConfig};
use dpgs_core::stats::StatTracker;
use dpgs_core::transform::{derive_params, privacy_accounting, suggest_budget_split, BaseMode};
use dpgs_core::{
    dist_to_graph, project_stream, transform_run, GraphStream, InclusionCriterion, NoiseSource, RestrictedEstimator,
    StatisticKind, StreamingEstimator,
};
use serde::Serialize;
use serde_json::{json, Value};

use output::{Document, Format};

#[derive(Parser, Serialize)]
#[command(name = "dpgs", version, about = "Node-private continual release of graph statistics")]
struct Cli {
    /// Seed for all noise; falls back to DPGS_SEED, then to OS entropy.
    #[arg(long, global = true, env = "DPGS_SEED")]
    seed: Option<u64>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    output: Option<PathBuf>,
    /// Skip duplicate edges in the input with a warning instead of failing.
    #[arg(long, global = true)]
    lenient: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Project a stream onto a degree bound.
    Project(ProjectArgs),
    /// Exact or degree-restricted private statistics per step.
    Stats(StatsArgs),
    /// Node-private release on arbitrary streams.
    Transform(TransformArgs),
    /// Distance to unboundedness, a neighbor pair check, or the exhaustive sweep.
    StabilityCheck(StabilityArgs),
    /// Monte-Carlo experiments and exhaustive sweeps.
    Bench(BenchArgs),
}

#[derive(Args, Serialize)]
struct ProjectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    degree_bound: usize,
    #[arg(long, default_value = "original")]
    criterion: InclusionCriterion,
}

#[derive(Args, Serialize)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["exact", "epsilon"]))]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    /// edges, triangles, kstars:K, cc or dhist[:CAP].
    #[arg(long)]
    statistic: String,
    #[arg(long)]
    exact: bool,
    /// Privacy parameter of the degree-restricted estimator.
    #[arg(long, requires = "degree_bound")]
    epsilon: Option<f64>,
    #[arg(long)]
    degree_bound: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Edge,
    Node,
}

#[derive(Args, Serialize)]
struct TransformArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    statistic: String,
    /// Total node-privacy budget.
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    degree_bound: usize,
    /// Accuracy failure probability.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Horizon T; defaults to the stream length.
    #[arg(long)]
    horizon: Option<usize>,
    /// Privacy notion of the base estimator.
    #[arg(long, value_enum, default_value_t = ModeArg::Edge)]
    mode: ModeArg,
    /// Sensitivity of the base estimator; required in node mode.
    #[arg(long)]
    base_gamma: Option<f64>,
    /// Overrides the suggested test budget.
    #[arg(long)]
    eps_test: Option<f64>,
    /// Overrides the suggested test failure probability.
    #[arg(long)]
    beta_test: Option<f64>,
    /// Overrides the suggested base budget.
    #[arg(long)]
    eps_prime: Option<f64>,
}

#[derive(Args, Serialize)]
struct StabilityArgs {
    /// Stream to evaluate (or the first stream of a pair).
    #[arg(long, required_unless_present = "exhaustive")]
    input: Option<PathBuf>,
    /// Neighboring stream; switches to the pair check.
    #[arg(long, conflicts_with = "exhaustive")]
    neighbor: Option<PathBuf>,
    /// Sweep all small streams instead of reading one.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    degree_bound: Option<usize>,
    /// Fixed number of high-degree nodes; per-prefix count when absent (pair and sweep).
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    criterion: Option<InclusionCriterion>,
    #[arg(long)]
    relation: Option<Relation>,
    #[arg(long, default_value_t = 5)]
    max_nodes: usize,
    #[arg(long, default_value_t = 3)]
    max_steps: usize,
}

#[derive(Args, Serialize)]
struct BenchArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
    suite: String,
    /// Trials per Monte-Carlo experiment; defaults depend on the suite.
    #[arg(long)]
    trials: Option<usize>,
}

/// Failure classes, mapped to exit codes.
enum Failure {
    Input(anyhow::Error),
    Check(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<dpgs_core::Error> for Failure {
    fn from(e: dpgs_core::Error) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<Document, (Document, Failure)>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cli)));
    let (doc, failure) = match result {
        Ok(Ok(doc)) => (Some(doc), None),
        Ok(Err((doc, f))) => (Some(doc), Some(f)),
        Err(_) => (None, Some(Failure::Internal(anyhow!("internal invariant breach")))),
    };
    if let Some(doc) = doc {
        if let Err(e) = doc.emit(cli.output.as_deref()) {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Some(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Some(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(70)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let seed = || cli.seed.unwrap_or_else(NoiseSource::entropy_seed);
    let wrap = |r: Result<Document, Failure>| r.map_err(|f| (Document::empty(cli.format), f));
    match &cli.command {
        Command::Project(a) => wrap(project(cli, a)),
        Command::Stats(a) => {
            let seed = a.epsilon.map(|_| seed());
            wrap(stats(cli, a, seed))
        }
        Command::Transform(a) => wrap(transform(cli, a, seed())),
        Command::StabilityCheck(a) => stability(cli, a),
        Command::Bench(a) => bench(cli, a, seed()),
    }
}

fn read_stream(path: &Path, lenient: bool) -> Result<GraphStream, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if lenient {
        GraphStream::parse_lenient(&text).map(|(s, _)| s)
    } else {
        GraphStream::parse(&text)
    };
    Ok(parsed.with_context(|| format!("parsing {}", path.display()))?)
}

fn manifest(cli: &Cli, seed: Option<u64>, derived: Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command,
        "format": cli.format,
        "lenient": cli.lenient,
        "seed": seed,
        "derived": derived,
    })
}

fn parse_statistic(s: &str, default_cap: usize) -> Result<StatisticKind, Failure> {
    StatisticKind::parse_with_cap(s, default_cap).map_err(|e| Failure::Input(anyhow!(e)))
}

fn value_columns(kind: StatisticKind, prefix: &str) -> Vec<String> {
    match kind {
        StatisticKind::DegreeHistogram(cap) => (0..=cap).map(|i| format!("{prefix}{i}")).collect(),
        _ => vec![prefix.to_string()],
    }
}

fn project(cli: &Cli, a: &ProjectArgs) -> Result<Document, Failure> {
    let s = read_stream(&a.input, cli.lenient)?;
    let p = project_stream(&s, a.degree_bound, a.criterion);
    let mut doc = Document::new(cli.format, manifest(cli, None, Value::Null));
    match cli.format {
        Format::Csv => doc.raw(p.to_text()),
        Format::Json => {
            for (t, b) in p.batches().iter().enumerate() {
                let edges: Vec<[&str; 2]> = b.edges().iter().map(|e| [e.u().as_str(), e.v().as_str()]).collect();
                doc.object(json!({ "t": t + 1, "nodes": b.nodes(), "edges": edges }));
            }
        }
    }
    Ok(doc)
}

fn stats(cli: &Cli, a: &StatsArgs, seed: Option<u64>) -> Result<Document, Failure> {
    let s = read_stream(&a.input, cli.lenient)?;
    let default_cap = a.degree_bound.unwrap_or_else(|| s.flatten_all().max_degree());
    let kind = parse_statistic(&a.statistic, default_cap)?;
    let columns = value_columns(kind, "value");
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(s.horizon());
    match (a.epsilon, a.degree_bound, seed) {
        (Some(eps), Some(bound), Some(seed)) => {
            // Degree-restricted estimator behind the original-degree projection.
            let p = project_stream(&s, bound, InclusionCriterion::Original);
            let mut est = RestrictedEstimator::new(kind, bound, s.horizon().max(1), eps, NoiseSource::new(seed))?;
            for b in p.batches() {
                rows.push(est.step(b)?);
            }
        }
        _ => {
            let mut tr = StatTracker::new(kind);
            for b in s.batches() {
                tr.increment(b).map_err(dpgs_core::Error::from)?;
                rows.push(tr.value());
            }
        }
    }
    let derived = json!({ "statistic": kind.to_string() });
    let mut doc = Document::new(cli.format, manifest(cli, seed, derived));
    doc.header(std::iter::once("t".to_string()).chain(columns.iter().cloned()).collect());
    for (t, row) in rows.iter().enumerate() {
        let mut cells = vec![(t + 1).to_string()];
        cells.extend(row.iter().map(|v| v.to_string()));
        let mut obj = json!({ "t": t + 1 });
        for (c, v) in columns.iter().zip(row) {
            obj[c] = json!(v);
        }
        doc.row(cells, obj);
    }
    Ok(doc)
}

fn transform(cli: &Cli, a: &TransformArgs, seed: u64) -> Result<Document, Failure> {
    let s = read_stream(&a.input, cli.lenient)?;
    let horizon = a.horizon.unwrap_or(s.horizon());
    let mode = match a.mode {
        ModeArg::Edge => BaseMode::RestrictedEdge,
        ModeArg::Node => BaseMode::RestrictedNode,
    };
    let mut cfg = suggest_budget_split(a.epsilon, a.delta, a.degree_bound, horizon, a.beta, mode)?;
    cfg.base_gamma = a.base_gamma;
    if let Some(v) = a.eps_test {
        cfg.eps_test = v;
    }
    if let Some(v) = a.beta_test {
        cfg.beta_test = v;
    }
    if let Some(v) = a.eps_prime {
        cfg.eps_prime = v;
    }
    let params = derive_params(&cfg)?;
    let (eps, delta) = privacy_accounting(&cfg, &params, 0.0);
    if eps > a.epsilon || delta > a.delta {
        log::warn!("overrides give accounted ({eps}, {delta}) above the requested ({}, {})", a.epsilon, a.delta);
    }
    let kind = parse_statistic(&a.statistic, params.d_prime)?.with_bucket_cap(params.d_prime);
    let run = transform_run(&s, &cfg, kind, &NoiseSource::new(seed))?;
    let derived = json!({
        "ell": params.ell,
        "d_prime": params.d_prime,
        "tau": params.tau,
        "eps_test": cfg.eps_test,
        "beta_test": cfg.beta_test,
        "eps_prime": cfg.eps_prime,
        "horizon": horizon,
        "epsilon": eps,
        "delta": delta,
    });
    let mut doc = Document::new(cli.format, manifest(cli, Some(seed), derived));
    doc.comment(format!(
        "ell={} d_prime={} tau={:?} eps_test={:?} beta_test={:?} eps_prime={:?} epsilon={:?} delta={:?}",
        params.ell, params.d_prime, params.tau, cfg.eps_test, cfg.beta_test, cfg.eps_prime, eps, delta
    ));
    let columns = value_columns(kind, "estimate");
    let mut header = vec!["t".to_string(), "released".to_string()];
    header.extend(columns.iter().cloned());
    doc.header(header);
    for (t, out) in run.steps.iter().enumerate() {
        let released = out.payload.is_some();
        let mut cells = vec![(t + 1).to_string(), (released as u8).to_string()];
        let mut obj = json!({ "t": t + 1, "released": released });
        match &out.payload {
            Some(p) => {
                cells.extend(p.iter().map(|v| v.to_string()));
                for (c, v) in columns.iter().zip(p) {
                    obj[c] = json!(v);
                }
            }
            None => {
                cells.extend(columns.iter().map(|_| String::new()));
                for c in &columns {
                    obj[c] = Value::Null;
                }
            }
        }
        doc.row(cells, obj);
    }
    Ok(doc)
}

fn stability(cli: &Cli, a: &StabilityArgs) -> Outcome {
    let fail = |f: Failure| (Document::empty(cli.format), f);
    if a.exhaustive {
        let cfg = SweepConfig {
            max_nodes: a.max_nodes,
            max_steps: a.max_steps,
            bounds: a.degree_bound.map_or(vec![1, 2], |d| vec![d]),
            criteria: a.criterion.map_or(InclusionCriterion::ALL.to_vec(), |c| vec![c]),
            relations: a.relation.map_or(Relation::ALL.to_vec(), |r| vec![r]),
            ell: a.ell,
        };
        if cfg.max_nodes > 6 || cfg.max_steps > 8 {
            return Err(fail(Failure::Input(anyhow!("the sweep supports at most 6 nodes and 8 steps"))));
        }
        let report = exhaustive_sweep(&cfg);
        let mut doc = Document::new(cli.format, manifest(cli, None, json!({ "config": cfg })));
        match cli.format {
            Format::Json => doc.object(json!(report)),
            Format::Csv => {
                doc.header(vec!["key".into(), "value".into()]);
                let mut kv = |k: &str, v: String| doc.row(vec![k.to_string(), v], Value::Null);
                kv("result", if report.passed() { "PASS" } else { "FAIL" }.into());
                kv("streams", report.streams.to_string());
                kv("pairs", report.pairs.to_string());
                kv("prefixes", report.prefixes.to_string());
                kv("violations", report.violations.to_string());
                for (k, v) in &report.by_item {
                    kv(&format!("violations {k}"), v.to_string());
                }
                for (k, v) in &report.max_edge_distance {
                    kv(&format!("max edge distance {k}"), v.to_string());
                }
                for (k, v) in &report.max_node_distance {
                    kv(&format!("max node distance {k}"), v.to_string());
                }
                if let Some(c) = &report.counterexample {
                    doc.comment(format!(
                        "counterexample: D={} criterion={} relation={} t={} items={}",
                        c.bound,
                        c.criterion,
                        c.relation,
                        c.t,
                        c.items.join(";")
                    ));
                    doc.comment("smaller stream:".into());
                    c.smaller.lines().for_each(|l| doc.comment(l.to_string()));
                    doc.comment("larger stream:".into());
                    c.larger.lines().for_each(|l| doc.comment(l.to_string()));
                }
            }
        }
        return if report.passed() {
            Ok(doc)
        } else {
            Err((doc, Failure::Check(format!("{} violating prefixes", report.violations))))
        };
    }
    let input = a.input.as_deref().expect("required unless exhaustive");
    let s = read_stream(input, cli.lenient).map_err(fail)?;
    let Some(bound) = a.degree_bound else {
        return Err(fail(Failure::Input(anyhow!("--degree-bound is required"))));
    };
    if let Some(neighbor) = &a.neighbor {
        let sp = read_stream(neighbor, cli.lenient).map_err(fail)?;
        let criterion = a.criterion.unwrap_or(InclusionCriterion::Original);
        let relation = a.relation.unwrap_or(Relation::Edge);
        let report = verify_stability(&s, &sp, bound, a.ell, criterion, relation)
            .map_err(|e| fail(e.into()))?;
        let mut doc = Document::new(cli.format, manifest(cli, None, Value::Null));
        doc.header(
            ["t", "ell", "qualifies", "edge_distance", "node_distance", "violations"]
                .map(String::from)
                .to_vec(),
        );
        for c in &report.checks {
            let nd = c.node_distance.map_or(String::new(), |d| d.to_string());
            let items = c.violations().join(";");
            doc.row(
                vec![
                    c.t.to_string(),
                    c.ell.to_string(),
                    c.qualifies.to_string(),
                    c.edge_distance.to_string(),
                    nd,
                    items,
                ],
                json!({
                    "t": c.t,
                    "ell": c.ell,
                    "qualifies": c.qualifies,
                    "edge_distance": c.edge_distance,
                    "node_distance": c.node_distance,
                    "violations": c.violations(),
                }),
            );
        }
        return if report.passed() {
            Ok(doc)
        } else {
            Err((doc, Failure::Check(format!("{} violating prefixes", report.violations.len()))))
        };
    }
    let Some(ell) = a.ell else {
        return Err(fail(Failure::Input(anyhow!("--ell is required without --neighbor or --exhaustive"))));
    };
    let mut doc = Document::new(cli.format, manifest(cli, None, Value::Null));
    doc.header(vec!["t".into(), "dist".into()]);
    for t in 1..=s.horizon() {
        let g = s.flatten(t).map_err(|e| fail(dpgs_core::Error::from(e).into()))?;
        let d = dist_to_graph(&g, bound, ell);
        doc.row(vec![t.to_string(), d.to_string()], json!({ "t": t, "dist": d }));
    }
    Ok(doc)
}

fn bench(cli: &Cli, a: &BenchArgs, seed: u64) -> Outcome {
    let trials = a.trials.unwrap_or(match a.suite.as_str() {
        "svt" => 20_000,
        "transform" => 2_000,
        _ => 500,
    });
    let outcomes = run_suite(&a.suite, trials, seed).map_err(|e| (Document::empty(cli.format), e.into()))?;
    let derived = json!({ "trials": trials });
    let mut doc = Document::new(cli.format, manifest(cli, Some(seed), derived));
    doc.header(["name", "result", "measured", "threshold", "detail"].map(String::from).to_vec());
    for o in &outcomes {
        doc.row(
            vec![
                o.name.clone(),
                if o.passed { "PASS" } else { "FAIL" }.into(),
                o.measured.to_string(),
                o.threshold.to_string(),
                o.detail.clone(),
            ],
            json!(o),
        );
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
    if failed.is_empty() {
        Ok(doc)
    } else {
        Err((doc, Failure::Check(failed.join(", "))))
    }
}
