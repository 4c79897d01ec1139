mod bench;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qaoa_lightcone::lightcone::{decompose, TermKind};
use qaoa_lightcone::mean_value::default_workers;
use qaoa_lightcone::oracle::{full_state, DEFAULT_ORACLE_QUBITS};
use qaoa_lightcone::problems::{coloring_model, gen_random_regular, maxcut_model, sk_model};
use qaoa_lightcone::sim::DEFAULT_MAX_QUBITS;
use qaoa_lightcone::{
    optimize, EngineConfig, IsingModel, MeanValueReport, OptimizeConfig, ParamSchedule,
    PreparedModel, TermResult,
};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "lcqaoa",
    version,
    about = "QAOA mean values by light-cone decomposition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark instance in the JSON instance format.
    Generate(GenerateArgs),
    /// Evaluate E_p at one angle set.
    Expectation(ExpectationArgs),
    /// Minimise E_p over the angles with multi-start Nelder–Mead.
    Optimize(OptimizeArgs),
    /// Light-cone sizes per term and the number of distinct circuits.
    DecomposeStats(StatsArgs),
    /// Time expectation() over a range of instance sizes and write CSV.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    MaxcutRegular,
    Sk,
    Coloring,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Decomposed,
    Oracle,
}

impl Engine {
    fn name(self) -> &'static str {
        match self {
            Engine::Decomposed => "decomposed",
            Engine::Oracle => "oracle",
        }
    }
}

/// Family parameters shared by `generate` and `bench`.
#[derive(Args, Clone, Debug)]
pub struct FamilyParams {
    /// Degree of the random regular graph (maxcut-regular, coloring).
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Number of colours (coloring).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Penalty weight A for conflicts and the one-hot constraint (coloring).
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
}

pub fn build_instance(
    family: Family,
    n: usize,
    params: &FamilyParams,
    seed: u64,
) -> Result<IsingModel> {
    Ok(match family {
        Family::MaxcutRegular => maxcut_model(&gen_random_regular(n, params.d, seed)?),
        Family::Sk => sk_model(n, seed)?,
        Family::Coloring => coloring_model(
            &gen_random_regular(n, params.d, seed)?,
            params.k,
            params.penalty,
        )?,
    })
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    family: Family,
    /// Number of graph nodes (spins for maxcut-regular and sk, n·k for coloring).
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    family_params: FamilyParams,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Engine flags shared by the evaluating commands.
#[derive(Args, Clone, Debug)]
pub struct EngineArgs {
    /// Worker threads [default: available parallelism].
    #[arg(long, env = "LCQAOA_WORKERS")]
    workers: Option<usize>,
    /// Simulate every term separately instead of sharing isomorphic circuits.
    #[arg(long)]
    no_dedup: bool,
    /// Largest circuit allowed, in qubits [default: 26, oracle 20].
    #[arg(long)]
    max_qubits: Option<usize>,
}

impl EngineArgs {
    pub fn config(&self) -> EngineConfig {
        let mut config = EngineConfig::default()
            .with_workers(self.workers.unwrap_or_else(default_workers))
            .with_dedup(!self.no_dedup);
        if let Some(cap) = self.max_qubits {
            config.max_subgraph_qubits = cap;
        }
        config
    }

    pub fn oracle_cap(&self) -> usize {
        self.max_qubits.unwrap_or(DEFAULT_ORACLE_QUBITS)
    }
}

#[derive(Args)]
struct ExpectationArgs {
    instance: PathBuf,
    #[arg(long)]
    p: usize,
    /// γ_1..γ_p in radians, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    gamma: Vec<f64>,
    /// β_1..β_p in radians, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    beta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Engine::Decomposed)]
    engine: Engine,
    #[command(flatten)]
    engine_args: EngineArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OptimizeArgs {
    instance: PathBuf,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Energy evaluations allowed per restart.
    #[arg(long, default_value_t = 400)]
    max_evals: usize,
    #[command(flatten)]
    engine_args: EngineArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    instance: PathBuf,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    json: bool,
}

/// JSON document printed by `expectation --json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ExpectationOutput {
    pub engine: Engine,
    pub p: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub config: EngineConfig,
    pub report: MeanValueReport,
}

#[derive(Debug, Serialize, Deserialize)]
struct OptimizeOutput {
    p: usize,
    restarts: usize,
    seed: u64,
    energy: f64,
    gammas: Vec<f64>,
    betas: Vec<f64>,
    evaluations: usize,
    trace: Vec<qaoa_lightcone::TraceEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermStats {
    term: String,
    coefficient: f64,
    nodes: usize,
    edges: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct StatsOutput {
    p: usize,
    num_nodes: usize,
    terms: Vec<TermStats>,
    distinct_classes: usize,
    max_subgraph_qubits: usize,
    mean_subgraph_qubits: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Expectation(args) => run_expectation(args),
        Command::Optimize(args) => run_optimize(args),
        Command::DecomposeStats(args) => decompose_stats(args),
        Command::Bench(args) => bench::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // the reader went away (e.g. `| head`); nothing left to report
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lcqaoa: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    use std::io::ErrorKind;
    e.chain().any(|cause| {
        let kind = if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            Some(io.kind())
        } else if let Some(j) = cause.downcast_ref::<serde_json::Error>() {
            j.io_error_kind()
        } else if let Some(c) = cause.downcast_ref::<csv::Error>() {
            match c.kind() {
                csv::ErrorKind::Io(io) => Some(io.kind()),
                _ => None,
            }
        } else {
            None
        };
        kind == Some(ErrorKind::BrokenPipe)
    })
}

fn read_instance(path: &Path) -> Result<IsingModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    IsingModel::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let model = build_instance(args.family, args.n, &args.family_params, args.seed)?;
    let text = model.to_json();
    match &args.out {
        Some(path) => {
            fs::write(path, format!("{text}\n"))
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!(
                "wrote {}: {} spins, {} edges, offset {}",
                path.display(),
                model.num_nodes(),
                model.edges().len(),
                model.offset()
            );
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn schedule(p: usize, gammas: Vec<f64>, betas: Vec<f64>) -> Result<ParamSchedule> {
    if gammas.len() != p || betas.len() != p {
        bail!(
            "--p {p} needs {p} gamma and {p} beta values, got {} and {}",
            gammas.len(),
            betas.len()
        );
    }
    Ok(ParamSchedule::new(gammas, betas)?)
}

fn term_label(kind: TermKind) -> String {
    match kind {
        TermKind::Edge { i, j } => format!("Z{i}Z{j}"),
        TermKind::Node { k } => format!("Z{k}"),
    }
}

/// Full-circuit evaluation packaged like the decomposed report: one circuit
/// on all spins, term values read off the final state.
pub fn oracle_report(
    model: &IsingModel,
    params: &ParamSchedule,
    cap: usize,
) -> Result<MeanValueReport> {
    let start = Instant::now();
    let terms = decompose(model, params.p())?;
    let n = model.num_nodes();
    let probs: Vec<f64> = if n == 0 {
        Vec::new()
    } else {
        full_state(model, params, cap)?
            .iter()
            .map(|a| a.norm_sqr())
            .collect()
    };
    let spin_product = |mask: usize| -> f64 {
        probs
            .iter()
            .enumerate()
            .map(|(b, pr)| {
                if (b & mask).count_ones().is_multiple_of(2) {
                    *pr
                } else {
                    -pr
                }
            })
            .sum()
    };
    let mut energy = 0.0;
    let terms: Vec<TermResult> = terms
        .iter()
        .map(|t| {
            let mask = match t.id.kind {
                TermKind::Edge { i, j } => (1 << i) | (1 << j),
                TermKind::Node { k } => 1 << k,
            };
            let expectation = spin_product(mask);
            energy += t.id.coefficient * expectation;
            TermResult {
                term: t.id,
                expectation,
                coefficient: t.id.coefficient,
                subgraph_qubits: n,
                cache_hit: false,
            }
        })
        .collect();
    Ok(MeanValueReport {
        energy: model.offset() + energy,
        offset: model.offset(),
        terms,
        distinct_classes: usize::from(n > 0),
        max_subgraph_qubits: n,
        wall_time: start.elapsed(),
        worker_count: 1,
    })
}

pub fn evaluate(
    model: &IsingModel,
    params: &ParamSchedule,
    engine: Engine,
    args: &EngineArgs,
) -> Result<MeanValueReport> {
    match engine {
        Engine::Decomposed => Ok(qaoa_lightcone::expectation(model, params, &args.config())?),
        Engine::Oracle => oracle_report(model, params, args.oracle_cap()),
    }
}

fn run_expectation(args: ExpectationArgs) -> Result<()> {
    let model = read_instance(&args.instance)?;
    let params = schedule(args.p, args.gamma, args.beta)?;
    let report = evaluate(&model, &params, args.engine, &args.engine_args)?;
    let mut out = std::io::stdout().lock();
    if args.json {
        let doc = ExpectationOutput {
            engine: args.engine,
            p: args.p,
            gammas: params.gammas().to_vec(),
            betas: params.betas().to_vec(),
            config: args.engine_args.config(),
            report,
        };
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)?;
    } else {
        writeln!(out, "energy        {:.12}", report.energy)?;
        writeln!(out, "offset        {}", report.offset)?;
        writeln!(out, "engine        {}", args.engine.name())?;
        writeln!(out, "terms         {}", report.terms.len())?;
        writeln!(out, "circuits      {}", report.distinct_classes)?;
        writeln!(out, "max qubits    {}", report.max_subgraph_qubits)?;
        writeln!(out, "workers       {}", report.worker_count)?;
        writeln!(out, "wall_time_s   {:.6}", report.wall_time.as_secs_f64())?;
    }
    Ok(())
}

fn run_optimize(args: OptimizeArgs) -> Result<()> {
    let model = read_instance(&args.instance)?;
    let config = OptimizeConfig {
        restarts: args.restarts,
        seed: args.seed,
        max_evals_per_restart: args.max_evals,
        engine: args.engine_args.config(),
        ..OptimizeConfig::default()
    };
    let result = optimize(&model, args.p, &config)?;
    let mut out = std::io::stdout().lock();
    if args.json {
        let doc = OptimizeOutput {
            p: args.p,
            restarts: args.restarts,
            seed: args.seed,
            energy: result.energy,
            gammas: result.params.gammas().to_vec(),
            betas: result.params.betas().to_vec(),
            evaluations: result.trace.len(),
            trace: result.trace,
        };
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)?;
    } else {
        let list = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x:.12}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(out, "energy        {:.12}", result.energy)?;
        writeln!(out, "gamma         {}", list(result.params.gammas()))?;
        writeln!(out, "beta          {}", list(result.params.betas()))?;
        writeln!(out, "evaluations   {}", result.trace.len())?;
    }
    Ok(())
}

fn decompose_stats(args: StatsArgs) -> Result<()> {
    let model = read_instance(&args.instance)?;
    let terms = decompose(&model, args.p)?;
    let config = EngineConfig {
        // statistics only; nothing is simulated
        max_subgraph_qubits: usize::MAX,
        ..EngineConfig::default()
    };
    let prepared = PreparedModel::new(&model, args.p, &config)?;
    let stats: Vec<TermStats> = terms
        .iter()
        .map(|t| TermStats {
            term: term_label(t.id.kind),
            coefficient: t.id.coefficient,
            nodes: t.subgraph.num_qubits(),
            edges: t.subgraph.edges.len(),
        })
        .collect();
    let mean = if stats.is_empty() {
        0.0
    } else {
        stats.iter().map(|s| s.nodes as f64).sum::<f64>() / stats.len() as f64
    };
    let doc = StatsOutput {
        p: args.p,
        num_nodes: model.num_nodes(),
        distinct_classes: prepared.distinct_classes(),
        max_subgraph_qubits: prepared.max_subgraph_qubits(),
        mean_subgraph_qubits: mean,
        terms: stats,
    };
    let mut out = std::io::stdout().lock();
    if args.json {
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)?;
    } else {
        writeln!(
            out,
            "{:<14} {:>12} {:>6} {:>6}",
            "term", "coefficient", "nodes", "edges"
        )?;
        for s in &doc.terms {
            writeln!(
                out,
                "{:<14} {:>12} {:>6} {:>6}",
                s.term, s.coefficient, s.nodes, s.edges
            )?;
        }
        writeln!(out, "terms         {}", doc.terms.len())?;
        writeln!(out, "circuits      {}", doc.distinct_classes)?;
        writeln!(out, "max qubits    {}", doc.max_subgraph_qubits)?;
        writeln!(out, "mean qubits   {:.3}", doc.mean_subgraph_qubits)?;
        if doc.max_subgraph_qubits > DEFAULT_MAX_QUBITS {
            writeln!(
                out,
                "note: the largest circuit exceeds the default cap of {DEFAULT_MAX_QUBITS} qubits"
            )?;
        }
    }
    Ok(())
}
