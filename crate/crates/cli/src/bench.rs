//! Scaling benchmark: one CSV row per (size, repeat).

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use qaoa_lightcone::ParamSchedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{build_instance, evaluate, Engine, EngineArgs, Family, FamilyParams};

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Instance sizes in ascending order, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Seeds both the instances and the angles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    family_params: FamilyParams,
    #[arg(long, value_enum, default_value_t = Engine::Decomposed)]
    engine: Engine,
    #[command(flatten)]
    engine_args: EngineArgs,
    /// CSV output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One timed run. Column order is the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub engine: Engine,
    pub seed: u64,
    pub repeat: usize,
    pub workers: usize,
    pub wall_time_s: f64,
    pub energy: f64,
    pub distinct_classes: usize,
    pub max_subgraph_qubits: usize,
}

/// Angles for a benchmark run: γ in [0, π), β in [0, π/2).
pub fn bench_angles(p: usize, seed: u64) -> Result<ParamSchedule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gammas: Vec<f64> = (0..p).map(|_| rng.gen_range(0.0..PI)).collect();
    let betas: Vec<f64> = (0..p).map(|_| rng.gen_range(0.0..PI / 2.0)).collect();
    Ok(ParamSchedule::new(gammas, betas)?)
}

pub fn run(args: BenchArgs) -> Result<()> {
    if args.sizes.windows(2).any(|w| w[0] >= w[1]) {
        bail!("--sizes must be strictly ascending, got {:?}", args.sizes);
    }
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let params = bench_angles(args.p, args.seed)?;
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    let workers = match args.engine {
        Engine::Decomposed => args.engine_args.config().worker_count,
        Engine::Oracle => 1,
    };

    for &n in &args.sizes {
        let model = build_instance(args.family, n, &args.family_params, args.seed)
            .with_context(|| format!("building {:?} instance with n = {n}", args.family))?;
        for repeat in 0..args.repeats {
            let report = evaluate(&model, &params, args.engine, &args.engine_args)?;
            writer.serialize(BenchRecord {
                family: args.family,
                n,
                p: args.p,
                engine: args.engine,
                seed: args.seed,
                repeat,
                workers,
                wall_time_s: report.wall_time.as_secs_f64(),
                energy: report.energy,
                distinct_classes: report.distinct_classes,
                max_subgraph_qubits: report.max_subgraph_qubits,
            })?;
            writer.flush()?;
        }
        if args.out.is_some() {
            eprintln!("n = {n}: {} runs done", args.repeats);
        }
    }
    Ok(())
}
