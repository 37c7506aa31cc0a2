//! Benchmark and verification harness for the Jacobi-type tensor solvers.
//!
//! `solve` runs one solver on a problem file, a builtin benchmark, or a
//! seeded synthetic instance, writing a per-rotation CSV log and a JSON
//! summary. `verify` runs the library's property suites. `gen` materializes
//! a synthetic instance on disk.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use jacobi_tensor::checks;
use jacobi_tensor::generate::{gen_instance, example_7_1_spec, GeneratorKind, GeneratorSpec};
use jacobi_tensor::io;
use jacobi_tensor::objective::{Dagger, Family};
use jacobi_tensor::solver::{solve, Algorithm, PairStrategy, SolverConfig};
use jacobi_tensor::ProblemSpec;

#[derive(Parser)]
#[command(name = "jacobi-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver on a problem and write its log and summary.
    Solve(SolveArgs),
    /// Run a verification suite (or `all`).
    Verify(VerifyArgs),
    /// Generate a synthetic instance and write it to disk.
    Gen(GenArgs),
}

#[derive(Args)]
struct ProblemSource {
    /// Problem description file (JSON).
    #[arg(long, conflicts_with_all = ["generator", "example_7_1"])]
    problem: Option<PathBuf>,
    /// Builtin 3×3×3 benchmark tensor.
    #[arg(long = "example-7-1", conflicts_with = "generator")]
    example_7_1: bool,
    /// Synthetic instance kind: noisy-diagonal | random-dense.
    #[arg(long)]
    generator: Option<String>,
    /// Mode dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// Truncation ranks, comma separated (one per mode for jatc, one
    /// common value otherwise). Defaults to the smallest dimension.
    #[arg(long, value_delimiter = ',')]
    ranks: Vec<usize>,
    /// Number of data tensors.
    #[arg(long = "L", default_value_t = 1)]
    l: usize,
    /// Noise amplitude for the noisy-diagonal generator.
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Complex-valued data (real otherwise).
    #[arg(long)]
    complex: bool,
    /// One shared ground-truth factor across modes.
    #[arg(long)]
    common_factor: bool,
    /// Symmetrize the noise over index permutations.
    #[arg(long)]
    symmetrize: bool,
    /// Objective family for generated instances: trace-max | jatd-s | jatd | jatc.
    #[arg(long, default_value = "jatd")]
    family: String,
    /// Contraction dagger: conj-transpose | transpose.
    #[arg(long, default_value = "conj-transpose")]
    dagger: String,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ProblemSource {
    fn label(&self) -> String {
        if self.example_7_1 {
            "example-7-1".to_string()
        } else if let Some(p) = &self.problem {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "problem".to_string())
        } else {
            format!(
                "{}-seed{}",
                self.generator.as_deref().unwrap_or("gen"),
                self.seed
            )
        }
    }

    fn generator_spec(&self) -> Result<GeneratorSpec> {
        let kind = GeneratorKind::parse(self.generator.as_deref().unwrap_or_default())?;
        if self.dims.is_empty() {
            bail!("--dims is required with --generator");
        }
        let ranks = if self.ranks.is_empty() {
            match kind {
                GeneratorKind::NoisyDiagonal => {
                    vec![*self.dims.iter().min().expect("nonempty dims")]
                }
                GeneratorKind::RandomDense => self.dims.clone(),
            }
        } else {
            self.ranks.clone()
        };
        Ok(GeneratorSpec {
            kind,
            dims: self.dims.clone(),
            ranks,
            count: self.l,
            noise: self.noise,
            complex_data: self.complex,
            common_factor: self.common_factor,
            symmetrize_noise: self.symmetrize,
            family: Family::parse(&self.family)?,
            dagger: Dagger::parse(&self.dagger)?,
            seed: self.seed,
        })
    }

    fn load(&self) -> Result<ProblemSpec> {
        if self.example_7_1 {
            Ok(example_7_1_spec())
        } else if let Some(path) = &self.problem {
            io::read_problem(path).with_context(|| format!("reading {}", path.display()))
        } else if self.generator.is_some() {
            Ok(gen_instance(&self.generator_spec()?)?)
        } else {
            bail!("one of --problem, --generator, --example-7-1 is required");
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// jacobi-g | jacobi-mg | jacobi-mc | jacobi-gp | jacobi-mgp | baseline-rsd
    #[arg(long)]
    solver: String,
    /// Pair-selection constant (defaults to the family bound − 1e-15).
    #[arg(long)]
    delta: Option<f64>,
    /// Proximal weight for jacobi-gp / jacobi-mgp.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long = "grad-tol", default_value_t = 1e-5)]
    grad_tol: f64,
    #[arg(long = "max-iter", default_value_t = 1000)]
    max_iter: usize,
    /// Start from a seeded Haar-random tuple instead of identities.
    #[arg(long)]
    random_init: bool,
    /// Output directory for the CSV log and JSON summary.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// quadform-fidelity | gamma-decompositions | gradients | descent |
    /// pair-selection | stationarity | proximal | structure |
    /// synthetic-recovery | example-7-1 | baseline | all
    suite: String,
    #[arg(long, default_value_t = 20260810)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// Output directory.
    #[arg(long, default_value = "instances")]
    out: PathBuf,
    /// Base name of the written files.
    #[arg(long, default_value = "instance")]
    name: String,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Verify(args) => run_verify(args),
        Command::Gen(args) => run_gen(args),
    };
    match code {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run_solve(args: SolveArgs) -> Result<i32> {
    let alg = Algorithm::parse(&args.solver)?;
    let spec = args.source.load()?;
    let epsilon = match alg {
        Algorithm::JacobiGp | Algorithm::JacobiMgp => args.epsilon,
        _ => 0.0,
    };
    let config = SolverConfig {
        delta: args.delta,
        epsilon,
        grad_tol: args.grad_tol,
        max_iter: args.max_iter,
        pair_strategy: match alg {
            Algorithm::JacobiMc => PairStrategy::Cyclic,
            _ => PairStrategy::GradientBased,
        },
        seed: args.source.seed,
        random_init: args.random_init,
    };
    let start = Instant::now();
    let result = solve(&spec, &config, alg)?;
    let wall = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&args.out)?;
    let base = format!("{}_{}", args.source.label(), alg.as_str());
    let log_path = args.out.join(format!("{base}.csv"));
    io::write_iteration_log(&log_path, &result.records)?;
    let summary = io::summarize(&spec, &result, alg.as_str(), wall)?;
    let summary_path = args.out.join(format!("{base}.summary.json"));
    io::write_summary(&summary_path, &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    eprintln!("log: {}", log_path.display());
    eprintln!("summary: {}", summary_path.display());
    Ok(0)
}

fn run_verify(args: VerifyArgs) -> Result<i32> {
    let suites: Vec<&str> = if args.suite == "all" {
        checks::SUITES.to_vec()
    } else {
        vec![args.suite.as_str()]
    };
    let mut failed = false;
    for name in suites {
        let report = checks::run_suite(name, args.seed)?;
        println!("{}", report.summary_line());
        for f in report.failures.iter().take(20) {
            println!("    {f}");
        }
        failed |= !report.passed();
    }
    Ok(if failed { 1 } else { 0 })
}

fn run_gen(args: GenArgs) -> Result<i32> {
    if args.source.generator.is_none() {
        bail!("gen requires --generator");
    }
    let spec = gen_instance(&args.source.generator_spec()?)?;
    let path = io::write_problem(&args.out, &args.name, &spec)?;
    println!("{}", path.display());
    Ok(0)
}
