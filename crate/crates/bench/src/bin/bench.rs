use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cpdeflate::io::{read_tensor, AnyTensor};
use cpdeflate::rank1::{ce_refine, seroap, thosvd, BestRank1Oracle, Rank1Term, DEFAULT_CE_MAX_ITER, DEFAULT_CE_TOL};
use cpdeflate::{Scalar, Tensor};
use cpdeflate_bench::config::parse_shape;
use cpdeflate_bench::{complexity_estimate, configure_threads, run, write_outputs, Experiment, ExperimentConfig};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bench", version, about = "Rank-1 approximation and CP decomposition experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// THOSVD vs SeROAP residual gap.
    Fig2(RunArgs),
    /// Rank-1 MSE against the reference oracle.
    Tables(RunArgs),
    /// Success rate on exact low-rank tensors.
    Fig3(RunArgs),
    /// Mean residual per iteration under noise.
    Fig4(RunArgs),
    /// Mean final residual under rank variation.
    Fig5(RunArgs),
    /// Monte-Carlo residual-chain probability.
    Conjecture(RunArgs),
    /// Per-iteration operation count of a solver.
    Flops {
        #[arg(long)]
        algorithm: String,
        /// Dimensions, e.g. `10x10x10` or `10,10,10`.
        #[arg(long)]
        dims: String,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Rank-1 approximation of a tensor file.
    Rank1 {
        #[arg(long)]
        tensor: PathBuf,
        /// thosvd, seroap, ce or oracle.
        #[arg(long, default_value = "seroap")]
        method: String,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Use the original study's trial counts.
    #[arg(long)]
    paper_scale: bool,
    /// Output directory (default `results/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve(experiment: Experiment, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text, Some(experiment))?
        }
        None => ExperimentConfig::defaults(experiment),
    };
    if args.paper_scale {
        cfg = cfg.paper_scale();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_experiment(experiment: Experiment, args: &RunArgs) -> Result<()> {
    let cfg = resolve(experiment, args)?;
    let rows = run(&cfg)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("results").join(experiment.name()));
    write_outputs(&out, &cfg, &rows)?;
    for r in rows.iter().filter(|r| r.step.is_none()) {
        println!(
            "{:<8} {:<9} {:<5} {:<6} {:<14} {:<22} {:.6e}",
            r.experiment, r.shape, r.rank, r.snr_db, r.algorithm, r.statistic, r.value
        );
    }
    let failures = rows.iter().filter(|r| r.status != "ok").count();
    if failures > 0 {
        eprintln!("{failures} failed trial(s), see results.csv");
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn rank1_report<S: Scalar>(t: &Tensor<S>, method: &str) -> Result<serde_json::Value> {
    let term: Rank1Term<S> = match method {
        "thosvd" => thosvd(t)?,
        "seroap" => seroap(t)?,
        "ce" => ce_refine(t, &seroap(t)?, DEFAULT_CE_MAX_ITER, DEFAULT_CE_TOL)?.0,
        "oracle" => BestRank1Oracle::new(32, 0).approximate_tensor(t, None)?,
        other => bail!("unknown rank-1 method `{other}`"),
    };
    let lambda = term.lambda.to_c64();
    let residual = term.residual(t)?;
    Ok(json!({
        "method": method,
        "shape": t.shape(),
        "lambda": [lambda.re, lambda.im],
        "residual": residual,
        "relative_residual": residual / t.norm(),
    }))
}

fn main() -> Result<()> {
    configure_threads();
    let cli = Cli::parse();
    let experiment = match &cli.command {
        Command::Fig2(a) => Some((Experiment::Fig2, a)),
        Command::Tables(a) => Some((Experiment::Tables, a)),
        Command::Fig3(a) => Some((Experiment::Fig3, a)),
        Command::Fig4(a) => Some((Experiment::Fig4, a)),
        Command::Fig5(a) => Some((Experiment::Fig5, a)),
        Command::Conjecture(a) => Some((Experiment::Conjecture, a)),
        _ => None,
    };
    if let Some((e, args)) = experiment {
        return run_experiment(e, args);
    }
    match cli.command {
        Command::Flops { algorithm, dims, rank, k } => {
            let dims = parse_shape(&dims.replace(',', "x"))?;
            let est = complexity_estimate(algorithm.parse()?, &dims, rank, k)?;
            println!("{}", serde_json::to_string_pretty(&est)?);
        }
        Command::Rank1 { tensor, method } => {
            let report = match read_tensor(&tensor)? {
                AnyTensor::Real(t) => rank1_report(&t, &method)?,
                AnyTensor::Complex(t) => rank1_report(&t, &method)?,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        _ => unreachable!("experiments handled above"),
    }
    Ok(())
}
