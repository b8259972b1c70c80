//! `tensormp`: batch front end for the tensor-product ensemble experiments.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid configuration,
//! 3 numerical non-convergence.

mod commands;
mod config;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{parse_model, Config, ConfigError, MomentsConfig, Overrides};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "tensormp", version, about = "Tensor-product sample covariance experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pooled empirical spectral distribution against the limiting law.
    Esd(RunArgs),
    /// Fluctuations of linear eigenvalue statistics.
    Clt(RunArgs),
    /// Variance of bilinear forms (HY, Y) for a fixed H.
    Bilinear(RunArgs),
    /// Covariance of resolvent traces.
    Cov(RunArgs),
    /// Solve the fixed-point equation on a z grid, optionally with the density.
    MpSolve(RunArgs),
    /// Limiting variances and trace covariances.
    PredictVariance(RunArgs),
    /// Analytic and empirical moment constants of a vector model.
    Moments(MomentsArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the master seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's `out`, else ./tensormp-out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the replicate count of the configuration.
    #[arg(long)]
    replicates: Option<usize>,
    /// Worker threads; 0 uses every core. Never changes outputs.
    #[arg(long, env = "TENSORMP_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Model name (gaussian, rademacher, uniform-sym, student-like-bounded,
    /// sphere, lp:<p>) or a JSON object.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Monte Carlo draws.
    #[arg(long, default_value_t = 200_000)]
    reps: usize,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Esd(_) => "esd",
            Command::Clt(_) => "clt",
            Command::Bilinear(_) => "bilinear",
            Command::Cov(_) => "cov",
            Command::MpSolve(_) => "mp-solve",
            Command::PredictVariance(_) => "predict-variance",
            Command::Moments(_) => "moments",
        }
    }

    fn run_args(&self) -> &RunArgs {
        match self {
            Command::Esd(a)
            | Command::Clt(a)
            | Command::Bilinear(a)
            | Command::Cov(a)
            | Command::MpSolve(a)
            | Command::PredictVariance(a) => a,
            Command::Moments(m) => &m.run,
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// The configuration and the bytes it was read from.
fn load(command: &Command) -> Result<(Config, Vec<u8>)> {
    let args = command.run_args();
    if let Some(path) = &args.config {
        let bytes = std::fs::read(path).map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| ConfigError("config is not UTF-8".into()))?;
        return Ok((Config::parse(&text)?, bytes));
    }
    match command {
        Command::Moments(m) => {
            let model = m
                .model
                .as_deref()
                .ok_or_else(|| ConfigError("missing --model (or --config)".into()))?;
            let n = m.n.ok_or_else(|| ConfigError("missing --n (or --config)".into()))?;
            let cfg = Config::Moments(MomentsConfig {
                model: parse_model(model)?,
                n,
                reps: m.reps,
                master_seed: 0,
                out: None,
            });
            let bytes = serde_json::to_vec(&cfg)?;
            Ok((cfg, bytes))
        }
        _ => Err(ConfigError(format!("missing --config for `{}`", command.name())).into()),
    }
}

fn run(cli: Cli) -> Result<String> {
    let (mut cfg, raw) = load(&cli.command)?;
    if cfg.experiment() != cli.command.name() {
        return Err(ConfigError(format!(
            "config is for `{}` but the subcommand is `{}`",
            cfg.experiment(),
            cli.command.name()
        ))
        .into());
    }
    let args = cli.command.run_args().clone();
    let overrides = Overrides {
        seed: args.seed,
        replicates: args.replicates,
    };
    cfg.apply(&overrides);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("tensormp-out").join(cfg.experiment()));

    let (mut summary, files) = tensormp::montecarlo::with_threads(args.threads, || commands::run(&cfg, &out))??;

    let manifest = json!({
        "tool": "tensormp",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment(),
        "config_sha256": hex(&Sha256::digest(&raw)),
        "seed": cfg.seed(),
        "overrides": {"seed": args.seed, "replicates": args.replicates},
        "effective_config": cfg,
        "files": files,
    });
    tensormp::montecarlo::write_json(&out.join("manifest.json"), &manifest).context("writing manifest")?;
    summary["out"] = json!(out);
    Ok(serde_json::to_string(&summary)?)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<tensormp::Error>() {
            return match e {
                e if e.is_numerical() => 3,
                tensormp::Error::Io(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
