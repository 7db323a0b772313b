use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tensor_fourier::bench::{run_experiment, Experiment, ExperimentConfig};
use tensor_fourier::Error;

#[derive(Parser)]
#[command(name = "tensor-fourier", version, about = "Tensor-train Fourier option pricing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price a single model with one method.
    Price(Common),
    /// Direct integration vs Fourier errors for a single asset over N.
    SweepSingle(Common),
    /// Tensor-train runtime and accuracy across dimensions.
    Table1(Common),
    /// Truncation error against the characteristic-function bond dimension.
    BondSweep(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML or JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(experiment: Experiment, args: Common) -> Result<PathBuf, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path).map_err(|e| Error::Config {
            field: "--config".into(),
            message: format!("{}: {e}", path.display()),
        })?)?,
        None => ExperimentConfig::new(experiment),
    };
    match cfg.experiment {
        None => cfg.experiment = Some(experiment),
        Some(e) if e != experiment => {
            return Err(Error::Config {
                field: "experiment".into(),
                message: format!("config is for `{}`, command runs `{}`", e.as_str(), experiment.as_str()),
            })
        }
        Some(_) => {}
    }
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config {
                field: "--threads".into(),
                message: e.to_string(),
            })?;
    }
    let out = args
        .out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    run_experiment(&cfg, &out)?;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Price(a) => (Experiment::PriceOnce, a),
        Command::SweepSingle(a) => (Experiment::SingleAssetSweep, a),
        Command::Table1(a) => (Experiment::Table1, a),
        Command::BondSweep(a) => (Experiment::BondDimSweep, a),
    };
    match run(experiment, args) {
        Ok(out) => {
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
