use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qrnn_forge::experiment::{load_config, run_command, Command};

#[derive(Parser)]
#[command(
    name = "qrnn-forge",
    version,
    about = "Train and analyze quantum recurrent neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one model per seed; record curves, checkpoints and test MSE.
    Train(Common),
    /// Train the None, MinMax and MaxMin preprocessing variants.
    AblatePreprocessing(Common),
    /// Exact amplitude encoding versus EnQode, noiseless and noisy.
    CompareEncoding(Common),
    /// Transpiled depth and EnQode fidelity versus feature-register size.
    DepthScan(Common),
}

#[derive(clap::Args)]
struct Common {
    /// JSON config; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated training seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Exact output distributions instead of sampled shots.
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    /// Shots per circuit evaluation.
    #[arg(long)]
    shots: Option<usize>,
    /// Override a config field by dotted path, e.g. `training.epochs=20`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut o = self.set.clone();
        if let Some(seeds) = &self.seeds {
            o.push(format!("training.seeds={seeds:?}"));
        }
        if self.exact {
            o.push("training.execution=\"exact\"".into());
        }
        if let Some(n) = self.shots {
            o.push(format!("training.execution={{\"shots\":{n}}}"));
        }
        o
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("QRNN_FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("QRNN_FORGE_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Cmd::Train(a) => (Command::Train, a),
        Cmd::AblatePreprocessing(a) => (Command::AblatePreprocessing, a),
        Cmd::CompareEncoding(a) => (Command::CompareEncoding, a),
        Cmd::DepthScan(a) => (Command::DepthScan, a),
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cfg = match load_config(args.config.as_deref(), &args.overrides()).and_then(|c| {
        cmd.check(&c)?;
        Ok(c)
    }) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(cmd.name()));
    log::info!("{} -> {}", cmd.name(), out.display());
    match run_command(cmd, &cfg, &out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
