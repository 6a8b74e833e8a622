use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use distcomp::cli::{self, Command, ExperimentConfig};
use distcomp::fidelity::FidelityMode;
use distcomp::{Error, Result};

/// Experiments on compressing sources of probability distributions.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Overrides the config's command.
    command: Option<Command>,
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV and JSON files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, conflicts_with = "monte_carlo")]
    exact: bool,
    /// Sample inputs for fidelity measurement instead of enumerating them.
    #[arg(long)]
    monte_carlo: bool,
    /// `KEY=VALUE`, repeatable.
    #[arg(long = "cap-override", value_name = "KEY=VALUE")]
    cap_override: Vec<String>,
    /// Channel preset such as `bsc:0.25`.
    #[arg(long)]
    preset: Option<String>,
    /// Instance JSON with `source` and `channel`.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

fn resolve(args: &Args) -> Result<ExperimentConfig> {
    let mut c = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(cmd) = args.command {
        c.command = cmd;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(o) = &args.out {
        c.out = Some(o.clone());
    }
    if args.exact {
        c.fidelity = FidelityMode::Exact;
    }
    if args.monte_carlo {
        c.fidelity = FidelityMode::MonteCarlo { samples: c.samples, seed: c.seed };
    }
    for kv in &args.cap_override {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("cap override '{kv}' is not KEY=VALUE")))?;
        c.caps.set(k.trim(), v.trim())?;
    }
    if let Some(p) = &args.preset {
        c.preset = Some(p.clone());
    }
    if let Some(i) = &args.instance {
        c.instance = Some(i.clone());
    }
    if let Some(n) = args.n {
        c.n = n;
    }
    if let Some(d) = args.delta {
        c.delta = d;
    }
    if let Some(e) = args.epsilon {
        c.epsilon = e;
    }
    Ok(c)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = (|| -> Result<()> {
        if let Some(w) = args.workers {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global()
                .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
        }
        let config = resolve(&args)?;
        let record = cli::run(&config)?;
        if let Some(dir) = &config.out {
            cli::write_outputs(&record, dir)?;
        }
        print!("{}", cli::summary(&record));
        Ok(())
    })();
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error {}: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
