use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::fidelity::FidelityMode;
use crate::prob::{Channel, Distribution};
use crate::zero_error::SizeBound;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[default]
    Info,
    Typical,
    Cover,
    Simulate,
    Derandomize,
    ZeroError,
    Rd,
    Dilute,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Info => "info",
            Command::Typical => "typical",
            Command::Cover => "cover",
            Command::Simulate => "simulate",
            Command::Derandomize => "derandomize",
            Command::ZeroError => "zero-error",
            Command::Rd => "rd",
            Command::Dilute => "dilute",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// One of `simulate`, `derandomize`, `typical`.
    pub command: Command,
    pub n_from: usize,
    pub n_to: usize,
    /// Exact per-word fidelity at every point (the expensive part).
    pub strong_fidelity: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { command: Command::Simulate, n_from: 4, n_to: 8, strong_fidelity: true }
    }
}

/// One run. Every field has a default, so `{}` is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    /// JSON file with `source` and `channel`.
    pub instance: Option<PathBuf>,
    /// `bsc:<p>`, `bec:<p>` or `identity:<k>`, with a uniform source.
    pub preset: Option<String>,
    pub source: Option<Vec<f64>>,
    pub channel: Option<Vec<Vec<f64>>>,
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub max_retries: u32,
    pub fidelity: FidelityMode,
    pub caps: Caps,
    pub out: Option<PathBuf>,
    /// Extra block lengths and deltas for `typical`.
    pub ns: Vec<usize>,
    pub deltas: Vec<f64>,
    /// Number of protocol transcripts to sample in `simulate`.
    pub transcripts: usize,
    pub save_code: bool,
    pub c_max: Option<usize>,
    pub size_bound: SizeBound,
    pub restarts: usize,
    pub max_iters: usize,
    pub oracle_resolution: Option<usize>,
    pub oracle_refinements: usize,
    /// Also solve the two-letter product instance.
    pub pairs: bool,
    /// Distortion matrix; Hamming when absent.
    pub distortion: Option<Vec<Vec<f64>>>,
    pub targets: Vec<f64>,
    pub rd_code_n: Option<usize>,
    /// Dilution target; the source when absent.
    pub target: Option<Vec<f64>>,
    pub samples: usize,
    pub sweep: SweepSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: Command::Info,
            instance: None,
            preset: None,
            source: None,
            channel: None,
            n: 4,
            delta: 2.0,
            epsilon: 0.1,
            seed: 0,
            max_retries: 20,
            fidelity: FidelityMode::Exact,
            caps: Caps::default(),
            out: None,
            ns: Vec::new(),
            deltas: Vec::new(),
            transcripts: 0,
            save_code: false,
            c_max: None,
            size_bound: SizeBound::Full,
            restarts: 20,
            max_iters: 100,
            oracle_resolution: None,
            oracle_refinements: 6,
            pairs: false,
            distortion: None,
            targets: vec![0.05, 0.1, 0.25],
            rd_code_n: None,
            target: None,
            samples: 10_000,
            sweep: SweepSpec::default(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    source: Vec<f64>,
    channel: Vec<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// SHA-256 of the canonical JSON of the resolved config, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        // where results go does not change them
        c.out = None;
        let digest = Sha256::digest(serde_json::to_vec(&c)?);
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn resolve_instance(&self) -> Result<(Distribution, Channel)> {
        let (mut source, channel) = if let Some(path) = &self.instance {
            let f: InstanceFile = serde_json::from_str(&fs::read_to_string(path)?)?;
            (Some(f.source), Channel::new(f.channel)?)
        } else if let Some(rows) = &self.channel {
            (None, Channel::new(rows.clone())?)
        } else {
            (None, preset(self.preset.as_deref().unwrap_or("bsc:0.25"))?)
        };
        if let Some(s) = &self.source {
            source = Some(s.clone());
        }
        let source = match source {
            Some(s) => Distribution::new(s)?,
            None => Distribution::uniform(channel.input_size())?,
        };
        Ok((source, channel))
    }
}

pub fn preset(spec: &str) -> Result<Channel> {
    let bad = || Error::InvalidInput(format!("unknown preset '{spec}' (expected bsc:<p>, bec:<p> or identity:<k>)"));
    let (name, arg) = spec.split_once(':').ok_or_else(bad)?;
    match name {
        "bsc" => Channel::bsc(arg.parse().map_err(|_| bad())?),
        "bec" => {
            let e: f64 = arg.parse().map_err(|_| bad())?;
            Channel::new(vec![vec![1.0 - e, 0.0, e], vec![0.0, 1.0 - e, e]])
        }
        "identity" => Channel::identity(arg.parse().map_err(|_| bad())?),
        _ => Err(bad()),
    }
}
