use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

use hhdim::degeneration::{OracleConfig, ProverConfig};
use hhdim::oracle::{DEFAULT_PRIME, DEFAULT_TRIALS};

/// Values read from `--config`; every key is optional and flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub prime: Option<u64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub budget: Option<usize>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Effective run settings after merging flags, config file and defaults.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Settings {
    pub prime: u64,
    pub seed: u64,
    pub trials: usize,
    /// Node budget of the recursive prover.
    pub budget: usize,
    pub jobs: Option<usize>,
    pub json: bool,
}

impl Settings {
    pub fn merge(flags: &crate::Globals, file: FileConfig) -> Self {
        Self {
            prime: flags.prime.or(file.prime).unwrap_or(DEFAULT_PRIME),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            trials: flags.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            budget: flags.budget.or(file.budget).unwrap_or(ProverConfig::default().max_nodes),
            jobs: flags.jobs.or(file.jobs),
            json: flags.json,
        }
    }

    pub fn prover(&self) -> ProverConfig {
        let oracle = OracleConfig { prime: self.prime, seed: self.seed, trials: self.trials, ..OracleConfig::default() };
        ProverConfig { oracle: Some(oracle), max_nodes: self.budget, ..ProverConfig::default() }
    }
}
