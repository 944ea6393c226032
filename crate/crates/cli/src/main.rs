//! `hhdim`: dimensions, classification and certificates for linear systems of
//! plane curves with general multiple points.
//!
//! Exit codes: 0 on success, 1 when a verdict is Unknown or a check fails,
//! 2 on malformed input.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use settings::{FileConfig, Settings};

#[derive(Parser, Debug)]
#[command(name = "hhdim", version, about = "Dimensions of linear systems L(d, m0, m^n) of plane curves")]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
pub struct Globals {
    /// Prime for the interpolation oracle [default: 32003]
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// Seed of the point sampler [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random point sets tried by the oracle [default: 3]
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Node budget of the recursive prover [default: 20000]
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Emit one JSON document instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for sweeps
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML file with any of prime, seed, trials, budget, jobs; flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dimension by splitting, reduction, degenerations and the oracle
    Dim {
        system: String,
        /// Write the full verdict tree as JSON
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Virtual and expected dimension
    Vdim { system: String },
    /// (-1)-speciality with the splitting witness
    Classify { system: String },
    /// Classification and exception tables
    Table {
        #[command(subcommand)]
        command: TableCommand,
    },
    /// Apply moves (`i,j,k` quadratic, `i,j` line) or reduce to standard form when none are given
    Cremona { system: String, moves: Vec<String> },
    /// The four systems of a (k,b)-degeneration
    Degen {
        system: String,
        #[arg(short, long)]
        k: i64,
        #[arg(short, long)]
        b: usize,
        /// Also try to prove emptiness or non-speciality through this degeneration
        #[arg(long)]
        prove: bool,
    },
    /// Dimension read off the interpolation matrix over F_p
    Oracle { system: String },
    /// Replay a certificate written by `dim --certificate`
    CheckCertificate {
        file: PathBuf,
        /// Recompute oracle leaves instead of trusting their readings
        #[arg(long)]
        rerun_oracle: bool,
    },
}

#[derive(Subcommand, Debug)]
enum TableCommand {
    /// Print the classification of (-1)-special systems L(d,m0,6^n)
    Generate {
        #[arg(long, default_value_t = 4)]
        e_max: i64,
        /// Derive the table by search instead of printing the published one
        #[arg(long)]
        search: bool,
    },
    /// Check a table against the formula, the splitting prediction or the oracle
    Verify {
        #[arg(long, value_enum, default_value_t = Mode::Formula)]
        mode: Mode,
        #[arg(long, default_value_t = 26)]
        max_degree: i64,
        #[arg(long, default_value_t = 12)]
        max_points: usize,
        /// CSV to check instead of the published table
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        e_max: i64,
    },
    /// The low-degree exception list
    Section7 {
        /// Run the prover on every entry and compare verdicts
        #[arg(long)]
        check: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Formula,
    Hh,
    Oracle,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.globals.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let s = Settings::merge(&cli.globals, file);
    if let Some(jobs) = s.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Dim { system, certificate } => commands::dim(&s, &system, certificate.as_deref()),
        Command::Vdim { system } => commands::vdim(&s, &system),
        Command::Classify { system } => commands::classify(&s, &system),
        Command::Table { command } => match command {
            TableCommand::Generate { e_max, search } => commands::table_generate(&s, e_max, search),
            TableCommand::Verify { mode, max_degree, max_points, input, e_max } => {
                let mode = match mode {
                    Mode::Formula => hhdim::tables::VerifyMode::Formula,
                    Mode::Hh => hhdim::tables::VerifyMode::Hh,
                    Mode::Oracle => hhdim::tables::VerifyMode::Oracle,
                };
                commands::table_verify(&s, mode, max_degree, max_points, input.as_deref(), e_max)
            }
            TableCommand::Section7 { check } => commands::section7(&s, check),
        },
        Command::Cremona { system, moves } => commands::cremona(&s, &system, &moves),
        Command::Degen { system, k, b, prove } => commands::degen(&s, &system, k, b, prove),
        Command::Oracle { system } => commands::oracle(&s, &system),
        Command::CheckCertificate { file, rerun_oracle } => commands::check_certificate(&s, &file, rerun_oracle),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
