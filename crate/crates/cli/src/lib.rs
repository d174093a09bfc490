//! Batch driver: sample instances, build and verify pseudo-solutions, and measure gaps.
//!
//! Every `(n, seed)` gets a directory `OUT/n{n}/seed{seed}/`; the root holds `summary.csv`
//! and `manifest.json`. See the README for the file formats.

pub mod config;
pub mod pipeline;

use clap::{Args, Parser, Subcommand};
use config::ExperimentConfig;
use pipeline::{run_all, summary_csv, write_atomic, Stage, ALL_STAGES};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Parser, Debug)]
#[command(name = "sagap", version, about = "Sherali-Adams pseudo-solutions on random hypergraphs")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Runs processed at once.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long = "seed-base", global = true)]
    pub seed_base: Option<u64>,
    #[arg(long = "seed-count", global = true)]
    pub seed_count: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Input {
    /// Output root of an earlier run to read from; defaults to `--out`.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample instances and scan them for dense witnesses.
    Sample,
    /// Build the pseudo-solution table.
    Solve(Input),
    /// Check the lifted constraints.
    Verify(Input),
    /// Compare the certified value with the integral optimum.
    Gap(Input),
    /// Monte Carlo concentration of the polynomial `F`.
    Concentrate,
    /// Pseudo-calibrated moments against the table's largest term.
    Pseudocal(Input),
    /// Every stage in order.
    All,
}

impl Command {
    fn stages(&self) -> Vec<Stage> {
        match self {
            Command::Sample => vec![Stage::Sample],
            Command::Solve(_) => vec![Stage::Solve],
            Command::Verify(_) => vec![Stage::Verify],
            Command::Gap(_) => vec![Stage::Gap],
            Command::Concentrate => vec![Stage::Concentrate],
            Command::Pseudocal(_) => vec![Stage::Pseudocal],
            Command::All => ALL_STAGES.to_vec(),
        }
    }

    fn input(&self) -> Option<PathBuf> {
        match self {
            Command::Solve(i) | Command::Verify(i) | Command::Gap(i) | Command::Pseudocal(i) => i.input.clone(),
            _ => None,
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
///
/// 0 on success, 1 if any run found a feasibility violation or hit an internal error,
/// 2 on a usage or configuration error. Violations on instances holding a dense witness
/// (`y_empty > 1`) are reported but do not change the code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return 2;
            }
        },
        None => String::new(),
    };
    let mut cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if cli.seed_base.is_some() || cli.seed_count.is_some() {
        cfg.set_seed_range(cli.seed_base, cli.seed_count);
    }
    let out = cli.out.clone().or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let input = cli.command.input().unwrap_or_else(|| out.clone());
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    let stages = cli.command.stages();
    let outcomes = pool.install(|| run_all(&cfg, &stages, &input, &out));

    let mut code = 0;
    for o in &outcomes {
        if !o.fatal.is_empty() || o.violation {
            code = 1;
        }
        if o.violation {
            eprintln!("n={} seed={}: constraint violations, see constraints.json", o.n, o.seed);
        }
        if o.witness_violation {
            eprintln!("n={} seed={}: constraint violations on a witness instance (y_empty > 1)", o.n, o.seed);
        }
    }
    if let Err(e) = write_atomic(&out.join("summary.csv"), summary_csv(&cfg, &out).as_bytes()) {
        eprintln!("error: summary.csv: {e}");
        code = 1;
    }
    let canonical = cfg.canonical();
    let manifest = json!({
        "tool": "sagap",
        "version": env!("CARGO_PKG_VERSION"),
        "command": stages.iter().map(|s| s.name()).collect::<Vec<_>>(),
        "configHash": format!("{:x}", Sha256::digest(canonical.as_bytes())),
        "config": canonical.lines().collect::<Vec<_>>(),
        "runs": outcomes.len(),
        "failedRuns": outcomes.iter().filter(|o| !o.fatal.is_empty()).count(),
        "violatingRuns": outcomes.iter().filter(|o| o.violation).count(),
        "witnessViolatingRuns": outcomes.iter().filter(|o| o.witness_violation).count(),
        "notes": outcomes.iter().flat_map(|o| o.notes.iter().map(move |m| format!("n={} seed={}: {m}", o.n, o.seed))).collect::<Vec<_>>(),
        "timestamp": SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    });
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    body.push('\n');
    if let Err(e) = write_atomic(&out.join("manifest.json"), body.as_bytes()) {
        eprintln!("error: manifest.json: {e}");
        code = 1;
    }
    let done = outcomes.iter().filter(|o| o.fatal.is_empty()).count();
    eprintln!("{done}/{} runs completed; results in {}", outcomes.len(), out.display());
    code
}
