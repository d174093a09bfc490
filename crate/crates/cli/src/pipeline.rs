//! Per-seed stages and the files they exchange.

use crate::config::{ExperimentConfig, ModeChoice};
use rayon::prelude::*;
use sagap_core::conc::mc_concentration;
use sagap_core::hgraph::{sample_gnp, substream, witness_scan};
use sagap_core::lift::{verify_all, ConstraintReport, Mode};
use sagap_core::pseudocal::{compare_all, PcParams, CSV_HEADER, SET_LIMIT};
use sagap_core::rational::{approximate, fmt_rational, int};
use sagap_core::relax::gap_report_at;
use sagap_core::solution::{build_table, PseudoSolution};
use sagap_core::{Error, Hypergraph, Rational, VertexSet};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Sample,
    Solve,
    Verify,
    Gap,
    Concentrate,
    Pseudocal,
}

pub const ALL_STAGES: [Stage; 6] = [Stage::Sample, Stage::Solve, Stage::Verify, Stage::Gap, Stage::Concentrate, Stage::Pseudocal];

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Sample => "sample",
            Stage::Solve => "solve",
            Stage::Verify => "verify",
            Stage::Gap => "gap",
            Stage::Concentrate => "concentrate",
            Stage::Pseudocal => "pseudocal",
        }
    }

    pub fn outputs(&self) -> &'static [&'static str] {
        match self {
            Stage::Sample => &["instance.hgr", "witness.json"],
            Stage::Solve => &["solution.txt"],
            Stage::Verify => &["constraints.json"],
            Stage::Gap => &["gap.json"],
            Stage::Concentrate => &["concentration.json", "f_values.csv"],
            Stage::Pseudocal => &["pseudocal.csv", "pseudocal.json"],
        }
    }

    /// Stages whose output this one reads.
    fn needs(&self) -> &'static [Stage] {
        match self {
            Stage::Sample | Stage::Concentrate => &[],
            Stage::Solve | Stage::Pseudocal => &[Stage::Sample],
            Stage::Verify => &[Stage::Sample, Stage::Solve],
            Stage::Gap => &[Stage::Sample, Stage::Solve, Stage::Verify],
        }
    }
}

/// Seed for one stage of one run: independent of which other stages exist.
pub fn stage_seed(seed: u64, stage: Stage) -> u64 {
    let digest = Sha256::digest(stage.name().as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    substream(seed, u64::from_le_bytes(head))
}

pub fn seed_dir(root: &Path, n: usize, seed: u64) -> PathBuf {
    root.join(format!("n{n}")).join(format!("seed{seed}"))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

#[derive(Debug)]
pub enum StageError {
    Core(Error),
    Io(String),
    /// A stage this one reads from failed earlier in the same run.
    Skipped(Stage),
}

impl StageError {
    /// Capacity limits and degenerate instances are recorded without failing the run.
    pub fn is_fatal(&self) -> bool {
        match self {
            StageError::Core(e) => !matches!(e, Error::Capacity(_) | Error::DegenerateGap(_) | Error::Infeasible(_) | Error::DegenerateParams(_)),
            StageError::Io(_) => true,
            StageError::Skipped(_) => false,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            StageError::Core(Error::Parameter(_)) => "parameter",
            StageError::Core(Error::Capacity(_)) => "capacity",
            StageError::Core(Error::Contract(_)) => "contract",
            StageError::Core(Error::DegenerateParams(_)) => "degenerateParams",
            StageError::Core(Error::DegenerateGap(_)) => "degenerateGap",
            StageError::Core(Error::Infeasible(_)) => "infeasible",
            StageError::Core(Error::Parse { .. }) => "parse",
            StageError::Io(_) => "io",
            StageError::Skipped(_) => "skipped",
        }
    }

    fn message(&self) -> String {
        match self {
            StageError::Core(e) => e.to_string(),
            StageError::Io(m) => m.clone(),
            StageError::Skipped(s) => format!("{} failed", s.name()),
        }
    }
}

impl From<Error> for StageError {
    fn from(e: Error) -> Self {
        StageError::Core(e)
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> StageError + '_ {
    move |e| StageError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub n: usize,
    pub seed: u64,
    /// Nonfatal stage failures.
    pub notes: Vec<String>,
    pub fatal: Vec<String>,
    /// The constraint report found violations on an instance without a dense witness.
    pub violation: bool,
    /// Violations on an instance whose table has `y_empty > 1`; expected, so only reported.
    pub witness_violation: bool,
}

struct Task<'a> {
    cfg: &'a ExperimentConfig,
    n: usize,
    seed: u64,
    input: PathBuf,
    output: PathBuf,
    graph: Option<Hypergraph>,
    sol: Option<PseudoSolution>,
    report: Option<ConstraintReport>,
    failed: Vec<Stage>,
}

impl Task<'_> {
    fn read(&self, file: &str) -> Result<String, StageError> {
        // Files written earlier in this run live in the output directory.
        let fresh = self.output.join(file);
        let path = if fresh.exists() { fresh } else { self.input.join(file) };
        fs::read_to_string(&path).map_err(io_err(&path))
    }

    fn write(&self, file: &str, contents: &str) -> Result<(), StageError> {
        let path = self.output.join(file);
        write_atomic(&path, contents.as_bytes()).map_err(io_err(&path))
    }

    fn graph(&mut self) -> Result<&Hypergraph, StageError> {
        if self.graph.is_none() {
            self.graph = Some(Hypergraph::from_hgr(&self.read("instance.hgr")?)?);
        }
        Ok(self.graph.as_ref().expect("loaded"))
    }

    fn solution(&mut self) -> Result<&PseudoSolution, StageError> {
        if self.sol.is_none() {
            self.sol = Some(PseudoSolution::from_text(&self.read("solution.txt")?)?);
        }
        Ok(self.sol.as_ref().expect("loaded"))
    }

    fn report(&mut self) -> Result<&ConstraintReport, StageError> {
        if self.report.is_none() {
            let text = self.read("constraints.json")?;
            let report = serde_json::from_str(&text).map_err(|e| StageError::Io(format!("constraints.json: {e}")))?;
            self.report = Some(report);
        }
        Ok(self.report.as_ref().expect("loaded"))
    }

    fn run(&mut self, stage: Stage) -> Result<(), StageError> {
        if let Some(&dep) = stage.needs().iter().find(|d| self.failed.contains(d)) {
            return Err(StageError::Skipped(dep));
        }
        // Stale outputs of an earlier run must not survive a failure.
        for file in stage.outputs() {
            let _ = fs::remove_file(self.output.join(file));
        }
        let cfg = self.cfg;
        let (n, seed) = (self.n, self.seed);
        match stage {
            Stage::Sample => {
                let params = cfg.params(n)?;
                let g = sample_gnp(n, cfg.c, params.prob(), stage_seed(seed, stage))?;
                let threshold = cfg.witness_threshold.unwrap_or_else(|| default_witness_threshold(n, cfg.c, params.tau, params.alpha));
                let found = witness_scan(&g, threshold, params.tau);
                let meta = json!({
                    "n": n,
                    "c": cfg.c,
                    "m": g.m(),
                    "prob": params.prob(),
                    "threshold": fmt_rational(&threshold),
                    "maxSize": params.tau,
                    "witness": found.map(|s| s.to_token()),
                });
                self.write("instance.hgr", &g.to_hgr())?;
                self.write("witness.json", &pretty(&meta))?;
                self.graph = Some(g);
            }
            Stage::Solve => {
                let params = cfg.params(n)?;
                let sol = build_table(self.graph()?, &params)?;
                self.write("solution.txt", &sol.to_text())?;
                self.sol = Some(sol);
            }
            Stage::Verify => {
                let mode = match cfg.mode {
                    ModeChoice::Exhaustive => Mode::Exhaustive,
                    ModeChoice::Sampled { pairs, ratio_pairs } => Mode::Sampled { count: pairs, seed: stage_seed(seed, stage), ratio_count: ratio_pairs },
                };
                self.graph()?;
                self.solution()?;
                let report = verify_all(self.graph.as_ref().expect("loaded"), self.sol.as_ref().expect("loaded"), &mode)?;
                for v in &report.monotonicity_violations {
                    eprintln!("n={n} seed={seed}: monotonicity violation at S={} i={}", v.s, v.i);
                }
                for v in &report.mismatches {
                    eprintln!("n={n} seed={seed}: entry for S={v} differs from the graph");
                }
                self.write("constraints.json", &report.to_json())?;
                self.report = Some(report);
            }
            Stage::Gap => {
                self.graph()?;
                self.solution()?;
                self.report()?;
                let gap = gap_report_at(
                    self.graph.as_ref().expect("loaded"),
                    self.sol.as_ref().expect("loaded"),
                    self.report.as_ref().expect("loaded"),
                    cfg.problem,
                    cfg.gap_k.size(n),
                );
                self.write("gap.json", &gap?.to_json())?;
            }
            Stage::Concentrate => {
                let params = cfg.params(n)?;
                let summary = mc_concentration(&params, &cfg.s_max, cfg.t_max, cfg.samples, stage_seed(seed, stage), cfg.lambda)?;
                self.write("concentration.json", &summary.to_json())?;
                self.write("f_values.csv", &summary.values_csv())?;
            }
            Stage::Pseudocal => {
                let params = cfg.params(n)?;
                let beta_q = cfg.beta_q.unwrap_or(params.beta);
                let pc = PcParams::matched(n, cfg.c, params.alpha, params.beta, beta_q, cfg.pc_tau)?;
                let mut sets = Vec::new();
                for size in 0..=cfg.pc_max_size.min(n) {
                    sagap_core::hgraph::for_each_combination(n, size, |s| sets.push(VertexSet::from_sorted(s)));
                }
                let per_set: u64 = (0..=cfg.pc_tau.min(n)).map(|j| sagap_core::phi::binom(n as i64, j as i64).max(0) as u64).fold(0u64, |a, x| a.saturating_add(x));
                let total = per_set.saturating_mul(sets.len() as u64);
                if total > SET_LIMIT {
                    return Err(Error::Capacity(format!("{total} vertex sets over {} moments exceed {SET_LIMIT}", sets.len())).into());
                }
                let rows = compare_all(self.graph()?, &params, &pc, &sets)?;
                let mut csv = format!("{CSV_HEADER}\n");
                for r in &rows {
                    csv.push_str(&r.csv_row());
                    csv.push('\n');
                }
                let flagged = rows.iter().filter(|r| r.flagged).count();
                let doc = json!({ "params": pc, "sets": rows.len(), "flagged": flagged, "comparisons": rows });
                self.write("pseudocal.csv", &csv)?;
                self.write("pseudocal.json", &pretty(&doc))?;
            }
        }
        Ok(())
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// `(1 + 3 c tau / ln n) / alpha` with the logarithm replaced by a close rational.
pub fn default_witness_threshold(n: usize, c: usize, tau: usize, alpha: Rational) -> Rational {
    let ln = approximate((n as f64).ln(), 1_000_000);
    (int(1) + int(3 * (c * tau) as i64) / ln) / alpha
}

/// Runs `stages` in order for one `(n, seed)`.
pub fn run_one(cfg: &ExperimentConfig, stages: &[Stage], input: &Path, output: &Path, n: usize, seed: u64) -> Outcome {
    let mut task = Task {
        cfg,
        n,
        seed,
        input: seed_dir(input, n, seed),
        output: seed_dir(output, n, seed),
        graph: None,
        sol: None,
        report: None,
        failed: Vec::new(),
    };
    let mut out = Outcome { n, seed, ..Outcome::default() };
    for &stage in stages {
        let err_path = task.output.join(format!("{}.error.json", stage.name()));
        match task.run(stage) {
            Ok(()) => {
                let _ = fs::remove_file(&err_path);
            }
            Err(e) => {
                task.failed.push(stage);
                let line = format!("{}: {}: {}", stage.name(), e.kind(), e.message());
                eprintln!("n={n} seed={seed}: {line}");
                let doc = json!({ "stage": stage.name(), "error": e.kind(), "message": e.message() });
                if let Err(w) = write_atomic(&err_path, pretty(&doc).as_bytes()) {
                    out.fatal.push(format!("{}: {w}", err_path.display()));
                }
                if e.is_fatal() {
                    out.fatal.push(line);
                } else {
                    out.notes.push(line);
                }
            }
        }
    }
    if let (Some(r), Some(sol)) = (&task.report, &task.sol) {
        // A dense witness explains failed box and ratio checks, never a corrupted table.
        let excused = sol.witness && r.mismatches.is_empty() && r.monotonicity_violations.is_empty();
        out.violation = !r.feasible && !excused;
        out.witness_violation = !r.feasible && excused;
    }
    out
}

/// Every `(n, seed)` in parallel on the current rayon pool, in config order.
pub fn run_all(cfg: &ExperimentConfig, stages: &[Stage], input: &Path, output: &Path) -> Vec<Outcome> {
    let tasks: Vec<(usize, u64)> = cfg.n.iter().flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s))).collect();
    tasks.par_iter().map(|&(n, seed)| run_one(cfg, stages, input, output, n, seed)).collect()
}

pub const SUMMARY_HEADER: &str = "n,seed,m,witness,witnessScan,feasible,yEmptyIsOne,enumerated,ratioChecked,maxSizeRatio,minDensityRatio,certifiedK,certifiedP,boxViolations,sandwichViolations,monotonicityViolations,perEdgeViolations,provenanceViolations,mismatches,kUsed,integralOpt,gap,fMean,fExpectation,pcFlagged,notes";

fn load(dir: &Path, file: &str) -> Option<Value> {
    serde_json::from_str(&fs::read_to_string(dir.join(file)).ok()?).ok()
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Array(a)) => a.len().to_string(),
        Some(other) => other.to_string(),
    }
}

/// One row per `(n, seed)` from whatever artifacts exist under `root`.
pub fn summary_csv(cfg: &ExperimentConfig, root: &Path) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for &n in &cfg.n {
        for &seed in &cfg.seeds {
            let dir = seed_dir(root, n, seed);
            let w = load(&dir, "witness.json");
            let c = load(&dir, "constraints.json");
            let g = load(&dir, "gap.json");
            let f = load(&dir, "concentration.json");
            let p = load(&dir, "pseudocal.json");
            let sol_witness = fs::read_to_string(dir.join("solution.txt"))
                .ok()
                .and_then(|t| t.lines().find_map(|l| l.strip_prefix("# witness=").map(str::to_string)))
                .unwrap_or_default();
            let at = |v: &Option<Value>, path: &str| cell(v.as_ref().and_then(|v| v.pointer(path)));
            let provenance = c.as_ref().map(|c| {
                let count = |k: &str| c.pointer(&format!("/provenance/{k}")).and_then(Value::as_array).map_or(0, Vec::len);
                (count("growthViolations") + count("balanceViolations")).to_string()
            });
            let mut notes: Vec<String> = ALL_STAGES
                .iter()
                .filter_map(|s| load(&dir, &format!("{}.error.json", s.name())))
                .map(|e| format!("{}: {}", cell(e.get("stage")), cell(e.get("error"))))
                .collect();
            notes.sort();
            let row = [
                n.to_string(),
                seed.to_string(),
                at(&w, "/m"),
                sol_witness,
                at(&w, "/witness"),
                at(&c, "/feasible"),
                at(&c, "/yEmptyIsOne"),
                at(&c, "/enumerated"),
                at(&c, "/ratioChecked"),
                at(&c, "/maxSizeRatio/value"),
                at(&c, "/minDensityRatio/value"),
                at(&c, "/certifiedK"),
                at(&c, "/certifiedP"),
                at(&c, "/boxViolations"),
                at(&c, "/sandwichViolations"),
                at(&c, "/monotonicityViolations"),
                at(&c, "/perEdge/violations"),
                provenance.unwrap_or_default(),
                at(&c, "/mismatches"),
                at(&g, "/kUsed"),
                at(&g, "/integralOpt"),
                at(&g, "/gap"),
                at(&f, "/mean"),
                at(&f, "/expectationValue"),
                at(&p, "/flagged"),
                notes.join("; "),
            ];
            // Witness tokens hold commas.
            let row: Vec<String> = row.into_iter().map(|c| if c.contains(',') { format!("\"{c}\"") } else { c }).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}
