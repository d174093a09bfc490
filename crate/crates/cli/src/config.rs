//! Flat `key = value` experiment configuration.

use sagap_core::relax::Problem;
use sagap_core::solution::{desk_params, paper_params, Overrides, Params};
use sagap_core::rational::{fmt_rational, parse_rational};
use sagap_core::{Rational, VertexSet};
use std::collections::BTreeSet;
use std::fmt::Write;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: key {key:?} given twice")]
    Duplicate { line: usize, key: String },
    #[error("config line {line}: bad value for {key:?}: {msg}")]
    Value { line: usize, key: String, msg: String },
    #[error("config line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Desk,
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeChoice {
    Exhaustive,
    Sampled { pairs: u64, ratio_pairs: u64 },
}

/// Set size handed to the DkSH oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapK {
    Certified,
    /// `ceil(sqrt(n))`.
    Sqrt,
    Fixed(usize),
}

impl GapK {
    pub fn size(&self, n: usize) -> Option<usize> {
        match self {
            GapK::Certified => None,
            GapK::Sqrt => Some((n as f64).sqrt().ceil() as usize),
            GapK::Fixed(k) => Some(*k),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub n: Vec<usize>,
    pub c: usize,
    pub alpha: Rational,
    pub beta: Rational,
    pub preset: Preset,
    pub overrides: Overrides,
    /// Threshold for the witness scan; defaults to `(1 + 3 c tau / ln n) / alpha`.
    pub witness_threshold: Option<Rational>,
    pub seeds: Vec<u64>,
    pub mode: ModeChoice,
    pub gap_k: GapK,
    pub out: Option<PathBuf>,
    pub t_max: usize,
    pub samples: usize,
    pub lambda: f64,
    pub s_max: VertexSet,
    pub pc_tau: usize,
    pub beta_q: Option<Rational>,
    pub pc_max_size: usize,
}

pub const KEYS: &[&str] = &[
    "problem",
    "n",
    "c",
    "alpha",
    "beta",
    "params",
    "tau",
    "tauPrime",
    "r",
    "L",
    "alphaTilde",
    "allowEqual",
    "witnessThreshold",
    "seeds",
    "seedBase",
    "seedCount",
    "mode",
    "pairs",
    "ratioPairs",
    "gapK",
    "out",
    "tMax",
    "samples",
    "lambda",
    "sMax",
    "pcTau",
    "betaQ",
    "pcMaxSize",
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        let half = Rational::new(1, 2);
        ExperimentConfig {
            problem: Problem::DkSH,
            n: vec![32],
            c: 2,
            alpha: half,
            beta: half,
            preset: Preset::Desk,
            overrides: Overrides::default(),
            witness_threshold: None,
            seeds: vec![0],
            mode: ModeChoice::Exhaustive,
            gap_k: GapK::Certified,
            out: None,
            t_max: 3,
            samples: 200,
            lambda: 3.0,
            s_max: VertexSet::new(),
            pc_tau: 4,
            beta_q: None,
            pc_max_size: 1,
        }
    }
}

fn list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String> {
    v.split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| format!("{p:?} is not a number")))
        .collect()
}

fn one<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("{v:?} is not a number"))
}

fn ratio(v: &str) -> Result<Rational, String> {
    parse_rational(v).map_err(|e| e.to_string())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = BTreeSet::new();
        let mut seed_base = None;
        let mut seed_count = None;
        let mut pairs = 100_000u64;
        let mut ratio_pairs = 40u64;
        let mut sampled = false;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: key.into() });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Duplicate { line, key: key.into() });
            }
            let bad = |msg: String| ConfigError::Value { line, key: key.into(), msg };
            let o = &mut cfg.overrides;
            match key {
                "problem" => cfg.problem = value.parse().map_err(|e: sagap_core::Error| bad(e.to_string()))?,
                "n" => {
                    cfg.n = list(value).map_err(bad)?;
                    if cfg.n.is_empty() {
                        return Err(bad("empty list".into()));
                    }
                }
                "c" => cfg.c = one(value).map_err(bad)?,
                "alpha" => cfg.alpha = ratio(value).map_err(bad)?,
                "beta" => cfg.beta = ratio(value).map_err(bad)?,
                "params" => {
                    cfg.preset = match value {
                        "desk" => Preset::Desk,
                        "paper" => Preset::Paper,
                        _ => return Err(bad("expected desk or paper".into())),
                    }
                }
                "tau" => o.tau = Some(one(value).map_err(bad)?),
                "tauPrime" => o.tau_prime = Some(one(value).map_err(bad)?),
                "r" => o.r = Some(one(value).map_err(bad)?),
                "L" => o.l = Some(ratio(value).map_err(bad)?),
                "alphaTilde" => o.alpha_tilde = Some(ratio(value).map_err(bad)?),
                "allowEqual" => o.allow_equal = one(value).map_err(|_| bad("expected true or false".into()))?,
                "witnessThreshold" => cfg.witness_threshold = Some(ratio(value).map_err(bad)?),
                "seeds" => {
                    cfg.seeds = match value.strip_prefix('(').and_then(|v| v.strip_suffix(')')) {
                        Some(inner) => {
                            let parts: Vec<u64> = list(inner).map_err(bad)?;
                            match parts[..] {
                                [base, count] => (base..base.saturating_add(count)).collect(),
                                _ => return Err(bad("expected (base, count)".into())),
                            }
                        }
                        None => list(value).map_err(bad)?,
                    };
                }
                "seedBase" => seed_base = Some(one(value).map_err(bad)?),
                "seedCount" => seed_count = Some(one(value).map_err(bad)?),
                "mode" => {
                    sampled = match value {
                        "exhaustive" => false,
                        "sampled" => true,
                        _ => return Err(bad("expected exhaustive or sampled".into())),
                    }
                }
                "pairs" => pairs = one(value).map_err(bad)?,
                "ratioPairs" => ratio_pairs = one(value).map_err(bad)?,
                "gapK" => {
                    cfg.gap_k = match value {
                        "certified" => GapK::Certified,
                        "sqrt" => GapK::Sqrt,
                        v => GapK::Fixed(one(v).map_err(|_| bad("expected certified, sqrt or a size".into()))?),
                    }
                }
                "out" => cfg.out = Some(PathBuf::from(value)),
                "tMax" => cfg.t_max = one(value).map_err(bad)?,
                "samples" => cfg.samples = one(value).map_err(bad)?,
                "lambda" => cfg.lambda = one(value).map_err(bad)?,
                "sMax" => cfg.s_max = VertexSet::from_token(value).map_err(|e| bad(e.to_string()))?,
                "pcTau" => cfg.pc_tau = one(value).map_err(bad)?,
                "betaQ" => cfg.beta_q = Some(ratio(value).map_err(bad)?),
                "pcMaxSize" => cfg.pc_max_size = one(value).map_err(bad)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }
        if seen.contains("seeds") && (seed_base.is_some() || seed_count.is_some()) {
            return Err(ConfigError::Invalid("give either seeds or seedBase/seedCount".into()));
        }
        if seed_base.is_some() || seed_count.is_some() {
            cfg.set_seed_range(seed_base, seed_count);
        }
        if sampled {
            cfg.mode = ModeChoice::Sampled { pairs, ratio_pairs };
        }
        cfg.check()?;
        Ok(cfg)
    }

    /// Replaces the seed list by `base..base+count`, each part defaulting to the current list.
    pub fn set_seed_range(&mut self, base: Option<u64>, count: Option<u64>) {
        let base = base.unwrap_or_else(|| self.seeds.first().copied().unwrap_or(0));
        let count = count.unwrap_or(self.seeds.len() as u64);
        self.seeds = (base..base.saturating_add(count)).collect();
    }

    /// Validates the parameters for every `n`.
    pub fn check(&self) -> Result<(), ConfigError> {
        for &n in &self.n {
            self.params(n).map_err(|e| ConfigError::Invalid(format!("n={n}: {e}")))?;
        }
        if self.samples < 30 {
            return Err(ConfigError::Invalid(format!("samples must be at least 30, got {}", self.samples)));
        }
        if self.s_max.iter().any(|v| self.n.iter().any(|&n| v as usize >= n)) {
            return Err(ConfigError::Invalid(format!("sMax {} names a vertex outside some n", self.s_max)));
        }
        Ok(())
    }

    pub fn params(&self, n: usize) -> sagap_core::Result<Params> {
        match self.preset {
            Preset::Desk => desk_params(n, self.c, self.alpha, self.beta, &self.overrides),
            Preset::Paper => paper_params(n, self.c, self.alpha),
        }
    }

    /// One line per key, fully resolved; hashed into the manifest.
    pub fn canonical(&self) -> String {
        let o = &self.overrides;
        let opt = |v: Option<String>| v.unwrap_or_else(|| "default".into());
        let mut out = String::new();
        let join = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let ns: Vec<u64> = self.n.iter().map(|&n| n as u64).collect();
        let mode = match self.mode {
            ModeChoice::Exhaustive => "exhaustive".to_string(),
            ModeChoice::Sampled { pairs, ratio_pairs } => format!("sampled pairs={pairs} ratioPairs={ratio_pairs}"),
        };
        let gap_k = match self.gap_k {
            GapK::Certified => "certified".to_string(),
            GapK::Sqrt => "sqrt".to_string(),
            GapK::Fixed(k) => k.to_string(),
        };
        let rows = [
            ("problem", self.problem.to_string()),
            ("n", join(&ns)),
            ("c", self.c.to_string()),
            ("alpha", fmt_rational(&self.alpha)),
            ("beta", fmt_rational(&self.beta)),
            ("params", format!("{:?}", self.preset).to_lowercase()),
            ("tau", opt(o.tau.map(|v| v.to_string()))),
            ("tauPrime", opt(o.tau_prime.map(|v| v.to_string()))),
            ("r", opt(o.r.map(|v| v.to_string()))),
            ("L", opt(o.l.as_ref().map(fmt_rational))),
            ("alphaTilde", opt(o.alpha_tilde.as_ref().map(fmt_rational))),
            ("allowEqual", o.allow_equal.to_string()),
            ("witnessThreshold", opt(self.witness_threshold.as_ref().map(fmt_rational))),
            ("seeds", join(&self.seeds)),
            ("mode", mode),
            ("gapK", gap_k),
            ("tMax", self.t_max.to_string()),
            ("samples", self.samples.to_string()),
            ("lambda", self.lambda.to_string()),
            ("sMax", self.s_max.to_token()),
            ("pcTau", self.pc_tau.to_string()),
            ("betaQ", opt(self.beta_q.as_ref().map(fmt_rational))),
            ("pcMaxSize", self.pc_max_size.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
