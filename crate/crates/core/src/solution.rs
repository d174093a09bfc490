//! Parameters and the pseudo-solution table `y_S = L^(-|S|) n^((1-beta) Phi*(S))`.

use crate::error::{Error, Result};
use crate::hgraph::{for_each_combination, Hypergraph, VertexSet};
use crate::logvalue::{LogValue, Scale};
use crate::oracle::PhiOracle;
use crate::phi::{binom, candidate_family};
use crate::rational::{approximate, fmt_rational, int, parse_rational, rat, Rational};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write;

/// Largest table `build_table` will enumerate.
pub const TABLE_LIMIT: i64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Params {
    pub n: usize,
    pub c: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub beta: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha_tilde: Rational,
    pub tau: usize,
    pub tau_prime: usize,
    pub r: usize,
    #[serde(rename = "L", with = "crate::rational::serde_str")]
    pub l: Rational,
}

/// Fields a caller may override in [`desk_params`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub tau: Option<usize>,
    pub tau_prime: Option<usize>,
    pub r: Option<usize>,
    pub l: Option<Rational>,
    pub alpha_tilde: Option<Rational>,
    /// Accept `alpha_tilde == alpha`.
    pub allow_equal: bool,
}

impl Params {
    pub fn scale(&self) -> Scale {
        Scale::new(self.l, self.n as u64)
    }

    /// Checks the invariants; `allow_equal` admits `alpha_tilde == alpha`.
    pub fn validate(&self, allow_equal: bool) -> Result<()> {
        let fail = |what: &str| Err(Error::Parameter(format!("{what} violated ({})", self.summary())));
        if self.c < 2 || self.n < self.c {
            return fail("2 <= c <= n");
        }
        if self.alpha_tilde <= Rational::zero() {
            return fail("0 < alphaTilde");
        }
        if self.alpha_tilde > self.alpha || (self.alpha_tilde == self.alpha && !allow_equal) {
            return fail("alphaTilde < alpha");
        }
        if self.alpha >= int(self.c as i64) {
            return fail("alpha < c");
        }
        if self.beta <= Rational::zero() || self.beta >= Rational::one() {
            return fail("0 < beta < 1");
        }
        if self.r < 1 || self.r > self.tau_prime || self.tau_prime > self.tau {
            return fail("1 <= r <= tauPrime <= tau");
        }
        if self.l < int(self.r as i64) {
            return fail("L >= r");
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "n={} c={} alpha={} beta={} alphaTilde={} tau={} tauPrime={} r={} L={}",
            self.n,
            self.c,
            self.alpha,
            self.beta,
            self.alpha_tilde,
            self.tau,
            self.tau_prime,
            self.r,
            self.l
        )
    }

    /// Edge probability `n^(-alpha)`.
    pub fn prob(&self) -> f64 {
        (self.n as f64).powf(-crate::rational::to_f64(&self.alpha))
    }

    /// `L^(-|S|) n^((1-beta) phi_star)`.
    pub fn y_from_phi(&self, size: usize, phi_star: Rational) -> LogValue {
        LogValue::new(&self.scale(), size as i64, (Rational::one() - self.beta) * phi_star)
    }

    /// Deepest table entry the lifted checks read.
    pub fn depth(&self) -> usize {
        self.r + self.c
    }
}

/// The asymptotic parameter formulas, rounded to integers.
///
/// `beta` is `alpha / (c - 1)`, the choice for densest subhypergraph gaps. The natural log
/// in the `alpha_tilde` formula is replaced by a close rational so the result stays exact.
pub fn paper_params(n: usize, c: usize, alpha: Rational) -> Result<Params> {
    if n < 4 {
        return Err(Error::Parameter(format!("need n >= 4, got {n}")));
    }
    if c < 2 {
        return Err(Error::Parameter(format!("need c >= 2, got {c}")));
    }
    let ln = (n as f64).ln();
    let lnln = ln.ln();
    let tau = ((ln / (c as f64 * lnln * lnln)).floor() as usize).max(1);
    let r = ((tau as f64 / (lnln * lnln)).floor() as usize).clamp(1, tau);
    let tau_prime = (tau / 10).max(1);
    let l = int(2 * tau as i64);
    let ln_rat = approximate(ln, 1_000_000);
    let tau_r = int(tau as i64);
    let alpha_tilde = alpha * (Rational::one() - int(10 * r as i64) / tau_r) / (Rational::one() + int(3 * c as i64) * tau_r / ln_rat);
    let params = Params { n, c, alpha, beta: alpha / int(c as i64 - 1), alpha_tilde, tau, tau_prime, r, l };
    if alpha_tilde <= Rational::zero() {
        return Err(Error::DegenerateParams(params.summary()));
    }
    params.validate(false)?;
    Ok(params)
}

/// Desk-scale defaults: `tau=8, tauPrime=4, r=2, L=16, alphaTilde = 9/10 alpha`.
pub fn desk_params(n: usize, c: usize, alpha: Rational, beta: Rational, overrides: &Overrides) -> Result<Params> {
    let params = Params {
        n,
        c,
        alpha,
        beta,
        alpha_tilde: overrides.alpha_tilde.unwrap_or(alpha * rat(9, 10)),
        tau: overrides.tau.unwrap_or(8),
        tau_prime: overrides.tau_prime.unwrap_or(4),
        r: overrides.r.unwrap_or(2),
        l: overrides.l.unwrap_or(int(16)),
    };
    params.validate(overrides.allow_equal)?;
    Ok(params)
}

/// `y_S` from the capped optimum over supersets of `s`.
pub fn y_value(g: &Hypergraph, params: &Params, s: &VertexSet) -> Result<LogValue> {
    if s.len() > params.r {
        return Err(Error::Contract(format!("|S|={} exceeds r={}", s.len(), params.r)));
    }
    let family = candidate_family(g, params.alpha_tilde, s, params.tau)?;
    Ok(params.y_from_phi(s.len(), family.phi_star))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub y: LogValue,
    #[serde(with = "crate::rational::serde_str")]
    pub phi_star: Rational,
    /// The maximizer found; absent for tables read back from text.
    pub best: Option<VertexSet>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PseudoSolution {
    pub params: Params,
    pub entries: BTreeMap<VertexSet, Entry>,
    /// `Phi*(empty) > 0`: the graph holds a dense set of at most `tau` vertices.
    pub witness: bool,
    /// Some uncapped optimum needs more than `tau` vertices.
    pub cap_bound: bool,
    /// Every recorded maximizer has at most `tauPrime` vertices.
    pub optima_within_tau_prime: bool,
}

fn table_size(n: usize, r: usize) -> i64 {
    (0..=r).map(|s| binom(n as i64, s as i64)).fold(0i64, |acc, x| acc.saturating_add(x))
}

pub fn build_table(g: &Hypergraph, params: &Params) -> Result<PseudoSolution> {
    let mut oracle = PhiOracle::new(g, params.alpha_tilde, params.tau);
    build_table_with(&mut oracle, params)
}

/// As [`build_table`], reusing (and filling) the caller's oracle.
pub fn build_table_with(oracle: &mut PhiOracle, params: &Params) -> Result<PseudoSolution> {
    let g = oracle.graph();
    if g.n() != params.n || g.c() != params.c {
        return Err(Error::Contract(format!("graph (n={}, c={}) does not match params", g.n(), g.c())));
    }
    if oracle.alpha_tilde() != params.alpha_tilde || oracle.cap() != params.tau {
        return Err(Error::Contract("oracle built for different alphaTilde or tau".into()));
    }
    let size = table_size(params.n, params.r);
    if size > TABLE_LIMIT {
        return Err(Error::Capacity(format!("table of {size} entries exceeds {TABLE_LIMIT}")));
    }
    let mut entries = BTreeMap::new();
    let mut within = true;
    for s in 0..=params.r {
        let mut sets = Vec::new();
        for_each_combination(params.n, s, |comb| sets.push(VertexSet::from_sorted(comb)));
        for set in sets {
            let phi_star = oracle.phi_star(&set);
            let best = oracle.best_set(&set);
            within &= best.len() <= params.tau_prime;
            entries.insert(set.clone(), Entry { y: params.y_from_phi(set.len(), phi_star), phi_star, best: Some(best) });
        }
    }
    let witness = entries[&VertexSet::new()].phi_star > Rational::zero();
    let cap_bound = cap_binds(g, params, &entries);
    Ok(PseudoSolution { params: params.clone(), entries, witness, cap_bound, optima_within_tau_prime: within })
}

/// Some entry's uncapped optimum beats its capped one. The empty set comes first and
/// settles dense graphs immediately.
fn cap_binds(g: &Hypergraph, params: &Params, entries: &BTreeMap<VertexSet, Entry>) -> bool {
    entries.iter().any(|(s, e)| crate::phi::phi_star_closure(g, params.alpha_tilde, s).0 > e.phi_star)
}

impl PseudoSolution {
    pub fn get(&self, s: &VertexSet) -> Option<&LogValue> {
        self.entries.get(s).map(|e| &e.y)
    }

    /// Pairs `(S, i)` with `y_S < L * y_{S + i}`, compared exactly.
    pub fn monotonicity_violations(&self) -> Vec<(VertexSet, u32)> {
        let scale = self.params.scale();
        let mut out = Vec::new();
        for (t, e) in &self.entries {
            for i in t.iter() {
                let s = t.without(i);
                if let Some(ys) = self.get(&s) {
                    if !ys.ge_exact(&e.y.shift(&scale, -1, Rational::zero()), &scale) {
                        out.push((s, i));
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        out.push_str("# sagap pseudo-solution\n");
        let header = [
            ("n", p.n.to_string()),
            ("c", p.c.to_string()),
            ("alpha", fmt_rational(&p.alpha)),
            ("beta", fmt_rational(&p.beta)),
            ("alphaTilde", fmt_rational(&p.alpha_tilde)),
            ("tau", p.tau.to_string()),
            ("tauPrime", p.tau_prime.to_string()),
            ("r", p.r.to_string()),
            ("L", fmt_rational(&p.l)),
            ("witness", self.witness.to_string()),
            ("capBound", self.cap_bound.to_string()),
            ("optimaWithinTauPrime", self.optima_within_tau_prime.to_string()),
        ];
        for (k, v) in header {
            let _ = writeln!(out, "# {k}={v}");
        }
        for (s, e) in &self.entries {
            let _ = writeln!(out, "{} {} {}", s.to_token(), e.y.a, fmt_rational(&e.y.rho));
        }
        out
    }

    /// Reads [`to_text`](Self::to_text) output. Values are taken as written, so an edited
    /// file may break the table's invariants; `Phi*` is recovered from the exponent.
    pub fn from_text(text: &str) -> Result<PseudoSolution> {
        let mut header: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, value)) = rest.trim().split_once('=') {
                    header.insert(key.trim().to_string(), (line_no, value.trim().to_string()));
                }
                continue;
            }
            rows.push((line_no, line.to_string()));
        }
        let take = |key: &str| -> Result<(usize, String)> {
            header.get(key).cloned().ok_or(Error::Parse { line: 0, msg: format!("missing header key {key}") })
        };
        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
        let count = |key: &str| -> Result<usize> {
            let (line, v) = take(key)?;
            v.parse().map_err(|_| parse_err(line, format!("bad {key}: {v}")))
        };
        let ratio = |key: &str| -> Result<Rational> {
            let (line, v) = take(key)?;
            parse_rational(&v).map_err(|e| parse_err(line, e.to_string()))
        };
        let flag = |key: &str| -> Result<bool> {
            let (line, v) = take(key)?;
            v.parse().map_err(|_| parse_err(line, format!("bad {key}: {v}")))
        };
        let params = Params {
            n: count("n")?,
            c: count("c")?,
            alpha: ratio("alpha")?,
            beta: ratio("beta")?,
            alpha_tilde: ratio("alphaTilde")?,
            tau: count("tau")?,
            tau_prime: count("tauPrime")?,
            r: count("r")?,
            l: ratio("L")?,
        };
        params.validate(true)?;
        let scale = params.scale();
        let mut entries = BTreeMap::new();
        for (line, row) in rows {
            let parts: Vec<&str> = row.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(parse_err(line, format!("expected 3 fields, got {}", parts.len())));
            }
            let s = VertexSet::from_token(parts[0]).map_err(|e| parse_err(line, e.to_string()))?;
            if s.iter().any(|v| v as usize >= params.n) || s.len() > params.r {
                return Err(parse_err(line, format!("set {s} outside the table")));
            }
            let a: i64 = parts[1].parse().map_err(|_| parse_err(line, format!("bad exponent {}", parts[1])))?;
            let rho = parse_rational(parts[2]).map_err(|e| parse_err(line, e.to_string()))?;
            let phi_star = rho / (Rational::one() - params.beta);
            if entries.insert(s.clone(), Entry { y: LogValue::new(&scale, a, rho), phi_star, best: None }).is_some() {
                return Err(parse_err(line, format!("duplicate set {s}")));
            }
        }
        if !entries.contains_key(&VertexSet::new()) {
            return Err(Error::Parse { line: 0, msg: "missing entry for the empty set".into() });
        }
        Ok(PseudoSolution {
            params,
            entries,
            witness: flag("witness")?,
            cap_bound: flag("capBound")?,
            optima_within_tau_prime: flag("optimaWithinTauPrime")?,
        })
    }
}

/// Reads `y_S` from the table and, for sets deeper than `r`, from the graph.
pub struct TableView<'a> {
    pub sol: &'a PseudoSolution,
    oracle: Option<PhiOracle<'a>>,
}

impl<'a> TableView<'a> {
    pub fn new(sol: &'a PseudoSolution, g: Option<&'a Hypergraph>) -> Self {
        let oracle = g.map(|g| PhiOracle::new(g, sol.params.alpha_tilde, sol.params.tau));
        TableView { sol, oracle }
    }

    pub fn with_oracle(sol: &'a PseudoSolution, oracle: PhiOracle<'a>) -> Self {
        TableView { sol, oracle: Some(oracle) }
    }

    pub fn scale(&self) -> Scale {
        self.sol.params.scale()
    }

    pub fn params(&self) -> &Params {
        &self.sol.params
    }

    pub fn y(&mut self, s: &VertexSet) -> Result<LogValue> {
        if let Some(v) = self.sol.get(s) {
            return Ok(v.clone());
        }
        let p = &self.sol.params;
        if s.len() <= p.r {
            return Err(Error::Contract(format!("table has no entry for {s}")));
        }
        if s.len() > p.tau {
            return Err(Error::Contract(format!("|S|={} beyond the cap {}", s.len(), p.tau)));
        }
        match &mut self.oracle {
            Some(o) => Ok(p.y_from_phi(s.len(), o.phi_star(s))),
            None => Err(Error::Contract(format!("{s} is deeper than the table and no graph was given"))),
        }
    }

    /// `Phi*` for any set within the cap, recomputed from the graph.
    pub fn phi_star(&mut self, s: &VertexSet) -> Result<Rational> {
        match &mut self.oracle {
            Some(o) => Ok(o.phi_star(s)),
            None => Err(Error::Contract("no graph given".into())),
        }
    }

    /// A maximizer for `s`, recomputed from the graph.
    pub fn best_set(&mut self, s: &VertexSet) -> Result<VertexSet> {
        match &mut self.oracle {
            Some(o) => Ok(o.best_set(s)),
            None => Err(Error::Contract("no graph given".into())),
        }
    }
}
