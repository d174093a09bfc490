//! The pseudo-calibrated moments and how they compare with the max-term solution.
//!
//! Pseudo-calibration suggests `E~[x_S](G) = sum_{T ⊆ E_G, |v(T) ∪ S| <= tau} K^|v(T) ∪ S| R^|T|`
//! with `K = k/n` and `R = q/p`. The main solution keeps only the largest term.

use crate::conc::EdgeSet;
use crate::error::{Error, Result};
use crate::hgraph::{for_each_combination, induced_edge_count, Hypergraph, Vertex, VertexSet};
use crate::logvalue::compensated_sum;
use crate::oracle::PhiOracle;
use crate::rational::{fmt_rational, int, to_f64, Rational};
use crate::solution::Params;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

/// Subsets `X ⊇ S` the moment sum may visit.
pub const SET_LIMIT: u64 = 50_000_000;

/// A probability given directly or as a power of `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prob {
    Value(Rational),
    /// `n^e`.
    Power(Rational),
}

impl Prob {
    pub fn ln(&self, n: usize) -> f64 {
        match self {
            Prob::Value(v) => to_f64(v).ln(),
            Prob::Power(e) => to_f64(e) * (n as f64).ln(),
        }
    }

    pub fn value(&self, n: usize) -> f64 {
        match self {
            Prob::Value(v) => to_f64(v),
            Prob::Power(e) => (n as f64).powf(to_f64(e)),
        }
    }

    fn in_range(&self, open: bool) -> bool {
        match self {
            Prob::Value(v) if open => *v > Rational::zero() && *v < Rational::one(),
            Prob::Value(v) => *v >= Rational::zero() && *v <= Rational::one(),
            Prob::Power(e) if open => *e < Rational::zero(),
            Prob::Power(e) => *e <= Rational::zero(),
        }
    }
}

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Prob::Value(v) => ser.serialize_str(&fmt_rational(v)),
            Prob::Power(e) => ser.serialize_str(&format!("n^{}", fmt_rational(e))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PcParams {
    pub n: usize,
    pub c: usize,
    pub p: Prob,
    pub q: Prob,
    pub k_over_n: Prob,
    pub tau: usize,
}

impl PcParams {
    pub fn new(n: usize, c: usize, p: Prob, q: Prob, k_over_n: Prob, tau: usize) -> Result<Self> {
        if !p.in_range(true) {
            return Err(Error::Parameter("need 0 < p < 1".into()));
        }
        if !q.in_range(false) || !k_over_n.in_range(false) {
            return Err(Error::Parameter("need q and kOverN in [0, 1]".into()));
        }
        if c < 2 || n < c {
            return Err(Error::Parameter(format!("need 2 <= c <= n, got c={c}, n={n}")));
        }
        Ok(PcParams { n, c, p, q, k_over_n, tau })
    }

    /// `p = n^-alpha`, `q = n^(-alpha beta_q)`, `k/n = n^(beta - 1)`. With `beta_q = beta`
    /// every term is `n^((1-beta)(alpha |T| - |v(T) ∪ S|))`.
    pub fn matched(n: usize, c: usize, alpha: Rational, beta: Rational, beta_q: Rational, tau: usize) -> Result<Self> {
        PcParams::new(n, c, Prob::Power(-alpha), Prob::Power(-alpha * beta_q), Prob::Power(beta - Rational::one()), tau)
    }

    /// `(ln K, ln R)`, with `None` for a zero base.
    fn logs(&self) -> (Option<f64>, Option<f64>) {
        let k = self.k_over_n.ln(self.n);
        let r = self.q.ln(self.n) - self.p.ln(self.n);
        (k.is_finite().then_some(k), r.is_finite().then_some(r))
    }

    /// `(exponent of K, exponent of R)` in powers of `n`, when both are powers.
    fn exponents(&self) -> Option<(Rational, Rational)> {
        match (self.k_over_n, self.q, self.p) {
            (Prob::Power(k), Prob::Power(q), Prob::Power(p)) => Some((k, q - p)),
            _ => None,
        }
    }
}

/// `chi_T(G) = sign * ((1-p)/p)^(half_power / 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Chi {
    pub sign: i8,
    pub half_power: i64,
}

impl Chi {
    pub fn value(&self, p: Rational) -> f64 {
        if self.half_power == 0 {
            return self.sign as f64;
        }
        let odds = to_f64(&((Rational::one() - p) / p));
        self.sign as f64 * odds.powf(self.half_power as f64 / 2.0)
    }
}

/// `prod_{e in T} G_e` with `G_e = sqrt((1-p)/p)` on edges and `-sqrt(p/(1-p))` off them.
pub fn chi(g: &Hypergraph, t: &EdgeSet, p: Rational) -> Result<Chi> {
    if p <= Rational::zero() || p >= Rational::one() {
        return Err(Error::Parameter(format!("chi needs 0 < p < 1, got {p}")));
    }
    let present = t.edges().iter().filter(|e| g.has_edge(e)).count() as i64;
    let absent = t.len() as i64 - present;
    Ok(Chi { sign: if absent % 2 == 0 { 1 } else { -1 }, half_power: present - absent })
}

/// The Fourier coefficient of `x_S` at `T` in three forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PcCoefficient {
    /// `K^a ((q - p) / sqrt(p (1-p)))^b`.
    pub exact: f64,
    /// `K^a (q / sqrt p)^b`.
    pub simplified: f64,
    /// `K^a (q / p)^b`, the weight of `T` once `chi_T` becomes `p^(-b/2) 1[T ⊆ E_G]`.
    pub weight: f64,
    /// `log_n` of `weight` when every probability is a power of `n`.
    #[serde(serialize_with = "opt_rational")]
    pub weight_exponent: Option<Rational>,
}

fn opt_rational<S: Serializer>(r: &Option<Rational>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => ser.serialize_some(&fmt_rational(r)),
        None => ser.serialize_none(),
    }
}

pub fn pc_coefficient(s: &VertexSet, t: &EdgeSet, pc: &PcParams) -> PcCoefficient {
    let a = s.union(&t.support()).len() as f64;
    let b = t.len() as f64;
    let n = pc.n;
    let (p, q) = (pc.p.value(n), pc.q.value(n));
    let k_part = if a == 0.0 { 1.0 } else { pc.k_over_n.value(n).powf(a) };
    let exact = k_part * ((q - p) / (p * (1.0 - p)).sqrt()).powf(b);
    let simplified = k_part * (q / p.sqrt()).powf(b);
    let weight = k_part * (q / p).powf(b);
    let weight_exponent = pc.exponents().map(|(ek, er)| ek * int(a as i64) + er * int(b as i64));
    PcCoefficient { exact, simplified, weight, weight_exponent }
}

/// `sum count(a, b) K^a R^b`, grouped by `a = |v(T) ∪ S|` and `b = |T|`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Moment {
    pub counts: BTreeMap<(usize, usize), BigUint>,
}

impl Serialize for Moment {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(self.counts.len()))?;
        for ((a, b), k) in &self.counts {
            seq.serialize_element(&(a, b, k.to_string()))?;
        }
        seq.end()
    }
}

impl Moment {
    /// Sum of `count * exp(term)` where `term` gives each group's natural log (or `None` for 0).
    fn fold(&self, term: impl Fn(usize, usize) -> Option<f64>) -> f64 {
        compensated_sum(self.counts.iter().filter_map(|(&(a, b), k)| term(a, b).map(|t| (k.to_f64().unwrap_or(f64::INFINITY).ln() + t).exp())))
    }

    fn ln_term(pc: &PcParams, a: usize, b: usize) -> Option<f64> {
        let (lk, lr) = pc.logs();
        let k = if a == 0 { Some(0.0) } else { lk.map(|x| x * a as f64) };
        let r = if b == 0 { Some(0.0) } else { lr.map(|x| x * b as f64) };
        Some(k? + r?)
    }

    pub fn value(&self, pc: &PcParams) -> f64 {
        self.fold(|a, b| Moment::ln_term(pc, a, b))
    }

    /// `value / n^exponent`, with exponents subtracted exactly when the probabilities are powers of `n`.
    pub fn relative_to(&self, pc: &PcParams, ln_base: f64, exponent: Option<Rational>) -> f64 {
        let ln_n = (pc.n as f64).ln();
        match (pc.exponents(), exponent) {
            (Some((ek, er)), Some(x)) => self.fold(|a, b| Some(to_f64(&(ek * int(a as i64) + er * int(b as i64) - x)) * ln_n)),
            _ => self.fold(|a, b| Moment::ln_term(pc, a, b).map(|t| t - ln_base)),
        }
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `E~[x_S](G)` in its indicator form: every `T ⊆ E_G` with `|v(T) ∪ S| <= tau`.
///
/// Terms are counted by inclusion-exclusion over the vertex set `X = v(T) ∪ S`:
/// `sum_{X ⊇ S} (1+R)^e(X) sum_j (-1)^j C(n-|X|, j) K^(|X|+j)`, so only the sets `X` are
/// enumerated, never the edge subsets.
pub fn pc_value(g: &Hypergraph, s: &VertexSet, pc: &PcParams) -> Result<Moment> {
    if g.n() != pc.n || g.c() != pc.c {
        return Err(Error::Contract("graph does not match pseudo-calibration parameters".into()));
    }
    let n = pc.n;
    if s.len() > pc.tau {
        return Ok(Moment::default());
    }
    let free: Vec<Vertex> = (0..n as Vertex).filter(|&v| !s.contains(v)).collect();
    let room = pc.tau - s.len();
    let sets: u64 = (0..=room.min(free.len())).map(|j| binomial(free.len(), j).to_u64().unwrap_or(u64::MAX)).fold(0u64, |a, x| a.saturating_add(x));
    if sets > SET_LIMIT {
        return Err(Error::Capacity(format!("{sets} vertex sets exceed {SET_LIMIT}")));
    }
    // Sets X grouped by (|X|, e(X)).
    let mut by_size_edges: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for j in 0..=room.min(free.len()) {
        for_each_combination(free.len(), j, |idx| {
            let x = s.union_slice(&idx.iter().map(|&i| free[i as usize]).collect::<Vec<_>>());
            *by_size_edges.entry((x.len(), induced_edge_count(g, &x))).or_insert(0) += 1;
        });
    }
    // Signed count of each (|U|, |T|) group, before cancellation.
    let mut signed: BTreeMap<(usize, usize), BigInt> = BTreeMap::new();
    for (&(x, m), &sets) in &by_size_edges {
        for j in 0..=pc.tau - x {
            let outer = binomial(n - x, j) * BigInt::from(sets);
            let outer = if j % 2 == 0 { outer } else { -outer };
            for b in 0..=m {
                *signed.entry((x + j, b)).or_default() += &outer * binomial(m, b);
            }
        }
    }
    let mut counts = BTreeMap::new();
    for (key, v) in signed {
        if v.is_negative() {
            return Err(Error::Contract(format!("negative template count at {key:?}")));
        }
        if !v.is_zero() {
            counts.insert(key, v.to_biguint().expect("nonnegative"));
        }
    }
    Ok(Moment { counts })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Comparison {
    pub s: VertexSet,
    pub pc_value: f64,
    /// `L^|S| y_S` with `alphaTilde = alpha`: `n^((1-beta) Phi*_alpha(S))`.
    pub max_term: f64,
    #[serde(with = "crate::rational::serde_str")]
    pub max_exponent: Rational,
    pub ratio: f64,
    /// The ratio fell below 1.
    pub flagged: bool,
}

pub const CSV_HEADER: &str = "s,pc_value,max_term,ratio";

impl Comparison {
    pub fn csv_row(&self) -> String {
        // Tokens of two or more vertices contain commas.
        let s = self.s.to_token();
        let s = if s.contains(',') { format!("\"{s}\"") } else { s };
        format!("{s},{:e},{:e},{}", self.pc_value, self.max_term, self.ratio)
    }
}

fn compare_with(g: &Hypergraph, params: &Params, pc: &PcParams, s: &VertexSet, oracle: &mut PhiOracle) -> Result<Comparison> {
    let moment = pc_value(g, s, pc)?;
    let phi = oracle.phi_star(s);
    let max_exponent = (Rational::one() - params.beta) * phi;
    let ln_max = to_f64(&max_exponent) * (params.n as f64).ln();
    let ratio = moment.relative_to(pc, ln_max, Some(max_exponent));
    Ok(Comparison { s: s.clone(), pc_value: moment.value(pc), max_term: ln_max.exp(), max_exponent, ratio, flagged: ratio < 1.0 })
}

/// Sum over templates against the single largest one, maximizing `Phi` with `alphaTilde = alpha`
/// over supersets of size at most `params.tau`.
pub fn compare_to_solution(g: &Hypergraph, params: &Params, pc: &PcParams, s: &VertexSet) -> Result<Comparison> {
    let mut oracle = PhiOracle::new(g, params.alpha, params.tau);
    compare_with(g, params, pc, s, &mut oracle)
}

/// [`compare_to_solution`] for many sets, in parallel.
pub fn compare_all(g: &Hypergraph, params: &Params, pc: &PcParams, sets: &[VertexSet]) -> Result<Vec<Comparison>> {
    let base = PhiOracle::new(g, params.alpha, params.tau);
    let chunk = sets.len().div_ceil(rayon::current_num_threads()).max(1);
    let parts: Vec<Result<Vec<Comparison>>> = sets
        .par_chunks(chunk)
        .map(|part| {
            let mut oracle = base.fork();
            part.iter().map(|s| compare_with(g, params, pc, s, &mut oracle)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(sets.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
