//! Inclusion-exclusion sums over the table and the lifted constraint checks.

use crate::error::{Error, Result};
use crate::hgraph::{Hypergraph, Vertex, VertexSet};
use crate::logvalue::compensated_sum;
use crate::oracle::PhiOracle;
use crate::phi::binom;
use crate::rational::{to_f64, Rational};
use crate::conc::{balance_slack, EdgeSet, BALANCE_LIMIT};
use crate::solution::{Params, PseudoSolution, TableView};
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Relative float error allowed per inclusion-exclusion term.
pub const TERM_EPS: f64 = 1e-12;
/// Relative slack on the factor-two sandwich.
pub const SANDWICH_TOL: f64 = 1e-9;
/// Largest number of pairs exhaustive mode enumerates.
pub const PAIR_LIMIT: i64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftedTerm {
    pub s: VertexSet,
    pub t: VertexSet,
    pub value: f64,
    /// Largest absolute term in the sum.
    pub max_term: f64,
}

impl LiftedTerm {
    /// Absolute error bound of the float evaluation.
    pub fn tolerance(&self) -> f64 {
        (1u64 << self.t.len()) as f64 * TERM_EPS * self.max_term
    }
}

fn subset(t: &VertexSet, mask: u32) -> VertexSet {
    t.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, v)| v).collect()
}

/// The alternating sum without size checks; exactly zero when `s` and `t` meet.
fn lifted(view: &mut TableView, s: &VertexSet, t: &VertexSet) -> Result<LiftedTerm> {
    if !s.is_disjoint(t) {
        return Ok(LiftedTerm { s: s.clone(), t: t.clone(), value: 0.0, max_term: 0.0 });
    }
    let mut terms = Vec::with_capacity(1 << t.len());
    for mask in 0..1u32 << t.len() {
        let y = view.y(&s.union(&subset(t, mask)))?.float;
        terms.push(if mask.count_ones() % 2 == 0 { y } else { -y });
    }
    let max_term = terms.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(LiftedTerm { s: s.clone(), t: t.clone(), value: compensated_sum(terms), max_term })
}

/// `sum over J subset of T of (-1)^|J| y_{S + J}`.
pub fn ie_sum(view: &mut TableView, s: &VertexSet, t: &VertexSet) -> Result<LiftedTerm> {
    if !s.is_disjoint(t) {
        return Err(Error::Contract(format!("S={s} and T={t} overlap")));
    }
    if s.len() + t.len() > view.params().r {
        return Err(Error::Contract(format!("|S|+|T|={} exceeds r={}", s.len() + t.len(), view.params().r)));
    }
    lifted(view, s, t)
}

/// The same sum through `f(S, T) = f(S, T - t) - f(S + t, T - t)`.
pub fn ie_sum_mobius(view: &mut TableView, s: &VertexSet, t: &VertexSet) -> Result<f64> {
    match t.iter().next() {
        None => Ok(view.y(s)?.float),
        Some(x) => {
            let rest = t.without(x);
            Ok(ie_sum_mobius(view, s, &rest)? - ie_sum_mobius(view, &s.with(x), &rest)?)
        }
    }
}

/// A lifted ratio `numerator / denominator`; undefined when the denominator is not positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioCheck {
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: Option<f64>,
}

impl RatioCheck {
    fn new(terms: Vec<f64>, denominator: f64) -> Self {
        let numerator = compensated_sum(terms);
        let ratio = (denominator > 0.0).then(|| numerator / denominator);
        RatioCheck { numerator, denominator, ratio }
    }
}

/// `sum_i f(S + i, T) / f(S, T)`, where `i` in `S` contributes `f(S, T)` itself.
pub fn check_size(view: &mut TableView, s: &VertexSet, t: &VertexSet) -> Result<RatioCheck> {
    let base = lifted(view, s, t)?.value;
    let mut terms = Vec::with_capacity(view.params().n);
    for i in 0..view.params().n as Vertex {
        terms.push(if s.contains(i) { base } else { lifted(view, &s.with(i), t)?.value });
    }
    Ok(RatioCheck::new(terms, base))
}

/// `sum_e f(S + e, T) / f(S, T)` over all edges.
pub fn density_ratio(view: &mut TableView, g: &Hypergraph, s: &VertexSet, t: &VertexSet) -> Result<RatioCheck> {
    let base = lifted(view, s, t)?.value;
    let mut terms = Vec::with_capacity(g.m());
    for e in g.edges() {
        terms.push(lifted(view, &s.union_slice(e), t)?.value);
    }
    Ok(RatioCheck::new(terms, base))
}

/// Outcome of `y_{S+e} >= L^(-c) n^((1-beta)(alphaTilde - c)) y_S` over edges `e` not inside
/// the maximizer for `S`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PerEdge {
    pub checked: u64,
    /// Edges inside the maximizer, to which the inequality does not speak.
    pub skipped_inside: u64,
    /// Failures where the maximizer plus the edge exceeds the cap, so the inequality has no
    /// capped candidate to stand on.
    pub cap_inapplicable: u64,
    pub violations: Vec<EdgeViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeViolation {
    pub s: VertexSet,
    pub e: Vec<Vertex>,
}

impl PerEdge {
    fn absorb(&mut self, other: PerEdge) {
        self.checked += other.checked;
        self.skipped_inside += other.skipped_inside;
        self.cap_inapplicable += other.cap_inapplicable;
        self.violations.extend(other.violations);
    }
}

pub fn per_edge_check(view: &mut TableView, g: &Hypergraph, s: &VertexSet) -> Result<PerEdge> {
    let p = view.params().clone();
    let scale = view.scale();
    let best = view.best_set(s)?;
    let ys = view.y(s)?;
    let c = p.c as i64;
    let floor = ys.shift(&scale, c, (Rational::one() - p.beta) * (p.alpha_tilde - Rational::from_integer(c)));
    let mut out = PerEdge::default();
    for e in g.edges() {
        if e.iter().all(|&v| best.contains(v)) {
            out.skipped_inside += 1;
            continue;
        }
        out.checked += 1;
        let se = s.union_slice(e);
        if view.y(&se)?.ge_exact(&floor, &scale) {
            continue;
        }
        if best.union_slice(e).len() > p.tau {
            out.cap_inapplicable += 1;
        } else {
            out.violations.push(EdgeViolation { s: s.clone(), e: e.to_vec() });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityCheck {
    pub ratio: RatioCheck,
    pub per_edge: PerEdge,
}

pub fn check_density(view: &mut TableView, g: &Hypergraph, s: &VertexSet, t: &VertexSet) -> Result<DensityCheck> {
    Ok(DensityCheck { ratio: density_ratio(view, g, s, t)?, per_edge: per_edge_check(view, g, s)? })
}

/// `sum over edges e containing i of f(S + e, T) / f(S, T)`.
pub fn check_degree(view: &mut TableView, g: &Hypergraph, s: &VertexSet, i: Vertex, t: &VertexSet) -> Result<RatioCheck> {
    if !s.contains(i) {
        return Err(Error::Contract(format!("vertex {i} not in S={s}")));
    }
    let base = lifted(view, s, t)?.value;
    let mut terms = Vec::with_capacity(g.degree(i));
    for &j in g.incidence(i) {
        terms.push(lifted(view, &s.union_slice(g.edge(j as usize)), t)?.value);
    }
    Ok(RatioCheck::new(terms, base))
}

/// `(2 + 2 (8 ln n)^(10 tau'/alphaTilde) tau'^(3 + (c+1) tau'/alphaTilde)) n^beta`, as a natural log.
pub fn size_envelope_ln(p: &crate::solution::Params) -> f64 {
    let ln = (p.n as f64).ln();
    let at = to_f64(&p.alpha_tilde);
    let tp = p.tau_prime as f64;
    let inner = (8.0 * ln).ln() * 10.0 * tp / at + tp.ln() * (3.0 + (p.c as f64 + 1.0) * tp / at);
    // ln(2 + 2 e^inner) without overflow
    let big = std::f64::consts::LN_2 + inner;
    let body = if big > 700.0 { big } else { (2.0 + big.exp()).ln() };
    body + to_f64(&p.beta) * ln
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Mode {
    Exhaustive,
    /// `count` uniform pairs for the box and sandwich checks; the first `ratio_count` of
    /// them also get the size, density and degree checks.
    #[serde(rename_all = "camelCase")]
    Sampled { count: u64, seed: u64, ratio_count: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RatioStat {
    pub value: f64,
    /// `log_n(value)`.
    pub log_n: f64,
    pub s: VertexSet,
    pub t: VertexSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairViolation {
    pub s: VertexSet,
    pub t: VertexSet,
    pub value: f64,
    pub what: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub s: VertexSet,
    pub i: Vertex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintReport {
    pub mode: Mode,
    /// Pairs given the box and sandwich checks.
    pub enumerated: u64,
    /// Pairs given the ratio checks.
    pub ratio_checked: u64,
    pub y_empty_is_one: bool,
    pub max_size_ratio: Option<RatioStat>,
    pub min_density_ratio: Option<RatioStat>,
    pub min_degree_ratio: Option<RatioStat>,
    pub certified_k: Option<f64>,
    pub certified_p: Option<f64>,
    /// Written as `null` when it overflows.
    #[serde(deserialize_with = "overflowed_as_null")]
    pub envelope: f64,
    pub envelope_log_n: f64,
    pub size_within_envelope: bool,
    pub per_edge: PerEdge,
    pub box_violations: Vec<PairViolation>,
    pub sandwich_violations: Vec<PairViolation>,
    pub monotonicity_violations: Vec<MonotonicityViolation>,
    /// Table entries that differ from the values recomputed from the graph.
    pub mismatches: Vec<VertexSet>,
    pub provenance: Provenance,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceViolation {
    pub s: VertexSet,
    pub i: Vertex,
    pub what: String,
}

/// Consequences of optimality linking `S_max` (optimum for `S`) and `S^i_max` (for `S + i`).
/// Checked for every table set `S` below the top level and every `i` outside `S_max`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub checked: u64,
    /// Pairs with `|S_max| = tau`, where `S_max + i` is not a candidate for `S + i`.
    pub growth_inapplicable: u64,
    /// `alphaTilde |E(S^i_max) \ E(S_max)| - |S^i_max \ S_max| >= -1` failed.
    pub growth_violations: Vec<ProvenanceViolation>,
    /// Pairs within the size limits of the balance check.
    pub balance_checked: u64,
    /// New edge sets with a subset exactly as dense as `alphaTilde` allows, i.e. a tie
    /// between `S_max` and a larger optimum.
    pub balance_ties: u64,
    /// New edge sets with a subset denser than `alphaTilde`, contradicting optimality.
    pub balance_violations: Vec<ProvenanceViolation>,
}

impl Provenance {
    fn absorb(&mut self, other: Provenance) {
        self.checked += other.checked;
        self.growth_inapplicable += other.growth_inapplicable;
        self.growth_violations.extend(other.growth_violations);
        self.balance_checked += other.balance_checked;
        self.balance_ties += other.balance_ties;
        self.balance_violations.extend(other.balance_violations);
    }
}

fn provenance_for(g: &Hypergraph, p: &Params, s: &VertexSet, best: &BTreeMap<VertexSet, VertexSet>) -> Result<Provenance> {
    let mut out = Provenance::default();
    let s_max = &best[s];
    let at = p.alpha_tilde;
    for i in 0..p.n as Vertex {
        if s_max.contains(i) {
            continue;
        }
        let s_i = &best[&s.with(i)];
        out.checked += 1;
        let fresh: Vec<Vec<Vertex>> = {
            let mut idx: Vec<u32> = s_i.iter().flat_map(|v| g.incidence(v).iter().copied()).collect();
            idx.sort_unstable();
            idx.dedup();
            idx.into_iter()
                .map(|j| g.edge(j as usize))
                .filter(|e| e.iter().all(|&v| s_i.contains(v)) && !e.iter().all(|&v| s_max.contains(v)))
                .map(|e| e.to_vec())
                .collect()
        };
        let outside = s_i.difference(s_max).len();
        if s_max.len() >= p.tau {
            out.growth_inapplicable += 1;
        } else if at * Rational::from_integer(fresh.len() as i64) - Rational::from_integer(outside as i64) < Rational::from_integer(-1) {
            out.growth_violations.push(ProvenanceViolation { s: s.clone(), i, what: format!("{} new edges on {outside} new vertices", fresh.len()) });
        }
        let t = EdgeSet::new(p.c, fresh)?;
        if s_max.len() <= p.tau_prime && t.support().difference(s_max).len() <= p.tau - p.tau_prime && t.len() <= BALANCE_LIMIT {
            out.balance_checked += 1;
            match balance_slack(&t, s_max, at)? {
                Some(x) if x < Rational::zero() => {
                    out.balance_violations.push(ProvenanceViolation { s: s.clone(), i, what: format!("balance slack {x}") });
                }
                Some(x) if x == Rational::zero() => out.balance_ties += 1,
                _ => {}
            }
        }
    }
    Ok(out)
}

fn overflowed_as_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl ConstraintReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Every disjoint `(S, T)` with `|S| + |T| <= r`, in a fixed order.
pub fn all_pairs(n: usize, r: usize) -> Result<Vec<(VertexSet, VertexSet)>> {
    let total = pair_count(n, r);
    if total > PAIR_LIMIT {
        return Err(Error::Capacity(format!("{total} pairs exceed {PAIR_LIMIT}")));
    }
    let mut out = Vec::with_capacity(total as usize);
    for k in 0..=r {
        crate::hgraph::for_each_combination(n, k, |comb| {
            for mask in 0..1u32 << k {
                let (mut s, mut t) = (Vec::new(), Vec::new());
                for (j, &v) in comb.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        t.push(v);
                    } else {
                        s.push(v);
                    }
                }
                out.push((VertexSet::from_sorted(&s), VertexSet::from_sorted(&t)));
            }
        });
    }
    Ok(out)
}

pub fn pair_count(n: usize, r: usize) -> i64 {
    (0..=r).map(|k| binom(n as i64, k as i64).saturating_mul(1 << k)).fold(0i64, |a, x| a.saturating_add(x))
}

/// Uniform draws from the disjoint pairs with `|S| + |T| <= r`.
pub fn sample_pairs(n: usize, r: usize, count: u64, seed: u64) -> Vec<(VertexSet, VertexSet)> {
    let weights: Vec<f64> = (0..=r).map(|k| binom(n as i64, k as i64) as f64 * (1u64 << k) as f64).collect();
    let total: f64 = weights.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let mut x = rng.gen::<f64>() * total;
        let mut k = r;
        for (j, w) in weights.iter().enumerate() {
            if x < *w {
                k = j;
                break;
            }
            x -= w;
        }
        let members = sample(&mut rng, n, k);
        let (mut s, mut t) = (Vec::new(), Vec::new());
        for v in members.iter() {
            if rng.gen::<bool>() {
                t.push(v as Vertex);
            } else {
                s.push(v as Vertex);
            }
        }
        out.push((VertexSet::from_vec(s), VertexSet::from_vec(t)));
    }
    out
}

struct PairRatios {
    size: RatioCheck,
    density: RatioCheck,
    degree: Vec<(Vertex, RatioCheck)>,
    per_edge: Option<PerEdge>,
}

fn ratio_pair(view: &mut TableView, g: &Hypergraph, s: &VertexSet, t: &VertexSet, with_edges: bool) -> Result<PairRatios> {
    let size = check_size(view, s, t)?;
    let density = density_ratio(view, g, s, t)?;
    let mut degree = Vec::new();
    for i in s.iter() {
        degree.push((i, check_degree(view, g, s, i, t)?));
    }
    let per_edge = if with_edges { Some(per_edge_check(view, g, s)?) } else { None };
    Ok(PairRatios { size, density, degree, per_edge })
}

fn stat(value: f64, n: usize, s: &VertexSet, t: &VertexSet, i: Option<Vertex>) -> RatioStat {
    RatioStat { value, log_n: value.ln() / (n as f64).ln(), s: s.clone(), t: t.clone(), i }
}

/// Runs every check over the chosen pairs.
///
/// Table entries carrying a recorded maximizer are trusted; the rest are recomputed from the
/// graph and differences reported as mismatches. Ratio checks run in parallel over chunks
/// of pairs, each chunk with its own copy of the cache; results do not depend on the split.
pub fn verify_all(g: &Hypergraph, sol: &PseudoSolution, mode: &Mode) -> Result<ConstraintReport> {
    let p = &sol.params;
    if g.n() != p.n || g.c() != p.c {
        return Err(Error::Contract("graph does not match the table".into()));
    }
    let scale = p.scale();
    let mut base = PhiOracle::new(g, p.alpha_tilde, p.tau);
    let mut mismatches = Vec::new();
    for (s, e) in &sol.entries {
        match &e.best {
            Some(best) => base.seed(s, e.phi_star, best.clone()),
            None => {
                let fresh = p.y_from_phi(s.len(), base.phi_star(s));
                if fresh.cmp_exact(&e.y, &scale) != std::cmp::Ordering::Equal {
                    mismatches.push(s.clone());
                }
            }
        }
    }
    let (pairs, ratio_count) = match mode {
        Mode::Exhaustive => {
            let pairs = all_pairs(p.n, p.r)?;
            let k = pairs.len();
            (pairs, k)
        }
        Mode::Sampled { count, seed, ratio_count } => {
            (sample_pairs(p.n, p.r, *count, *seed), (*ratio_count).min(*count) as usize)
        }
    };

    // Box and sandwich only read the table.
    let mut view = TableView::new(sol, None);
    let mut box_violations = Vec::new();
    let mut sandwich_violations = Vec::new();
    for (s, t) in &pairs {
        let term = lifted(&mut view, s, t)?;
        let tol = term.tolerance();
        if term.value < -tol || term.value > 1.0 + tol {
            box_violations.push(PairViolation { s: s.clone(), t: t.clone(), value: term.value, what: "outside [0, 1]".into() });
        }
        let ys = view.y(s)?.float;
        if term.value > ys * (1.0 + SANDWICH_TOL) || term.value < ys / 2.0 * (1.0 - SANDWICH_TOL) {
            sandwich_violations.push(PairViolation { s: s.clone(), t: t.clone(), value: term.value, what: format!("y_S={ys}") });
        }
    }

    let ratio_pairs = &pairs[..ratio_count];
    let mut seen = BTreeSet::new();
    let first_of_s: Vec<bool> = ratio_pairs.iter().map(|(s, _)| seen.insert(s.clone())).collect();
    let jobs: Vec<usize> = (0..ratio_pairs.len()).collect();
    let chunk = ratio_pairs.len().div_ceil(rayon::current_num_threads()).max(1);
    let results: Vec<Result<Vec<PairRatios>>> = jobs
        .par_chunks(chunk)
        .map(|idx| {
            let mut view = TableView::with_oracle(sol, base.fork());
            idx.iter().map(|&k| ratio_pair(&mut view, g, &ratio_pairs[k].0, &ratio_pairs[k].1, first_of_s[k])).collect()
        })
        .collect();
    let mut ratios = Vec::with_capacity(ratio_pairs.len());
    for r in results {
        ratios.extend(r?);
    }

    let mut max_size: Option<RatioStat> = None;
    let mut min_density: Option<RatioStat> = None;
    let mut min_degree: Option<RatioStat> = None;
    let mut per_edge = PerEdge::default();
    for ((s, t), r) in ratio_pairs.iter().zip(ratios) {
        for (check, name) in [(&r.size, "size"), (&r.density, "density")] {
            if check.ratio.is_none() && check.denominator <= 0.0 {
                let what = format!("{name} ratio undefined, denominator {}", check.denominator);
                if !box_violations.iter().any(|v| &v.s == s && &v.t == t) {
                    box_violations.push(PairViolation { s: s.clone(), t: t.clone(), value: check.denominator, what });
                }
            }
        }
        if let Some(v) = r.size.ratio {
            if max_size.as_ref().is_none_or(|m| v > m.value) {
                max_size = Some(stat(v, p.n, s, t, None));
            }
        }
        if let Some(v) = r.density.ratio {
            if min_density.as_ref().is_none_or(|m| v < m.value) {
                min_density = Some(stat(v, p.n, s, t, None));
            }
        }
        for (i, d) in &r.degree {
            if let Some(v) = d.ratio {
                if min_degree.as_ref().is_none_or(|m| v < m.value) {
                    min_degree = Some(stat(v, p.n, s, t, Some(*i)));
                }
            }
        }
        if let Some(pe) = r.per_edge {
            per_edge.absorb(pe);
        }
    }
    per_edge.violations.sort();

    let mut best = BTreeMap::new();
    for (s, e) in &sol.entries {
        best.insert(s.clone(), e.best.clone().unwrap_or_else(|| base.best_set(s)));
    }
    let lower: Vec<&VertexSet> = sol.entries.keys().filter(|s| s.len() < p.r).collect();
    let mut provenance = Provenance::default();
    for part in lower.par_iter().map(|s| provenance_for(g, p, s, &best)).collect::<Vec<_>>() {
        provenance.absorb(part?);
    }

    let monotonicity_violations: Vec<MonotonicityViolation> =
        sol.monotonicity_violations().into_iter().map(|(s, i)| MonotonicityViolation { s, i }).collect();
    let envelope_ln = size_envelope_ln(p);
    let size_within_envelope = max_size.as_ref().is_none_or(|m| m.value.ln() <= envelope_ln);
    let y0 = sol.get(&VertexSet::new()).ok_or_else(|| Error::Contract("no entry for the empty set".into()))?;
    let y_empty_is_one = y0.sign == 1 && y0.a == 0 && y0.rho == Rational::from_integer(0);
    let feasible = box_violations.is_empty()
        && sandwich_violations.is_empty()
        && monotonicity_violations.is_empty()
        && per_edge.violations.is_empty()
        && mismatches.is_empty()
        && provenance.growth_violations.is_empty()
        && provenance.balance_violations.is_empty();
    Ok(ConstraintReport {
        mode: mode.clone(),
        enumerated: pairs.len() as u64,
        ratio_checked: ratio_count as u64,
        y_empty_is_one,
        certified_k: max_size.as_ref().map(|m| m.value.ceil()),
        certified_p: min_density.as_ref().map(|m| m.value.floor()),
        max_size_ratio: max_size,
        min_density_ratio: min_density,
        min_degree_ratio: min_degree,
        envelope: envelope_ln.exp(),
        envelope_log_n: envelope_ln / (p.n as f64).ln(),
        size_within_envelope,
        per_edge,
        box_violations,
        sandwich_violations,
        monotonicity_violations,
        mismatches,
        provenance,
        feasible,
    })
}
