//! Concentration of the size-constraint polynomial `F`.
//!
//! `F` sums `n^((1-beta)(alphaTilde |T| - |v(T) \ S_max|))` over edge sets `T` hanging off an
//! optimal set `S_max` that satisfy condition (*). Values and expectations are kept exact as
//! sums of rational powers of `n`.

use crate::error::{Error, Result};
use crate::hgraph::{for_each_combination, sample_gnp, substream, Hypergraph, Vertex, VertexSet};
use crate::logvalue::compensated_sum;
use crate::rational::{fmt_rational, int, to_f64, Rational};
use crate::solution::Params;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

/// Largest `|T|` the subset checks enumerate.
pub const BALANCE_LIMIT: usize = 20;
/// Largest degree `F` is enumerated to.
pub const DEGREE_LIMIT: usize = 6;
/// Search nodes an enumeration may visit.
pub const NODE_LIMIT: u64 = 50_000_000;

/// A set of c-sets, not necessarily edges of any graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSet {
    edges: Vec<Vec<Vertex>>,
}

impl EdgeSet {
    pub fn new(c: usize, edges: Vec<Vec<Vertex>>) -> Result<Self> {
        let mut edges: Vec<Vec<Vertex>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e
            })
            .collect();
        for e in &edges {
            if e.len() != c || e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parameter(format!("{e:?} is not a {c}-set")));
            }
        }
        edges.sort();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter("duplicate edge".into()));
        }
        Ok(EdgeSet { edges })
    }

    pub fn empty() -> Self {
        EdgeSet::default()
    }

    pub fn edges(&self) -> &[Vec<Vertex>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `v(T)`.
    pub fn support(&self) -> VertexSet {
        VertexSet::from_vec(self.edges.iter().flatten().copied().collect())
    }
}

impl Serialize for EdgeSet {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.edges.serialize(ser)
    }
}

/// `sum count * n^exponent` with rational exponents and integer counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PowerSum {
    terms: BTreeMap<Rational, BigUint>,
}

impl PowerSum {
    pub fn zero() -> Self {
        PowerSum::default()
    }

    pub fn one() -> Self {
        let mut s = PowerSum::zero();
        s.add(Rational::zero(), BigUint::one());
        s
    }

    pub fn add(&mut self, exponent: Rational, count: BigUint) {
        if count.is_zero() {
            return;
        }
        *self.terms.entry(exponent).or_default() += count;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rational, &BigUint)> {
        self.terms.iter()
    }

    pub fn eval(&self, n: u64) -> f64 {
        let ln_n = (n as f64).ln();
        compensated_sum(self.terms.iter().map(|(e, k)| (k.to_f64().unwrap_or(f64::INFINITY).ln() + to_f64(e) * ln_n).exp()))
    }
}

impl Serialize for PowerSum {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            exponent: String,
            count: String,
        }
        let mut seq = ser.serialize_seq(Some(self.terms.len()))?;
        for (e, k) in &self.terms {
            seq.serialize_element(&Term { exponent: fmt_rational(e), count: k.to_string() })?;
        }
        seq.end()
    }
}

fn inside(e: &[Vertex], s: &VertexSet) -> bool {
    e.iter().all(|&v| s.contains(v))
}

/// `min |v(T') \ S_max| - alphaTilde |T'|` over nonempty `T' ⊆ T`, or `None` for empty `T`.
pub fn balance_slack(t: &EdgeSet, s_max: &VertexSet, alpha_tilde: Rational) -> Result<Option<Rational>> {
    if t.len() > BALANCE_LIMIT {
        return Err(Error::Capacity(format!("|T|={} exceeds {BALANCE_LIMIT}", t.len())));
    }
    if t.edges.iter().any(|e| inside(e, s_max)) {
        return Err(Error::Contract("T has an edge inside S_max".into()));
    }
    if t.is_empty() {
        return Ok(None);
    }
    let outside: Vec<Vertex> = t.support().difference(s_max).as_slice().to_vec();
    if outside.len() > 128 {
        return Err(Error::Capacity(format!("{} outside vertices exceed 128", outside.len())));
    }
    let masks: Vec<u128> = t
        .edges
        .iter()
        .map(|e| e.iter().filter_map(|v| outside.binary_search(v).ok()).fold(0u128, |m, i| m | 1 << i))
        .collect();
    let mut best: Option<Rational> = None;
    for sub in 1u32..1 << t.len() {
        let mut cover = 0u128;
        for (j, m) in masks.iter().enumerate() {
            if sub >> j & 1 == 1 {
                cover |= m;
            }
        }
        let slack = int(cover.count_ones() as i64) - alpha_tilde * int(sub.count_ones() as i64);
        if best.is_none_or(|b| slack < b) {
            best = Some(slack);
        }
    }
    Ok(best)
}

/// Every nonempty `T' ⊆ T` has `|v(T') \ S_max| > alphaTilde |T'|`.
pub fn strictly_balanced(t: &EdgeSet, s_max: &VertexSet, alpha_tilde: Rational) -> Result<bool> {
    Ok(balance_slack(t, s_max, alpha_tilde)?.is_none_or(|s| s > Rational::zero()))
}

/// Condition (*) for the hypergraph `(s_star, t)`. Edges of `t` inside `s_max` are ignored.
pub fn satisfies_star(s_star: &VertexSet, t: &EdgeSet, s_max: &VertexSet, alpha_tilde: Rational) -> Result<bool> {
    if t.edges.iter().any(|e| !inside(e, s_star)) {
        return Err(Error::Contract("T has an edge leaving S*".into()));
    }
    if !s_max.is_subset(s_star) {
        return Ok(false);
    }
    let rest = EdgeSet { edges: t.edges.iter().filter(|e| !inside(e, s_max)).cloned().collect() };
    let extra = s_star.difference(s_max);
    if alpha_tilde * int(rest.len() as i64) - int(extra.len() as i64) < int(-1) {
        return Ok(false);
    }
    let covered = rest.support();
    if extra.iter().any(|v| !covered.contains(v)) {
        return Ok(false);
    }
    strictly_balanced(&rest, s_max, alpha_tilde)
}

/// Depth-first walk over strictly balanced edge sets drawn from a pool.
struct Walk<'a> {
    pool: &'a [Vec<Vertex>],
    s_max: &'a VertexSet,
    /// alphaTilde = a / b
    a: i64,
    b: i64,
    t_max: usize,
    /// Prune and filter on the third bullet of (*).
    third: bool,
    /// Vertices every reported set must touch.
    cover: Vec<Vertex>,
    chosen: Vec<Vec<Vertex>>,
    count: FxHashMap<Vertex, u32>,
    outside: usize,
    nodes: u64,
}

impl<'a> Walk<'a> {
    fn new(pool: &'a [Vec<Vertex>], s_max: &'a VertexSet, alpha_tilde: Rational, t_max: usize) -> Self {
        Walk {
            pool,
            s_max,
            a: *alpha_tilde.numer(),
            b: *alpha_tilde.denom(),
            t_max,
            third: true,
            cover: Vec::new(),
            chosen: Vec::new(),
            count: FxHashMap::default(),
            outside: 0,
            nodes: 0,
        }
    }

    /// Adds `e` if every new subset containing it stays strictly balanced.
    fn push(&mut self, e: &[Vertex]) -> bool {
        let m = self.chosen.len();
        let mut verts: Vec<Vertex> = Vec::with_capacity(e.len() * (m + 1));
        for sub in 0u32..1 << m {
            verts.clear();
            verts.extend(e.iter().filter(|&&v| !self.s_max.contains(v)));
            for (j, f) in self.chosen.iter().enumerate() {
                if sub >> j & 1 == 1 {
                    verts.extend(f.iter().filter(|&&v| !self.s_max.contains(v)));
                }
            }
            verts.sort_unstable();
            verts.dedup();
            let size = sub.count_ones() as i64 + 1;
            if verts.len() as i64 * self.b <= self.a * size {
                return false;
            }
        }
        self.force(e);
        true
    }

    /// Adds `e` without checking.
    fn force(&mut self, e: &[Vertex]) {
        for &v in e {
            if !self.s_max.contains(v) {
                let k = self.count.entry(v).or_insert(0);
                if *k == 0 {
                    self.outside += 1;
                }
                *k += 1;
            }
        }
        self.chosen.push(e.to_vec());
    }

    fn pop(&mut self) {
        let e = self.chosen.pop().unwrap();
        for v in e {
            if let Some(k) = self.count.get_mut(&v) {
                *k -= 1;
                if *k == 0 {
                    self.outside -= 1;
                }
            }
        }
    }

    fn run(&mut self, visit: &mut dyn FnMut(&[Vec<Vertex>], usize)) -> Result<()> {
        self.dfs(0, visit)
    }

    fn dfs(&mut self, from: usize, visit: &mut dyn FnMut(&[Vec<Vertex>], usize)) -> Result<()> {
        self.nodes += 1;
        if self.nodes > NODE_LIMIT {
            return Err(Error::Capacity(format!("edge-set enumeration passed {NODE_LIMIT} nodes")));
        }
        let len = self.chosen.len();
        let outside = self.outside as i64;
        // Later edges only add vertices, so the third bullet must be reachable at t_max.
        if self.third && self.a * self.t_max as i64 - self.b * outside < -self.b {
            return Ok(());
        }
        let uncovered = self.cover.iter().filter(|v| self.count.get(v).is_none_or(|&k| k == 0)).count();
        let c = self.pool.first().map_or(1, |e| e.len());
        if uncovered > c * (self.t_max - len) {
            return Ok(());
        }
        if uncovered == 0 && (!self.third || self.a * len as i64 - self.b * outside >= -self.b) {
            visit(&self.chosen, self.outside);
        }
        if len == self.t_max {
            return Ok(());
        }
        for i in from..self.pool.len() {
            if self.push(&self.pool[i]) {
                self.dfs(i + 1, visit)?;
                self.pop();
            }
        }
        Ok(())
    }
}

fn check_degree(t_max: usize) -> Result<()> {
    if t_max > DEGREE_LIMIT {
        return Err(Error::Capacity(format!("tMax={t_max} exceeds {DEGREE_LIMIT}")));
    }
    Ok(())
}

/// `F` on `g`: the sum over `T ⊆ E_G` with no edge inside `s_max`, `|T| <= t_max` and
/// `(v(T) ∪ S_max, T)` satisfying (*). The empty set contributes 1.
pub fn f_value(g: &Hypergraph, s_max: &VertexSet, params: &Params, t_max: usize) -> Result<PowerSum> {
    check_degree(t_max)?;
    let pool: Vec<Vec<Vertex>> = g.edges().filter(|e| !inside(e, s_max)).map(|e| e.to_vec()).collect();
    let damp = Rational::one() - params.beta;
    let at = params.alpha_tilde;
    let mut counts: FxHashMap<(usize, usize), u64> = FxHashMap::default();
    let mut walk = Walk::new(&pool, s_max, at, t_max);
    walk.run(&mut |t, outside| *counts.entry((t.len(), outside)).or_insert(0) += 1)?;
    let mut sum = PowerSum::zero();
    for ((len, outside), k) in counts {
        sum.add(damp * (at * int(len as i64) - int(outside as i64)), BigUint::from(k));
    }
    Ok(sum)
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// All c-subsets of `verts` that are not inside `s_max` and not in `skip`.
fn pool_on(verts: &[Vertex], c: usize, s_max: &VertexSet, skip: &[Vec<Vertex>]) -> Vec<Vec<Vertex>> {
    let mut pool = Vec::new();
    for_each_combination(verts.len(), c, |idx| {
        let mut e: Vec<Vertex> = idx.iter().map(|&i| verts[i as usize]).collect();
        e.sort_unstable();
        if !inside(&e, s_max) && !skip.contains(&e) {
            pool.push(e);
        }
    });
    pool
}

/// `E[F_{T'}]` over `G_c(n, n^-alpha)`: the expectation of `F` with every edge of `t_prime`
/// set to one and the terms missing any of them dropped.
///
/// Edge sets `T ⊇ T'` are grouped by the number `b` of vertices they add outside
/// `S_max ∪ v(T')`. Each group is enumerated once on `b` fixed stand-in vertices and counted
/// `C(n - |S_max ∪ v(T')|, b)` times.
pub fn truncated_expectation(params: &Params, s_max: &VertexSet, t_prime: &EdgeSet, t_max: usize) -> Result<PowerSum> {
    check_degree(t_max)?;
    let (n, c) = (params.n, params.c);
    if s_max.iter().chain(t_prime.support().iter()).any(|v| v as usize >= n) {
        return Err(Error::Parameter(format!("vertex outside 0..{n}")));
    }
    if t_prime.len() > t_max || t_prime.edges.iter().any(|e| inside(e, s_max)) {
        return Ok(PowerSum::zero());
    }
    let at = params.alpha_tilde;
    if !strictly_balanced(t_prime, s_max, at)? {
        return Ok(PowerSum::zero());
    }
    let base = s_max.union(&t_prime.support());
    let z = base.len() - s_max.len();
    let free = n - base.len();
    // alphaTilde |T| - (z + b) >= -1 with |T| <= t_max
    let reach = (at * int(t_max as i64) + int(1)).floor().to_integer() - z as i64;
    let b_max = (reach.max(-1) as usize).min(c * (t_max - t_prime.len())).min(free);
    if reach < 0 {
        return Ok(PowerSum::zero());
    }
    let damp = Rational::one() - params.beta;
    let fixed = t_prime.len();
    let mut sum = PowerSum::zero();
    for b in 0..=b_max {
        let fresh: Vec<Vertex> = (0..b as Vertex).map(|j| n as Vertex + j).collect();
        let verts: Vec<Vertex> = base.iter().chain(fresh.iter().copied()).collect();
        let pool = pool_on(&verts, c, s_max, &t_prime.edges);
        let mut walk = Walk::new(&pool, s_max, at, t_max);
        walk.cover = fresh;
        for e in &t_prime.edges {
            walk.force(e);
        }
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        walk.run(&mut |t, outside| {
            debug_assert_eq!(outside, z + b);
            *counts.entry(t.len()).or_insert(0) += 1;
        })?;
        let ways = binomial(free, b);
        for (len, k) in counts {
            let added = int((len - fixed) as i64);
            let exponent = damp * (at * int(len as i64) - int((z + b) as i64)) - params.alpha * added;
            sum.add(exponent, &ways * BigUint::from(k));
        }
    }
    Ok(sum)
}

/// `max_{T'} E[F_{T'}]` with the maximizing `T'`, over strictly balanced `T'` placed on
/// `S_max` and the lowest-numbered vertices outside it. Expectations depend only on the
/// shape of `T'`, so this covers every `T'` up to relabelling. Values compare in floating point.
pub fn max_truncated_expectation(params: &Params, s_max: &VertexSet, t_max: usize) -> Result<(PowerSum, EdgeSet)> {
    check_degree(t_max)?;
    let (n, c) = (params.n, params.c);
    let others: Vec<Vertex> = (0..n as Vertex).filter(|&v| !s_max.contains(v)).collect();
    let mut best = (truncated_expectation(params, s_max, &EdgeSet::empty(), t_max)?, EdgeSet::empty());
    let mut best_value = best.0.eval(n as u64);
    for w in 1..=(c * t_max).min(others.len()) {
        let fresh = &others[..w];
        let verts: Vec<Vertex> = s_max.iter().chain(fresh.iter().copied()).collect();
        let pool = pool_on(&verts, c, s_max, &[]);
        let mut walk = Walk::new(&pool, s_max, params.alpha_tilde, t_max);
        walk.third = false;
        walk.cover = fresh.to_vec();
        let mut shapes: Vec<Vec<Vec<Vertex>>> = Vec::new();
        walk.run(&mut |t, _| shapes.push(t.to_vec()))?;
        for edges in shapes {
            let t = EdgeSet { edges };
            let e = truncated_expectation(params, s_max, &t, t_max)?;
            let value = e.eval(n as u64);
            if value > best_value {
                best_value = value;
                best = (e, t);
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KimVuParams {
    pub t: u32,
    pub lambda: f64,
    /// Largest truncated expectation.
    pub e: f64,
    /// Expectation of the polynomial itself.
    pub e0: f64,
}

/// Deviation `E (8 lambda)^t sqrt(t!)` and tail bound `2 e^2 e^-lambda n^(t-1)`, clamped to 1.
pub fn kimvu_threshold(kv: &KimVuParams, n: usize) -> Result<(f64, f64)> {
    if kv.t < 1 || kv.lambda.is_nan() || kv.lambda <= 1.0 {
        return Err(Error::Parameter(format!("need t >= 1 and lambda > 1, got t={} lambda={}", kv.t, kv.lambda)));
    }
    let t = kv.t as f64;
    let ln_fact: f64 = (1..=kv.t).map(|i| (i as f64).ln()).sum();
    let deviation = kv.e * (t * (8.0 * kv.lambda).ln() + 0.5 * ln_fact).exp();
    let ln_prob = 2f64.ln() + 2.0 - kv.lambda + (t - 1.0) * (n as f64).ln();
    Ok((deviation, ln_prob.exp().min(1.0)))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct McSummary {
    pub params: Params,
    pub s_max: String,
    pub t_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub lambda: f64,
    pub mean: f64,
    pub variance: f64,
    pub max: f64,
    /// Exact `E[F]`.
    pub expectation: PowerSum,
    pub expectation_value: f64,
    pub max_truncated: f64,
    pub max_truncated_at: EdgeSet,
    pub deviation: f64,
    pub prob_bound: f64,
    /// Fraction of samples with `F > E[F] + deviation`.
    pub exceed_fraction: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl McSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn values_csv(&self) -> String {
        let mut out = String::from("sample,seed,f\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{},{v:e}\n", substream(self.seed, i as u64)));
        }
        out
    }
}

/// Samples `G_c(n, n^-alpha)` `samples` times and compares `F` with its exact expectation.
pub fn mc_concentration(params: &Params, s_max: &VertexSet, t_max: usize, samples: usize, seed: u64, lambda: f64) -> Result<McSummary> {
    if samples < 30 {
        return Err(Error::Parameter(format!("need at least 30 samples, got {samples}")));
    }
    check_degree(t_max)?;
    let n = params.n;
    let prob = params.prob();
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let g = sample_gnp(n, params.c, prob, substream(seed, i as u64))?;
            Ok(f_value(&g, s_max, params, t_max)?.eval(n as u64))
        })
        .collect::<Result<_>>()?;
    let expectation = truncated_expectation(params, s_max, &EdgeSet::empty(), t_max)?;
    let expectation_value = expectation.eval(n as u64);
    let (top, top_at) = max_truncated_expectation(params, s_max, t_max)?;
    let max_truncated = top.eval(n as u64);
    let kv = KimVuParams { t: t_max.max(1) as u32, lambda, e: max_truncated, e0: expectation_value };
    let (deviation, prob_bound) = kimvu_threshold(&kv, n)?;
    let count = samples as f64;
    let mean = compensated_sum(values.iter().copied()) / count;
    let variance = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (count - 1.0);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exceed = values.iter().filter(|&&v| v > expectation_value + deviation).count();
    Ok(McSummary {
        params: params.clone(),
        s_max: s_max.to_token(),
        t_max,
        samples,
        seed,
        lambda,
        mean,
        variance,
        max,
        expectation,
        expectation_value,
        max_truncated,
        max_truncated_at: top_at,
        deviation,
        prob_bound,
        exceed_fraction: exceed as f64 / count,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn es(edges: &[&[Vertex]]) -> EdgeSet {
        EdgeSet::new(edges.first().map_or(2, |e| e.len()), edges.iter().map(|e| e.to_vec()).collect()).unwrap()
    }

    fn vs(v: &[Vertex]) -> VertexSet {
        VertexSet::from_slice(v)
    }

    fn params(n: usize, alpha: Rational, beta: Rational, alpha_tilde: Rational) -> Params {
        Params { n, c: 2, alpha, beta, alpha_tilde, tau: 8, tau_prime: 4, r: 2, l: int(16) }
    }

    #[test]
    fn balance_examples() {
        let at = rat(4, 5);
        assert!(strictly_balanced(&EdgeSet::empty(), &vs(&[0]), at).unwrap());
        assert!(strictly_balanced(&es(&[&[1, 2]]), &vs(&[0]), at).unwrap());
        let k4: Vec<Vec<Vertex>> = vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]];
        let k4 = EdgeSet::new(2, k4).unwrap();
        assert!(!strictly_balanced(&k4, &vs(&[0]), at).unwrap());
        assert_eq!(balance_slack(&k4, &vs(&[0]), at).unwrap(), Some(int(4) - at * int(6)));
        let big = EdgeSet::new(2, (0..21).map(|i| vec![i, 100 + i]).collect()).unwrap();
        assert!(matches!(strictly_balanced(&big, &VertexSet::new(), at), Err(Error::Capacity(_))));
        assert!(matches!(strictly_balanced(&es(&[&[0, 1]]), &vs(&[0, 1]), at), Err(Error::Contract(_))));
    }

    #[test]
    fn star_examples() {
        let s = vs(&[0, 1]);
        assert!(satisfies_star(&s, &EdgeSet::empty(), &s, rat(1, 2)).unwrap());
        assert!(!satisfies_star(&vs(&[0, 1, 2, 3]), &es(&[&[0, 2]]), &s, rat(1, 2)).unwrap());
        // alphaTilde - 2 = -3/2 < -1
        assert!(!satisfies_star(&vs(&[0, 1, 2, 3]), &es(&[&[2, 3]]), &s, rat(1, 2)).unwrap());
        assert!(satisfies_star(&vs(&[0, 1, 2]), &es(&[&[0, 2], &[0, 1]]), &s, rat(1, 2)).unwrap());
    }

    #[test]
    fn f_value_small_cases() {
        let p = params(16, rat(1, 2), rat(1, 2), rat(9, 20));
        let empty = Hypergraph::empty(16, 2);
        assert_eq!(f_value(&empty, &VertexSet::new(), &p, 3).unwrap(), PowerSum::one());
        let one = Hypergraph::new(16, 2, vec![vec![3, 4]]).unwrap();
        assert_eq!(f_value(&one, &vs(&[0]), &p, 3).unwrap(), PowerSum::one());
        let p1 = params(16, rat(3, 2), rat(1, 2), int(1));
        let mut want = PowerSum::one();
        want.add(rat(-1, 2), BigUint::one());
        assert_eq!(f_value(&one, &vs(&[0]), &p1, 3).unwrap(), want);
        assert!(matches!(f_value(&one, &vs(&[0]), &p1, 7), Err(Error::Capacity(_))));
    }

    /// Every subset of `pool` with at most `t_max` edges, checked directly against (*).
    fn brute_f(pool: &[Vec<Vertex>], s_max: &VertexSet, p: &Params, t_max: usize, weight: &dyn Fn(usize) -> Rational) -> PowerSum {
        let mut sum = PowerSum::zero();
        let mut stack: Vec<(usize, Vec<Vec<Vertex>>)> = vec![(0, Vec::new())];
        while let Some((from, t)) = stack.pop() {
            let t_set = EdgeSet { edges: t.clone() };
            let star = s_max.union(&t_set.support());
            if satisfies_star(&star, &t_set, s_max, p.alpha_tilde).unwrap() {
                let outside = star.len() - s_max.len();
                let e = (Rational::one() - p.beta) * (p.alpha_tilde * int(t.len() as i64) - int(outside as i64)) + weight(t.len());
                sum.add(e, BigUint::one());
            }
            if t.len() < t_max {
                for (i, e) in pool.iter().enumerate().skip(from) {
                    let mut u = t.clone();
                    u.push(e.clone());
                    stack.push((i + 1, u));
                }
            }
        }
        sum
    }

    #[test]
    fn f_value_matches_brute_force() {
        let p = params(16, rat(1, 2), rat(1, 2), rat(9, 20));
        for seed in 0..6 {
            let g = sample_gnp(16, 2, p.prob(), seed).unwrap();
            for s in [VertexSet::new(), vs(&[0]), vs(&[0, 1, 2])] {
                let pool: Vec<Vec<Vertex>> = g.edges().filter(|e| !inside(e, &s)).map(|e| e.to_vec()).collect();
                for t_max in 0..=2 {
                    let want = brute_f(&pool, &s, &p, t_max, &|_| Rational::zero());
                    assert_eq!(f_value(&g, &s, &p, t_max).unwrap(), want, "seed {seed} s {s} t {t_max}");
                }
            }
        }
    }

    #[test]
    fn expectation_small_cases() {
        let p = params(8, int(1), rat(1, 2), rat(1, 2));
        let s = VertexSet::new();
        assert_eq!(truncated_expectation(&p, &s, &EdgeSet::empty(), 0).unwrap(), PowerSum::one());
        // A lone edge has alphaTilde - 2 = -3/2 < -1, so only the empty term survives.
        assert_eq!(truncated_expectation(&p, &s, &EdgeSet::empty(), 1).unwrap(), PowerSum::one());
        // With alphaTilde = 1 the edge term C(8,2) 8^-alpha 8^((1-beta)(1-2)) appears.
        let p1 = params(8, rat(3, 2), rat(1, 2), int(1));
        let mut want = PowerSum::one();
        want.add(rat(-3, 2) + rat(-1, 2), BigUint::from(28u32));
        assert_eq!(truncated_expectation(&p1, &s, &EdgeSet::empty(), 1).unwrap(), want);
        // K4 outside S_max: 4 vertices against 4/5 * 6 edges.
        let dense = es(&[&[0, 1], &[0, 2], &[0, 3], &[1, 2], &[1, 3], &[2, 3]]);
        let p2 = params(8, int(1), rat(1, 2), rat(4, 5));
        assert!(truncated_expectation(&p2, &vs(&[5]), &dense, 6).unwrap().is_zero());
        assert!(truncated_expectation(&p2, &vs(&[0, 1]), &es(&[&[0, 1]]), 3).unwrap().is_zero());
    }

    /// `E[F_{T'}]` summed over every edge set of the complete graph on `n` vertices.
    fn brute_expectation(p: &Params, s_max: &VertexSet, t_prime: &EdgeSet, t_max: usize) -> PowerSum {
        let mut all = Vec::new();
        for_each_combination(p.n, 2, |e| all.push(e.to_vec()));
        let pool: Vec<Vec<Vertex>> = all.into_iter().filter(|e| !inside(e, s_max)).collect();
        let mut sum = PowerSum::zero();
        let mut stack: Vec<(usize, Vec<Vec<Vertex>>)> = vec![(0, Vec::new())];
        while let Some((from, t)) = stack.pop() {
            let t_set = EdgeSet { edges: t.clone() };
            let star = s_max.union(&t_set.support());
            if t_prime.edges.iter().all(|e| t.contains(e)) && satisfies_star(&star, &t_set, s_max, p.alpha_tilde).unwrap() {
                let outside = star.len() - s_max.len();
                let free = t.len() - t_prime.len();
                let e = (Rational::one() - p.beta) * (p.alpha_tilde * int(t.len() as i64) - int(outside as i64)) - p.alpha * int(free as i64);
                sum.add(e, BigUint::one());
            }
            if t.len() < t_max {
                for (i, e) in pool.iter().enumerate().skip(from) {
                    let mut u = t.clone();
                    u.push(e.clone());
                    stack.push((i + 1, u));
                }
            }
        }
        sum
    }

    #[test]
    fn expectation_matches_brute_force() {
        for (at, beta) in [(rat(1, 2), rat(1, 2)), (rat(9, 10), rat(1, 3)), (rat(6, 5), rat(1, 2))] {
            let p = params(7, rat(3, 2), beta, at);
            for s in [VertexSet::new(), vs(&[0]), vs(&[0, 1])] {
                for t_prime in [EdgeSet::empty(), es(&[&[0, 2]]), es(&[&[2, 3]]), es(&[&[0, 2], &[2, 3]])] {
                    for t_max in 0..=3 {
                        let want = brute_expectation(&p, &s, &t_prime, t_max);
                        let got = truncated_expectation(&p, &s, &t_prime, t_max).unwrap();
                        assert_eq!(got, want, "at {at} s {s} t' {t_prime:?} t {t_max}");
                    }
                }
            }
        }
    }

    #[test]
    fn kimvu_examples() {
        let kv = KimVuParams { t: 1, lambda: 2.0, e: 1.0, e0: 1.0 };
        let (dev, prob) = kimvu_threshold(&kv, 100).unwrap();
        assert!((dev - 16.0).abs() < 1e-12);
        assert_eq!(prob, 1.0);
        let (dev3, _) = kimvu_threshold(&KimVuParams { e: 3.0, ..kv.clone() }, 100).unwrap();
        assert!((dev3 - 48.0).abs() < 1e-12);
        let (_, p1) = kimvu_threshold(&KimVuParams { t: 2, lambda: 20.0, ..kv.clone() }, 100).unwrap();
        let (_, p2) = kimvu_threshold(&KimVuParams { t: 2, lambda: 21.0, ..kv.clone() }, 100).unwrap();
        assert!(p2 < p1 && p1 < 1.0);
        assert!(kimvu_threshold(&KimVuParams { lambda: 1.0, ..kv }, 100).is_err());
    }

    #[test]
    fn mc_edgeless_and_deterministic() {
        let p = params(16, rat(19, 10), rat(1, 2), rat(17, 10));
        let mut q = p.clone();
        q.alpha = int(40);
        let sum = mc_concentration(&q, &vs(&[0]), 2, 30, 5, 3.0).unwrap();
        assert!(sum.values.iter().all(|&v| v == 1.0));
        assert_eq!(sum.variance, 0.0);
        let a = mc_concentration(&p, &vs(&[0]), 2, 30, 9, 3.0).unwrap();
        let b = mc_concentration(&p, &vs(&[0]), 2, 30, 9, 3.0).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.values, b.values);
        assert!(mc_concentration(&p, &vs(&[0]), 2, 29, 9, 3.0).is_err());
    }
}

#[cfg(test)]
mod mc_tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn mean_tracks_exact_expectation() {
        // 200 samples: mean within 3x and within 5 standard errors of the exact value
        let p = Params { n: 64, c: 2, alpha: rat(1, 2), beta: rat(1, 2), alpha_tilde: rat(9, 20), tau: 8, tau_prime: 4, r: 2, l: int(16) };
        for s in [VertexSet::new(), VertexSet::from_slice(&[0]), VertexSet::from_slice(&[0, 1])] {
            let sum = mc_concentration(&p, &s, 3, 200, 11, 3.0).unwrap();
            let sigma = (sum.variance / 200.0).sqrt();
            assert!(sum.mean <= 3.0 * sum.expectation_value && sum.expectation_value <= 3.0 * sum.mean);
            assert!((sum.mean - sum.expectation_value).abs() <= 5.0 * sigma + 1e-12);
        }
    }
}
