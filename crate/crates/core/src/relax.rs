//! Exact integral optima for DkSH, MpU and SSBVE, and the measured integrality gaps.

use crate::error::{Error, Result};
use crate::hgraph::{for_each_combination, BipartiteGraph, Hypergraph};
use crate::lift::ConstraintReport;
use crate::phi::binom;
use crate::rational::to_f64;
use crate::solution::PseudoSolution;
use serde::Serialize;
use std::fmt;

/// Nodes the branch-and-bound may visit before giving up on a certificate.
pub const NODE_BUDGET: u64 = 20_000_000;
/// Largest number of subsets plain enumeration visits.
pub const ENUMERATION_LIMIT: i64 = 100_000_000;

/// Items over a ground set; an item counts once all its elements are chosen.
#[derive(Clone, Debug)]
struct SetSystem {
    ground: usize,
    items: Vec<Vec<u32>>,
    /// Items with no elements, always covered.
    free_items: u64,
    /// Every item has exactly two elements and no two items coincide.
    simple_graph: bool,
}

impl SetSystem {
    fn new(ground: usize, items: Vec<Vec<u32>>) -> Self {
        let free_items = items.iter().filter(|i| i.is_empty()).count() as u64;
        let mut items: Vec<Vec<u32>> = items
            .into_iter()
            .filter(|i| !i.is_empty())
            .map(|mut i| {
                i.sort_unstable();
                i.dedup();
                i
            })
            .collect();
        items.sort();
        let simple_graph = items.iter().all(|i| i.len() == 2) && items.windows(2).all(|w| w[0] != w[1]);
        SetSystem { ground, items, free_items, simple_graph }
    }

    fn from_hypergraph(g: &Hypergraph) -> Self {
        Self::new(g.n(), g.edges().map(|e| e.to_vec()).collect())
    }

    fn from_bipartite(b: &BipartiteGraph) -> Self {
        Self::new(b.right_count, b.left_adjacency())
    }

    /// Covered items for a chosen set, given as a membership mask.
    fn covered(&self, chosen: &[bool]) -> u64 {
        self.free_items + self.items.iter().filter(|i| i.iter().all(|&v| chosen[v as usize])).count() as u64
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Free,
    In,
    Out,
}

/// Branch-and-bound for the most items covered by at most `k` elements.
struct Search<'a> {
    sys: &'a SetSystem,
    k: usize,
    incidence: Vec<Vec<u32>>,
    state: Vec<State>,
    /// Elements of the item not yet chosen.
    missing: Vec<u32>,
    dead: Vec<bool>,
    /// Per element, live items it would finish alone / with one more / with two or more.
    one: Vec<i64>,
    two: Vec<i64>,
    more: Vec<i64>,
    chosen: usize,
    covered: u64,
    best: u64,
    /// Stop as soon as this many items are covered.
    target: Option<u64>,
    /// `small[j]`: the exact optimum for `j` elements, for `j < k` (simple graphs only).
    small: Vec<u64>,
    nodes: u64,
    scratch: Vec<i64>,
    best_set: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(sys: &'a SetSystem, k: usize, small: Vec<u64>) -> Self {
        let mut incidence = vec![Vec::new(); sys.ground];
        for (j, item) in sys.items.iter().enumerate() {
            for &v in item {
                incidence[v as usize].push(j as u32);
            }
        }
        let mut s = Search {
            sys,
            k,
            incidence,
            state: vec![State::Free; sys.ground],
            missing: sys.items.iter().map(|i| i.len() as u32).collect(),
            dead: vec![false; sys.items.len()],
            one: vec![0; sys.ground],
            two: vec![0; sys.ground],
            more: vec![0; sys.ground],
            chosen: 0,
            covered: sys.free_items,
            best: sys.free_items,
            target: None,
            small,
            nodes: 0,
            scratch: Vec::new(),
            best_set: Vec::new(),
        };
        for j in 0..sys.items.len() {
            s.account(j, 1);
        }
        s
    }

    /// Adds (`sign = 1`) or removes (`-1`) item `j`'s contribution to its free elements.
    fn account(&mut self, j: usize, sign: i64) {
        let m = self.missing[j];
        for &v in &self.sys.items[j] {
            if self.state[v as usize] == State::Free {
                match m {
                    1 => self.one[v as usize] += sign,
                    2 => self.two[v as usize] += sign,
                    _ => self.more[v as usize] += sign,
                }
            }
        }
    }

    fn include(&mut self, v: usize) {
        for k in 0..self.incidence[v].len() {
            let j = self.incidence[v][k] as usize;
            if !self.dead[j] {
                self.account(j, -1);
            }
        }
        self.state[v] = State::In;
        self.chosen += 1;
        for k in 0..self.incidence[v].len() {
            let j = self.incidence[v][k] as usize;
            self.missing[j] -= 1;
            if !self.dead[j] {
                if self.missing[j] == 0 {
                    self.covered += 1;
                }
                self.account(j, 1);
            }
        }
    }

    fn uninclude(&mut self, v: usize) {
        for k in 0..self.incidence[v].len() {
            let j = self.incidence[v][k] as usize;
            if !self.dead[j] {
                self.account(j, -1);
                if self.missing[j] == 0 {
                    self.covered -= 1;
                }
            }
            self.missing[j] += 1;
        }
        self.state[v] = State::Free;
        self.chosen -= 1;
        for k in 0..self.incidence[v].len() {
            let j = self.incidence[v][k] as usize;
            if !self.dead[j] {
                self.account(j, 1);
            }
        }
    }

    /// Marks `v` unavailable; returns the items it killed.
    fn exclude(&mut self, v: usize) -> Vec<u32> {
        let mut killed = Vec::new();
        for k in 0..self.incidence[v].len() {
            let j = self.incidence[v][k] as usize;
            if !self.dead[j] {
                self.account(j, -1);
                self.dead[j] = true;
                killed.push(j as u32);
            }
        }
        self.state[v] = State::Out;
        killed
    }

    fn unexclude(&mut self, v: usize, killed: Vec<u32>) {
        self.state[v] = State::Free;
        for j in killed {
            self.dead[j as usize] = false;
            self.account(j as usize, 1);
        }
    }

    /// Largest number of further items `rem` more elements can finish.
    fn bound(&mut self, rem: usize) -> u64 {
        let r = rem as i64;
        let pair_cap = if self.sys.simple_graph { r - 1 } else { i64::MAX };
        // joint bound, scaled by 6: an item with t >= 2 missing elements is shared by t of them
        self.scratch.clear();
        for v in 0..self.sys.ground {
            if self.state[v] == State::Free {
                self.scratch.push(6 * self.one[v] + 3 * self.two[v].min(pair_cap) + 2 * self.more[v]);
            }
        }
        let joint = top_sum(&mut self.scratch, rem) / 6;
        if !self.sys.simple_graph || rem >= self.small.len() {
            return joint as u64;
        }
        // split bound: edges to the chosen set plus the densest possible rem-set
        self.scratch.clear();
        for v in 0..self.sys.ground {
            if self.state[v] == State::Free {
                self.scratch.push(self.one[v]);
            }
        }
        let split = top_sum(&mut self.scratch, rem) + self.small[rem] as i64;
        joint.min(split) as u64
    }

    fn dfs(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return Err(Error::Capacity(format!("branch-and-bound exceeded {NODE_BUDGET} nodes")));
        }
        if self.covered > self.best {
            self.best = self.covered;
            self.record();
        }
        if self.target.is_some_and(|t| self.best >= t) {
            return Ok(());
        }
        let rem = self.k - self.chosen;
        if rem == 0 {
            return Ok(());
        }
        let need = match self.target {
            Some(t) => t,
            None => self.best + 1,
        };
        if self.covered + self.bound(rem) < need {
            return Ok(());
        }
        // Beating the best (k-1)-set forces every chosen vertex to end with at least
        // `need - small[k-1]` chosen neighbours.
        let mut forced: Vec<(usize, Vec<u32>)> = Vec::new();
        if self.sys.simple_graph && self.small.len() == self.k && self.target.is_none() {
            let min_deg = need as i64 - self.small[self.k - 1] as i64;
            if min_deg > 0 && !self.degrees_possible(min_deg, rem as i64, &mut forced) {
                for (v, killed) in forced.into_iter().rev() {
                    self.unexclude(v, killed);
                }
                return Ok(());
            }
        }
        let r = self.branch();
        for (v, killed) in forced.into_iter().rev() {
            self.unexclude(v, killed);
        }
        r
    }

    /// Checks chosen vertices can still reach `min_deg` and excludes free ones that cannot.
    fn degrees_possible(&mut self, min_deg: i64, rem: i64, forced: &mut Vec<(usize, Vec<u32>)>) -> bool {
        for v in 0..self.sys.ground {
            match self.state[v] {
                State::In => {
                    let mut have = 0i64;
                    let mut open = 0i64;
                    for &j in &self.incidence[v] {
                        if self.dead[j as usize] {
                            continue;
                        }
                        if self.missing[j as usize] == 0 {
                            have += 1;
                        } else {
                            open += 1;
                        }
                    }
                    if have + open.min(rem) < min_deg {
                        return false;
                    }
                }
                State::Free => {
                    if self.one[v] + self.two[v].min(rem - 1) < min_deg {
                        let killed = self.exclude(v);
                        forced.push((v, killed));
                    }
                }
                State::Out => {}
            }
        }
        true
    }

    fn branch(&mut self) -> Result<()> {
        // branch on the free element with the highest score
        let mut pick = None;
        let mut pick_score = -1;
        for v in 0..self.sys.ground {
            if self.state[v] == State::Free {
                let score = 6 * self.one[v] + 3 * self.two[v] + 2 * self.more[v];
                if score > pick_score {
                    pick_score = score;
                    pick = Some(v);
                }
            }
        }
        let Some(v) = pick else { return Ok(()) };
        if pick_score == 0 {
            // nothing left can finish an item
            return Ok(());
        }
        self.include(v);
        let r = self.dfs();
        self.uninclude(v);
        r?;
        let killed = self.exclude(v);
        let r = self.dfs();
        self.unexclude(v, killed);
        r
    }

    fn record(&mut self) {
        self.best_set = (0..self.sys.ground).filter(|&v| self.state[v] == State::In).collect();
    }

    fn score(&self, v: usize) -> i64 {
        6 * self.one[v] + 3 * self.two[v] + 2 * self.more[v]
    }

    /// Starting solution: `warm`, filled greedily, then improved by single swaps.
    fn heuristic(&mut self, warm: &[usize]) {
        let mut picked: Vec<usize> = Vec::new();
        for &v in warm.iter().take(self.k) {
            self.include(v);
            picked.push(v);
        }
        while self.chosen < self.k {
            let pick = (0..self.sys.ground).filter(|&v| self.state[v] == State::Free).max_by_key(|&v| (self.score(v), std::cmp::Reverse(v)));
            let Some(v) = pick else { break };
            self.include(v);
            picked.push(v);
        }
        let mut improved = true;
        let mut rounds = 0;
        while improved && rounds < 50 {
            improved = false;
            rounds += 1;
            'swap: for slot in picked.iter_mut() {
                let v = *slot;
                let before = self.covered;
                self.uninclude(v);
                for u in 0..self.sys.ground {
                    if u == v || self.state[u] != State::Free || self.one[u] == 0 {
                        continue;
                    }
                    self.include(u);
                    if self.covered > before {
                        *slot = u;
                        improved = true;
                        continue 'swap;
                    }
                    self.uninclude(u);
                }
                self.include(v);
            }
        }
        if self.covered > self.best {
            self.best = self.covered;
            self.record();
        }
        for v in picked.into_iter().rev() {
            self.uninclude(v);
        }
    }
}

fn top_sum(xs: &mut [i64], j: usize) -> i64 {
    if j >= xs.len() {
        return xs.iter().sum();
    }
    if j == 0 {
        return 0;
    }
    let (_, _, _) = xs.select_nth_unstable_by(j - 1, |a, b| b.cmp(a));
    xs[..j].iter().sum()
}

/// Most items covered by `k` elements, by branch and bound.
fn max_covered(sys: &SetSystem, k: usize, target: Option<u64>) -> Result<u64> {
    let k = k.min(sys.ground);
    // Exact optima for fewer elements tighten the bound on simple graphs and seed the start.
    let mut small = Vec::new();
    let mut warm = Vec::new();
    if sys.simple_graph && target.is_none() && k > 2 {
        small = vec![0u64; 2];
        for j in 2..k {
            let (v, set) = run_search(sys, j, None, small.clone(), &warm)?;
            small.push(v);
            warm = set;
        }
    }
    Ok(run_search(sys, k, target, small, &warm)?.0)
}

fn run_search(sys: &SetSystem, k: usize, target: Option<u64>, small: Vec<u64>, warm: &[usize]) -> Result<(u64, Vec<usize>)> {
    let mut s = Search::new(sys, k, small);
    s.heuristic(warm);
    s.target = target;
    if target.is_some_and(|t| s.best >= t) {
        return Ok((s.best, s.best_set));
    }
    s.dfs()?;
    Ok((s.best, s.best_set))
}

fn max_covered_enumerate(sys: &SetSystem, k: usize) -> Result<u64> {
    let k = k.min(sys.ground);
    let count = binom(sys.ground as i64, k as i64);
    if count > ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!("{count} subsets exceed {ENUMERATION_LIMIT}")));
    }
    let mut chosen = vec![false; sys.ground];
    let mut best = sys.free_items;
    for_each_combination(sys.ground, k, |comb| {
        for &v in comb {
            chosen[v as usize] = true;
        }
        best = best.max(sys.covered(&chosen));
        for &v in comb {
            chosen[v as usize] = false;
        }
    });
    Ok(best)
}

/// Fewest elements covering at least `p` items, trying sizes upward.
fn min_elements(sys: &SetSystem, p: u64, enumerate: bool) -> Result<u64> {
    let total = sys.free_items + sys.items.len() as u64;
    if p > total {
        return Err(Error::Infeasible(format!("p={p} exceeds the {total} available")));
    }
    for s in 0..=sys.ground {
        let got = if enumerate { max_covered_enumerate(sys, s)? } else { max_covered(sys, s, Some(p))? };
        if got >= p {
            return Ok(s as u64);
        }
    }
    unreachable!("the whole ground set covers every item")
}

/// Most hyperedges inside `k` vertices.
pub fn dksh_opt(g: &Hypergraph, k: usize) -> Result<u64> {
    max_covered(&SetSystem::from_hypergraph(g), k, None)
}

/// As [`dksh_opt`] by visiting every `k`-set.
pub fn dksh_opt_enumerate(g: &Hypergraph, k: usize) -> Result<u64> {
    max_covered_enumerate(&SetSystem::from_hypergraph(g), k)
}

/// Fewest vertices spanned by `p` hyperedges.
pub fn mpu_opt(g: &Hypergraph, p: usize) -> Result<u64> {
    min_elements(&SetSystem::from_hypergraph(g), p as u64, false)
}

pub fn mpu_opt_enumerate(g: &Hypergraph, p: usize) -> Result<u64> {
    min_elements(&SetSystem::from_hypergraph(g), p as u64, true)
}

/// Fewest right neighbours of `p` left nodes.
pub fn ssbve_opt(b: &BipartiteGraph, p: usize) -> Result<u64> {
    if p > b.left_count {
        return Err(Error::Infeasible(format!("p={p} exceeds {} left nodes", b.left_count)));
    }
    min_elements(&SetSystem::from_bipartite(b), p as u64, false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Problem {
    DkSH,
    MpU,
    SSBVE,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Problem::DkSH => "DkSH",
            Problem::MpU => "MpU",
            Problem::SSBVE => "SSBVE",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "DkSH" => Ok(Problem::DkSH),
            "MpU" => Ok(Problem::MpU),
            "SSBVE" => Ok(Problem::SSBVE),
            _ => Err(Error::Parameter(format!("unknown problem {s:?} (DkSH, MpU, SSBVE)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GapReport {
    pub problem: Problem,
    pub n: usize,
    pub c: usize,
    pub alpha: String,
    pub beta: String,
    pub certified_k: f64,
    pub certified_p: f64,
    /// Set size handed to the integral oracle.
    pub k_used: usize,
    /// DkSH: edges in the best `certifiedK`-set. MpU and SSBVE: fewest vertices for `certifiedP` edges.
    pub integral_opt: u64,
    pub gap: f64,
    /// Asymptotic exponent of `n` the gap should approach, for display.
    pub paper_target_exponent: f64,
}

impl GapReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub const CSV_HEADER: &'static str = "seed,n,c,alpha,beta,certifiedK,certifiedP,kUsed,integralOpt,gap";

    pub fn csv_row(&self, seed: u64) -> String {
        format!(
            "{seed},{},{},{},{},{},{},{},{},{}",
            self.n, self.c, self.alpha, self.beta, self.certified_k, self.certified_p, self.k_used, self.integral_opt, self.gap
        )
    }
}

/// Target exponents: `alpha(1 - alpha/(c-1))`, `alpha(c-1-alpha)/((c-1)(c-alpha))`, and
/// `beta(1 - beta)` for SSBVE with `beta` standing in for gamma.
pub fn target_exponent(problem: Problem, c: usize, alpha: f64, beta: f64) -> f64 {
    let c = c as f64;
    match problem {
        Problem::DkSH => alpha * (1.0 - alpha / (c - 1.0)),
        Problem::MpU => alpha * (c - 1.0 - alpha) / ((c - 1.0) * (c - alpha)),
        Problem::SSBVE => beta * (1.0 - beta),
    }
}

/// Certified relaxation value against the integral optimum on the same instance.
///
/// DkSH compares `certifiedP` with the densest `certifiedK`-set. MpU and SSBVE compare the
/// fewest vertices spanning `certifiedP` edges with `certifiedK`; SSBVE runs on the incidence
/// graph.
pub fn gap_report(g: &Hypergraph, sol: &PseudoSolution, report: &ConstraintReport, problem: Problem) -> Result<GapReport> {
    gap_report_at(g, sol, report, problem, None)
}

/// As [`gap_report`], with the DkSH set size fixed to `k` instead of `certifiedK`.
pub fn gap_report_at(g: &Hypergraph, sol: &PseudoSolution, report: &ConstraintReport, problem: Problem, size: Option<usize>) -> Result<GapReport> {
    let p = &sol.params;
    let (k, pp) = match (report.certified_k, report.certified_p) {
        (Some(k), Some(pp)) => (k, pp),
        _ => return Err(Error::DegenerateGap("no ratio checks were run".into())),
    };
    if !report.feasible {
        return Err(Error::DegenerateGap("the table failed verification".into()));
    }
    if pp <= 0.0 {
        return Err(Error::DegenerateGap(format!("certifiedP = {pp}")));
    }
    if k <= 0.0 {
        return Err(Error::DegenerateGap(format!("certifiedK = {k}")));
    }
    let k_used = match problem {
        Problem::DkSH => size.unwrap_or(k as usize),
        _ => k as usize,
    };
    let (integral_opt, gap) = match problem {
        Problem::DkSH => {
            let opt = dksh_opt(g, k_used)?;
            if opt == 0 {
                return Err(Error::DegenerateGap(format!("no edge inside any {k_used}-set")));
            }
            (opt, pp / opt as f64)
        }
        Problem::MpU | Problem::SSBVE => {
            if pp as usize > g.m() {
                return Err(Error::DegenerateGap(format!("certifiedP = {pp} exceeds the {} edges", g.m())));
            }
            let opt = if problem == Problem::MpU {
                mpu_opt(g, pp as usize)?
            } else {
                ssbve_opt(&crate::hgraph::to_incidence_bipartite(g), pp as usize)?
            };
            (opt, opt as f64 / k)
        }
    };
    Ok(GapReport {
        problem,
        n: p.n,
        c: p.c,
        alpha: crate::rational::fmt_rational(&p.alpha),
        beta: crate::rational::fmt_rational(&p.beta),
        certified_k: k,
        certified_p: pp,
        k_used,
        integral_opt,
        gap,
        paper_target_exponent: target_exponent(problem, p.c, to_f64(&p.alpha), to_f64(&p.beta)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::{sample_gnp, to_incidence_bipartite};

    fn cycle(n: usize) -> Hypergraph {
        Hypergraph::new(n, 2, (0..n as u32).map(|i| vec![i, (i + 1) % n as u32]).collect()).unwrap()
    }

    #[test]
    fn small_cases() {
        assert_eq!(dksh_opt(&cycle(5), 3).unwrap(), 2);
        assert_eq!(dksh_opt(&Hypergraph::complete(5, 2), 3).unwrap(), 3);
        assert_eq!(dksh_opt(&Hypergraph::empty(9, 2), 4).unwrap(), 0);
        assert_eq!(mpu_opt(&cycle(5), 2).unwrap(), 3);
        assert_eq!(mpu_opt(&cycle(5), 5).unwrap(), 5);
        assert_eq!(mpu_opt(&Hypergraph::complete(4, 2), 3).unwrap(), 3);
        assert!(matches!(mpu_opt(&cycle(5), 6), Err(Error::Infeasible(_))));
        let b = to_incidence_bipartite(&cycle(5));
        assert_eq!(ssbve_opt(&b, 2).unwrap(), 3);
        let k4 = to_incidence_bipartite(&Hypergraph::complete(4, 2));
        assert_eq!(ssbve_opt(&k4, k4.left_count).unwrap(), 4);
        let h = Hypergraph::complete(6, 3);
        assert_eq!(ssbve_opt(&to_incidence_bipartite(&h), 1).unwrap(), 3);
        assert!(matches!(ssbve_opt(&b, 6), Err(Error::Infeasible(_))));
    }

    #[test]
    fn branch_and_bound_matches_enumeration() {
        for seed in 0..12u64 {
            for (c, n, prob) in [(2usize, 14usize, 0.3), (2, 16, 0.15), (3, 11, 0.1)] {
                let g = sample_gnp(n, c, prob, seed).unwrap();
                let mut last = 0;
                for k in 0..=n.min(8) {
                    let opt = dksh_opt(&g, k).unwrap();
                    assert_eq!(opt, dksh_opt_enumerate(&g, k).unwrap(), "seed {seed} n {n} k {k}");
                    assert!(opt >= last);
                    last = opt;
                }
                let b = to_incidence_bipartite(&g);
                for p in 1..=g.m().min(6) {
                    let want = mpu_opt_enumerate(&g, p).unwrap();
                    assert_eq!(mpu_opt(&g, p).unwrap(), want);
                    assert_eq!(ssbve_opt(&b, p).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn duplicate_neighbourhoods_are_handled() {
        let b = BipartiteGraph::new(4, 3, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (3, 0), (3, 2)]).unwrap();
        assert_eq!(ssbve_opt(&b, 2).unwrap(), 2);
        assert_eq!(ssbve_opt(&b, 3).unwrap(), 3);
    }
}
