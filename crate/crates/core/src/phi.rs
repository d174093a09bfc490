use crate::error::{Error, Result};
use crate::flow::{FlowNetwork, INF};
use crate::hgraph::{induced_edge_count, Hypergraph, Vertex, VertexSet};
use crate::rational::Rational;
use serde::Serialize;
use smallvec::SmallVec;
use std::collections::HashSet;

pub const BRUTE_FORCE_LIMIT: usize = 25;

pub fn phi(g: &Hypergraph, alpha_tilde: Rational, s: &VertexSet) -> Rational {
    alpha_tilde * Rational::from_integer(induced_edge_count(g, s) as i64) - Rational::from_integer(s.len() as i64)
}

/// Optimal supersets of a base set under a size cap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateFamily {
    pub base: VertexSet,
    #[serde(with = "crate::rational::serde_str")]
    pub phi_star: Rational,
    /// All maximizers; filled only by brute force.
    pub optimal_sets: Vec<VertexSet>,
    pub maximal_set: VertexSet,
    /// The uncapped optimum needed more than `tau` vertices.
    pub cap_bound: bool,
    /// The union of all maximizers is itself a maximizer within the cap.
    pub union_optimal: bool,
}

pub fn phi_star_bruteforce(
    g: &Hypergraph,
    alpha_tilde: Rational,
    s: &VertexSet,
    tau: usize,
) -> Result<CandidateFamily> {
    let n = g.n();
    let free: Vec<Vertex> = (0..n as Vertex).filter(|&v| !s.contains(v)).collect();
    if free.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity(format!(
            "brute force over {} free vertices exceeds {}",
            free.len(),
            BRUTE_FORCE_LIMIT
        )));
    }
    if s.len() > tau {
        return Err(Error::Contract(format!("base {s} larger than cap {tau}")));
    }
    let budget = tau - s.len();
    let mut pos = vec![usize::MAX; n];
    for (k, &v) in free.iter().enumerate() {
        pos[v as usize] = k;
    }
    // Each edge becomes (mask over free vertices), valid only if its other vertices lie in S.
    let mut masks = Vec::new();
    let mut base_edges = 0i64;
    for e in g.edges() {
        let mut mask = 0u32;
        let mut ok = true;
        for &v in e {
            if s.contains(v) {
                continue;
            }
            if pos[v as usize] == usize::MAX {
                ok = false;
                break;
            }
            mask |= 1 << pos[v as usize];
        }
        if ok {
            if mask == 0 {
                base_edges += 1;
            } else {
                masks.push(mask);
            }
        }
    }
    let (a, b) = (*alpha_tilde.numer(), *alpha_tilde.denom());
    let mut best = i64::MIN;
    let mut winners: Vec<u32> = Vec::new();
    let total: u64 = 1u64 << free.len();
    for sub in 0..total {
        let sub = sub as u32;
        if sub.count_ones() as usize > budget {
            continue;
        }
        let edges = base_edges + masks.iter().filter(|&&m| m & sub == m).count() as i64;
        let val = a * edges - b * (s.len() as i64 + sub.count_ones() as i64);
        if val > best {
            best = val;
            winners.clear();
        }
        if val == best {
            winners.push(sub);
        }
    }
    let to_set = |sub: u32| {
        let mut v: Vec<Vertex> = s.as_slice().to_vec();
        v.extend((0..free.len()).filter(|k| sub >> k & 1 == 1).map(|k| free[k]));
        VertexSet::from_vec(v)
    };
    let union_mask = winners.iter().fold(0u32, |acc, &w| acc | w);
    let union_optimal = winners.contains(&union_mask);
    let maximal = if union_optimal {
        union_mask
    } else {
        *winners
            .iter()
            .max_by(|x, y| x.count_ones().cmp(&y.count_ones()).then(y.cmp(x)))
            .unwrap()
    };
    let phi_star = Rational::new(best, b);
    let (closure_value, closure_set) = phi_star_closure(g, alpha_tilde, s);
    let cap_bound = closure_set.len() > tau || closure_value > phi_star;
    Ok(CandidateFamily {
        base: s.clone(),
        phi_star,
        optimal_sets: winners.iter().map(|&w| to_set(w)).collect(),
        maximal_set: to_set(maximal),
        cap_bound,
        union_optimal,
    })
}

/// Uncapped maximum of `Phi` over supersets of `s` via one minimum cut.
///
/// Returns the largest maximizer: the source side is taken as every node that cannot reach
/// the sink in the final residual network, which is the maximal minimum cut.
pub fn phi_star_closure(g: &Hypergraph, alpha_tilde: Rational, s: &VertexSet) -> (Rational, VertexSet) {
    let (a, b) = (*alpha_tilde.numer(), *alpha_tilde.denom());
    if a <= 0 {
        return (phi(g, alpha_tilde, s), s.clone());
    }
    let (m, n) = (g.m(), g.n());
    let (src, sink) = (0, 1);
    let enode = |j: usize| 2 + j;
    let vnode = |v: usize| 2 + m + v;
    let mut net = FlowNetwork::new(2 + m + n);
    for (j, e) in g.edges().enumerate() {
        net.add_arc(src, enode(j), a);
        for &v in e {
            net.add_arc(enode(j), vnode(v as usize), INF);
        }
    }
    for v in 0..n {
        net.add_arc(vnode(v), sink, b);
    }
    for v in s.iter() {
        net.add_arc(src, vnode(v as usize), INF);
    }
    let cut = net.max_flow(src, sink);
    let reach = net.reaches_sink(sink);
    let set: VertexSet = (0..n as Vertex).filter(|&v| !reach[vnode(v as usize)]).collect();
    let value = Rational::new(a * m as i64 - cut, b);
    debug_assert_eq!(value, phi(g, alpha_tilde, &set));
    (value, set)
}

/// Optimal supersets for `s` under the cap `tau`.
///
/// The uncapped closure answers directly when its maximal set fits. Otherwise the
/// exact capped search answers; the full list of maximizers is produced only when
/// brute force is within its limit.
pub fn candidate_family(g: &Hypergraph, alpha_tilde: Rational, s: &VertexSet, tau: usize) -> Result<CandidateFamily> {
    if s.len() > tau {
        return Err(Error::Contract(format!("base {s} larger than cap {tau}")));
    }
    let (value, set) = phi_star_closure(g, alpha_tilde, s);
    if set.len() <= tau {
        let enumerable = g.n() - s.len() <= BRUTE_FORCE_LIMIT;
        if enumerable {
            return phi_star_bruteforce(g, alpha_tilde, s, tau);
        }
        return Ok(CandidateFamily {
            base: s.clone(),
            phi_star: value,
            optimal_sets: Vec::new(),
            maximal_set: set,
            cap_bound: false,
            union_optimal: true,
        });
    }
    if g.n() - s.len() <= BRUTE_FORCE_LIMIT {
        return phi_star_bruteforce(g, alpha_tilde, s, tau);
    }
    let mut solver = CappedSolver::new(g, alpha_tilde, tau);
    solver.family(s)
}

/// Result of the capped search: the best superset found and its gain over the base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    /// `denom(alpha_tilde) * (Phi(set) - Phi(base))`.
    pub gain_numer: i64,
    pub set: VertexSet,
    pub edges: usize,
}

#[derive(Clone, Debug)]
struct Piece {
    verts: SmallVec<[Vertex; 8]>,
}

/// Exact maximization of `Phi` over supersets of bounded size.
///
/// Every vertex added to a maximizer lies in at least `1/alpha_tilde` of its edges, so the
/// search grows sets by fixing such deficient vertices through incident edges, starts new
/// pieces from edges touching the current set, and adds whole detached pieces from a
/// precomputed list of nonnegative dense connected sets. A bound on the best completion
/// (sum of the top completion degrees plus the densest possible new edges) prunes the rest.
pub struct CappedSolver<'g> {
    g: &'g Hypergraph,
    a: i64,
    b: i64,
    cap: usize,
    pieces: Option<Vec<Piece>>,
    in_u: Vec<bool>,
    deg_u: Vec<i32>,
    dcount: Vec<i32>,
    touched: Vec<Vertex>,
    visited: HashSet<SmallVec<[Vertex; 16]>>,
    u: Vec<Vertex>,
    best_gain: i64,
    best_set: Vec<Vertex>,
    gain: i64,
    new_edges: usize,
    base_len: usize,
    strict_floor: i64,
    record_pieces: bool,
    found: Vec<Piece>,
    /// When set, extensions grow only from this base vertex and the added vertices.
    anchor: Option<Vertex>,
    pub nodes: u64,
}

impl<'g> CappedSolver<'g> {
    pub fn new(g: &'g Hypergraph, alpha_tilde: Rational, cap: usize) -> Self {
        let n = g.n();
        CappedSolver {
            g,
            a: *alpha_tilde.numer(),
            b: *alpha_tilde.denom(),
            cap,
            pieces: None,
            in_u: vec![false; n],
            deg_u: vec![0; n],
            dcount: vec![0; n],
            touched: Vec::new(),
            visited: HashSet::new(),
            u: Vec::new(),
            best_gain: 0,
            best_set: Vec::new(),
            gain: 0,
            new_edges: 0,
            base_len: 0,
            strict_floor: 0,
            record_pieces: false,
            found: Vec::new(),
            anchor: None,
            nodes: 0,
        }
    }

    pub fn alpha_tilde(&self) -> Rational {
        Rational::new(self.a, self.b)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Adds `v` to the working set, returning how many edges it completed.
    fn push_vertex(&mut self, v: Vertex) -> usize {
        self.in_u[v as usize] = true;
        self.u.push(v);
        let mut completed = 0;
        for &j in self.g.incidence(v) {
            let e = self.g.edge(j as usize);
            if e.iter().all(|&w| self.in_u[w as usize]) {
                completed += 1;
                for &w in e {
                    self.deg_u[w as usize] += 1;
                }
            }
        }
        completed
    }

    fn pop_vertex(&mut self) {
        let v = self.u.pop().unwrap();
        for &j in self.g.incidence(v) {
            let e = self.g.edge(j as usize);
            if e.iter().all(|&w| self.in_u[w as usize]) {
                for &w in e {
                    self.deg_u[w as usize] -= 1;
                }
            }
        }
        self.in_u[v as usize] = false;
    }

    fn add_all(&mut self, verts: &[Vertex]) -> (i64, usize) {
        let mut edges = 0;
        for &v in verts {
            edges += self.push_vertex(v);
        }
        let delta = self.a * edges as i64 - self.b * verts.len() as i64;
        self.gain += delta;
        self.new_edges += edges;
        (delta, edges)
    }

    fn remove_last(&mut self, count: usize, delta: i64, edges: usize) {
        for _ in 0..count {
            self.pop_vertex();
        }
        self.gain -= delta;
        self.new_edges -= edges;
    }

    fn key(&self) -> SmallVec<[Vertex; 16]> {
        let mut k: SmallVec<[Vertex; 16]> = SmallVec::from_slice(&self.u);
        k.sort_unstable();
        k
    }

    /// Upper bound on the gain still obtainable by adding at most `rem` vertices.
    fn completion_bound(&mut self, rem: usize) -> i64 {
        if rem == 0 {
            return 0;
        }
        let c = self.g.c();
        self.touched.clear();
        for idx in 0..self.u.len() {
            let u = self.u[idx];
            for &j in self.g.incidence(u) {
                let e = self.g.edge(j as usize);
                let mut outside = None;
                let mut count = 0;
                let mut first_in = None;
                for &w in e {
                    if self.in_u[w as usize] {
                        if first_in.is_none() {
                            first_in = Some(w);
                        }
                    } else {
                        count += 1;
                        outside = Some(w);
                    }
                }
                if count == 1 && first_in == Some(u) {
                    let w = outside.unwrap();
                    if self.dcount[w as usize] == 0 {
                        self.touched.push(w);
                    }
                    self.dcount[w as usize] += 1;
                }
            }
        }
        let mut ds: SmallVec<[i32; 64]> = self.touched.iter().map(|&w| self.dcount[w as usize]).collect();
        for &w in &self.touched {
            self.dcount[w as usize] = 0;
        }
        ds.sort_unstable_by(|x, y| y.cmp(x));
        let mut best = 0i64;
        let mut top = 0i64;
        let ulen = self.u.len() as i64;
        for j in 1..=rem {
            if j <= ds.len() {
                top += ds[j - 1] as i64;
            }
            let j64 = j as i64;
            let inner = if c == 2 {
                j64 * (j64 - 1) / 2
            } else {
                (2..=c.min(j)).map(|i| binom(j64, i as i64) * binom(ulen, (c - i) as i64)).sum()
            };
            best = best.max(self.a * (top + inner) - self.b * j64);
        }
        best
    }

    fn deficient(&self) -> Option<Vertex> {
        let mut pick = None;
        let mut pick_opts = usize::MAX;
        for &v in &self.u[self.base_len..] {
            if self.a * (self.deg_u[v as usize] as i64) < self.b {
                let opts = self.g.incidence(v).len() - self.deg_u[v as usize] as usize;
                if opts < pick_opts {
                    pick_opts = opts;
                    pick = Some(v);
                }
            }
        }
        pick
    }

    fn record(&mut self) {
        if self.record_pieces {
            if self.gain >= 0 && !self.u.is_empty() && self.deficient().is_none() {
                self.found.push(Piece { verts: SmallVec::from_slice(&self.u) });
            }
        } else if self.gain > self.best_gain || (self.gain == self.best_gain && self.u.len() > self.best_set.len()) {
            self.best_gain = self.gain;
            self.best_set = self.u.clone();
        }
    }

    fn dfs(&mut self, piece_from: usize) {
        self.nodes += 1;
        self.record();
        let rem = self.cap - self.u.len();
        if rem == 0 {
            return;
        }
        let bound = self.completion_bound(rem);
        let target = if self.record_pieces { self.strict_floor } else { self.best_gain };
        if self.gain + bound < target {
            return;
        }
        let mut options: Vec<SmallVec<[Vertex; 4]>> = Vec::new();
        if let Some(v) = self.deficient() {
            for &j in self.g.incidence(v) {
                let e = self.g.edge(j as usize);
                let new: SmallVec<[Vertex; 4]> = e.iter().copied().filter(|&w| !self.in_u[w as usize]).collect();
                if !new.is_empty() && new.len() <= rem && (!self.record_pieces || new.iter().all(|&w| w > self.u[0])) {
                    options.push(new);
                }
            }
            self.explore(options);
            return;
        }
        let sources: SmallVec<[Vertex; 16]> = match self.anchor {
            Some(x) => std::iter::once(x).chain(self.u[self.base_len..].iter().copied()).collect(),
            None => SmallVec::from_slice(&self.u),
        };
        for &u in &sources {
            for &j in self.g.incidence(u) {
                let e = self.g.edge(j as usize);
                let new: SmallVec<[Vertex; 4]> = e.iter().copied().filter(|&w| !self.in_u[w as usize]).collect();
                if !new.is_empty() && new.len() <= rem && (!self.record_pieces || new.iter().all(|&w| w > self.u[0])) {
                    options.push(new);
                }
            }
        }
        options.sort_unstable();
        options.dedup();
        self.explore(options);
        if !self.record_pieces && self.anchor.is_none() {
            let count = self.pieces.as_ref().map_or(0, |p| p.len());
            for p in piece_from..count {
                let verts = self.pieces.as_ref().unwrap()[p].verts.clone();
                if verts.len() > self.cap - self.u.len() || verts.iter().any(|&w| self.in_u[w as usize]) {
                    continue;
                }
                let (delta, edges) = self.add_all(&verts);
                let key = self.key();
                if self.visited.insert(key) {
                    self.dfs(p + 1);
                }
                self.remove_last(verts.len(), delta, edges);
            }
        }
    }

    fn explore(&mut self, options: Vec<SmallVec<[Vertex; 4]>>) {
        for new in options {
            let (delta, edges) = self.add_all(&new);
            let key = self.key();
            if self.visited.insert(key) {
                self.dfs(0);
            }
            self.remove_last(new.len(), delta, edges);
        }
    }

    fn ensure_pieces(&mut self) {
        if self.pieces.is_some() {
            return;
        }
        self.record_pieces = true;
        self.strict_floor = 0;
        self.found.clear();
        if self.a > 0 {
            for v in 0..self.g.n() as Vertex {
                self.visited.clear();
                self.base_len = 0;
                self.gain = 0;
                self.new_edges = 0;
                let (delta, edges) = self.add_all(&[v]);
                self.visited.insert(self.key());
                self.dfs(0);
                self.remove_last(1, delta, edges);
            }
        }
        self.record_pieces = false;
        let mut found = std::mem::take(&mut self.found);
        for p in &mut found {
            p.verts.sort_unstable();
        }
        found.sort_by(|x, y| x.verts.cmp(&y.verts));
        found.dedup_by(|x, y| x.verts == y.verts);
        self.pieces = Some(found);
        self.visited.clear();
    }

    /// Connected sets with `Phi >= 0` in which every vertex lies in at least `1/alpha_tilde`
    /// edges, each listed once.
    pub fn pieces(&mut self) -> Vec<VertexSet> {
        self.ensure_pieces();
        self.pieces.as_ref().unwrap().iter().map(|p| VertexSet::from_sorted(&p.verts)).collect()
    }

    /// Best superset of `s` with at most `cap` vertices. Among tied supersets the largest
    /// wins, which is the maximal optimum whenever the optima are closed under union.
    pub fn best_extension(&mut self, s: &VertexSet) -> Extension {
        self.ensure_pieces();
        self.anchor = None;
        self.run(s)
    }

    /// Best superset of `s` whose added vertices all connect to `x` through edges of the
    /// superset. When `s` minus `x` has no nonempty extension of gain at least zero under the
    /// cap, every other added piece could be moved to that smaller base, so this is the exact
    /// optimum and, on ties, the largest one.
    pub fn best_extension_touching(&mut self, s: &VertexSet, x: Vertex) -> Extension {
        assert!(s.contains(x), "anchor outside base");
        self.anchor = Some(x);
        let ext = self.run(s);
        self.anchor = None;
        ext
    }

    fn run(&mut self, s: &VertexSet) -> Extension {
        assert!(s.len() <= self.cap, "base larger than cap");
        self.visited.clear();
        self.gain = 0;
        self.new_edges = 0;
        let base_edges = {
            let mut e = 0;
            for v in s.iter() {
                e += self.push_vertex(v);
            }
            e
        };
        self.base_len = self.u.len();
        self.best_gain = 0;
        self.best_set = self.u.clone();
        if self.a > 0 {
            self.visited.insert(self.key());
            self.dfs(0);
        }
        let result = Extension {
            gain_numer: self.best_gain,
            set: VertexSet::from_vec(self.best_set.clone()),
            edges: 0,
        };
        for _ in 0..self.base_len {
            self.pop_vertex();
        }
        let edges = induced_edge_count(self.g, &result.set);
        debug_assert!(edges >= base_edges);
        Extension { edges, ..result }
    }

    /// `Phi*(s)` under the cap.
    pub fn phi_star(&mut self, s: &VertexSet) -> Rational {
        let ext = self.best_extension(s);
        Rational::new(self.a * ext.edges as i64 - self.b * ext.set.len() as i64, self.b)
    }

    /// Family with the maximal set taken as every vertex lying in some maximizer.
    pub fn family(&mut self, s: &VertexSet) -> Result<CandidateFamily> {
        let best = self.phi_star(s);
        let mut union = s.clone();
        if s.len() < self.cap {
            for v in 0..self.g.n() as Vertex {
                if !s.contains(v) && self.phi_star(&s.with(v)) == best {
                    union.insert(v);
                }
            }
        }
        let at = self.alpha_tilde();
        let union_optimal = union.len() <= self.cap && phi(self.g, at, &union) == best;
        let maximal_set = if union_optimal { union } else { self.best_extension(s).set };
        let (closure_value, closure_set) = phi_star_closure(self.g, at, s);
        Ok(CandidateFamily {
            base: s.clone(),
            phi_star: best,
            optimal_sets: Vec::new(),
            maximal_set,
            cap_bound: closure_set.len() > self.cap || closure_value > best,
            union_optimal,
        })
    }
}

pub fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}
