//! Capped `Phi` maximization specialised to graphs (c = 2).
//!
//! Same search as the generic solver, but every added vertex is a single neighbour, so the
//! state reduces to per-vertex neighbour counts `d` and a histogram of `d` over outside
//! vertices. Both update in O(deg) per push and give the completion bound in O(cap).

use crate::hgraph::{Hypergraph, Vertex, VertexSet};
use crate::phi::Extension;
use crate::rational::Rational;
use rustc_hash::FxHashSet;

pub struct GraphSearch<'g> {
    g: &'g Hypergraph,
    nbrs: Vec<Vec<Vertex>>,
    a: i64,
    b: i64,
    cap: usize,
    /// Smallest internal degree an added vertex of an optimum can have.
    need: i32,
    in_u: Vec<bool>,
    d: Vec<i32>,
    hist: Vec<i32>,
    u: Vec<Vertex>,
    base_len: usize,
    gain: i64,
    best_gain: i64,
    best_set: Vec<Vertex>,
    anchor: Option<Vertex>,
    pieces: Vec<Vec<Vertex>>,
    visited: FxHashSet<u128>,
    mark: Vec<u32>,
    stamp: u32,
    pub nodes: u64,
}

impl<'g> GraphSearch<'g> {
    /// `pieces` are the detached nonnegative sets used by unanchored searches.
    pub fn new(g: &'g Hypergraph, alpha_tilde: Rational, cap: usize, pieces: &[VertexSet]) -> Self {
        assert_eq!(g.c(), 2, "graph search needs c = 2");
        assert!(cap <= 8 && g.n() <= 1 << 16, "state key holds at most 8 vertices below 2^16");
        let n = g.n();
        let mut nbrs = vec![Vec::new(); n];
        for e in g.edges() {
            nbrs[e[0] as usize].push(e[1]);
            nbrs[e[1] as usize].push(e[0]);
        }
        let (a, b) = (*alpha_tilde.numer(), *alpha_tilde.denom());
        let need = if a > 0 { ((b + a - 1) / a) as i32 } else { i32::MAX };
        GraphSearch {
            g,
            nbrs,
            a,
            b,
            cap,
            need,
            in_u: vec![false; n],
            d: vec![0; n],
            hist: vec![0; cap + 2],
            u: Vec::with_capacity(cap),
            base_len: 0,
            gain: 0,
            best_gain: 0,
            best_set: Vec::new(),
            anchor: None,
            pieces: pieces.iter().map(|p| p.as_slice().to_vec()).collect(),
            visited: FxHashSet::default(),
            mark: vec![0; n],
            stamp: 0,
            nodes: 0,
        }
    }

    fn push(&mut self, v: Vertex) {
        let vi = v as usize;
        let dv = self.d[vi];
        if dv > 0 {
            self.hist[dv as usize] -= 1;
        }
        self.in_u[vi] = true;
        self.u.push(v);
        self.gain += self.a * dv as i64 - self.b;
        for k in 0..self.nbrs[vi].len() {
            let x = self.nbrs[vi][k] as usize;
            let old = self.d[x];
            self.d[x] = old + 1;
            if !self.in_u[x] {
                if old > 0 {
                    self.hist[old as usize] -= 1;
                }
                self.hist[old as usize + 1] += 1;
            }
        }
    }

    fn pop(&mut self) {
        let v = self.u.pop().unwrap();
        let vi = v as usize;
        for k in 0..self.nbrs[vi].len() {
            let x = self.nbrs[vi][k] as usize;
            let old = self.d[x];
            self.d[x] = old - 1;
            if !self.in_u[x] {
                self.hist[old as usize] -= 1;
                if old > 1 {
                    self.hist[old as usize - 1] += 1;
                }
            }
        }
        self.in_u[vi] = false;
        let dv = self.d[vi];
        self.gain -= self.a * dv as i64 - self.b;
        if dv > 0 {
            self.hist[dv as usize] += 1;
        }
    }

    fn key(&self) -> u128 {
        let mut k: [Vertex; 8] = [u32::MAX; 8];
        k[..self.u.len()].copy_from_slice(&self.u);
        k[..self.u.len()].sort_unstable();
        k.iter().fold(0u128, |acc, &v| (acc << 16) | (v as u128 & 0xffff))
    }

    /// Sum of the `j` largest outside neighbour counts, for every `j` up to `rem`.
    fn top_sums(&self, rem: usize, out: &mut [i64]) {
        let mut j = 0;
        let mut acc = 0i64;
        out[0] = 0;
        for level in (1..self.hist.len()).rev() {
            let mut count = self.hist[level];
            while count > 0 && j < rem {
                j += 1;
                acc += level as i64;
                out[j] = acc;
                count -= 1;
            }
            if j == rem {
                return;
            }
        }
        while j < rem {
            j += 1;
            out[j] = acc;
        }
    }

    /// Upper bound on the gain from adding at most `rem` vertices, where at least `req`
    /// of them must come from `req_pool`.
    fn bound(&self, rem: usize, req: usize, req_pool: &[i32]) -> i64 {
        let mut tops = [0i64; 10];
        self.top_sums(rem, &mut tops);
        let forced: i64 = req_pool.iter().take(req).map(|&x| x as i64).sum();
        let mut best = if req == 0 { 0 } else { i64::MIN };
        for j in req.max(1)..=rem {
            let j64 = j as i64;
            let top = if req == 0 { tops[j] } else { forced + tops[j - req] };
            best = best.max(self.a * (top + j64 * (j64 - 1) / 2) - self.b * j64);
        }
        best
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        self.stamp
    }

    /// Most constrained deficient added vertex: (vertex, missing degree, free neighbours).
    fn deficient(&self) -> Option<(Vertex, usize)> {
        let mut pick = None;
        let mut pick_free = usize::MAX;
        for &v in &self.u[self.base_len..] {
            let dv = self.d[v as usize];
            if dv < self.need {
                let free = self.nbrs[v as usize].len() - dv as usize;
                if free < pick_free {
                    pick_free = free;
                    pick = Some((v, (self.need - dv) as usize));
                }
            }
        }
        pick
    }

    fn record(&mut self) {
        if self.gain > self.best_gain || (self.gain == self.best_gain && self.u.len() > self.best_set.len()) {
            self.best_gain = self.gain;
            self.best_set.clone_from(&self.u);
        }
    }

    fn dfs(&mut self, piece_from: usize) {
        self.nodes += 1;
        self.record();
        let rem = self.cap - self.u.len();
        if rem == 0 {
            return;
        }
        // Ties with the best gain are still explored: a larger tied set wins.
        let target = self.best_gain;
        let mut options: Vec<(i32, Vertex)> = Vec::new();
        if let Some((v, missing)) = self.deficient() {
            if missing > rem {
                return;
            }
            for &x in &self.nbrs[v as usize] {
                if !self.in_u[x as usize] {
                    options.push((self.d[x as usize], x));
                }
            }
            if options.len() < missing {
                return;
            }
            options.sort_unstable_by(|p, q| q.cmp(p));
            let pool: Vec<i32> = options.iter().map(|p| p.0).collect();
            if self.gain + self.bound(rem, missing, &pool) < target {
                return;
            }
            self.explore(&options);
            return;
        }
        if self.gain + self.bound(rem, 0, &[]) < target {
            return;
        }
        let stamp = self.next_stamp();
        let start = if self.anchor.is_some() { self.base_len } else { 0 };
        let sources = self.anchor.into_iter().chain(self.u[start..].iter().copied());
        let sources: Vec<Vertex> = sources.collect();
        for s in sources {
            for &x in &self.nbrs[s as usize] {
                let xi = x as usize;
                if !self.in_u[xi] && self.mark[xi] != stamp {
                    self.mark[xi] = stamp;
                    options.push((self.d[xi], x));
                }
            }
        }
        options.sort_unstable_by(|p, q| q.cmp(p));
        self.explore(&options);
        if self.anchor.is_none() {
            for p in piece_from..self.pieces.len() {
                let len = self.pieces[p].len();
                if len > self.cap - self.u.len() || self.pieces[p].iter().any(|&w| self.in_u[w as usize]) {
                    continue;
                }
                for k in 0..len {
                    let w = self.pieces[p][k];
                    self.push(w);
                }
                if self.visited.insert(self.key()) {
                    self.dfs(p + 1);
                }
                for _ in 0..len {
                    self.pop();
                }
            }
        }
    }

    fn explore(&mut self, options: &[(i32, Vertex)]) {
        for &(_, x) in options {
            self.push(x);
            // Settle leaves and hopeless children here, before paying for the visited set.
            self.record();
            let rem = self.cap - self.u.len();
            if rem > 0 && self.gain + self.bound(rem, 0, &[]) >= self.best_gain && self.visited.insert(self.key()) {
                self.dfs(0);
            }
            self.pop();
        }
    }

    fn run(&mut self, s: &VertexSet) -> Extension {
        assert!(s.len() <= self.cap, "base larger than cap");
        self.visited.clear();
        self.gain = 0;
        for v in s.iter() {
            self.push(v);
        }
        let base_gain = self.gain;
        self.base_len = self.u.len();
        self.gain = 0;
        self.best_gain = 0;
        self.best_set.clone_from(&self.u);
        if self.a > 0 {
            self.visited.insert(self.key());
            self.dfs(0);
        }
        self.gain = base_gain;
        for _ in 0..self.base_len {
            self.pop();
        }
        debug_assert_eq!(self.gain, 0);
        let set = VertexSet::from_vec(self.best_set.clone());
        let edges = crate::hgraph::induced_edge_count(self.g, &set);
        Extension { gain_numer: self.best_gain, set, edges }
    }

    pub fn best_extension(&mut self, s: &VertexSet) -> Extension {
        self.anchor = None;
        self.run(s)
    }

    /// See `CappedSolver::best_extension_touching`.
    pub fn best_extension_touching(&mut self, s: &VertexSet, x: Vertex) -> Extension {
        assert!(s.contains(x), "anchor outside base");
        self.anchor = Some(x);
        let ext = self.run(s);
        self.anchor = None;
        ext
    }
}
