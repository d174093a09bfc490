//! Memoized `Phi*` evaluation for many overlapping base sets.

use crate::graph_search::GraphSearch;
use crate::hgraph::{Hypergraph, Vertex, VertexSet};
use crate::phi::{CappedSolver, Extension};
use crate::rational::Rational;
use rustc_hash::FxHashMap;

#[derive(Clone, Debug)]
struct Entry {
    /// `denom(alpha_tilde) * Phi*(S)`.
    value: i64,
    /// No superset under the cap beats `S` itself.
    tight: bool,
    /// No nonempty extension under the cap even ties with `S`.
    closed: bool,
    best: VertexSet,
}

/// Caches `Phi*(S)` and reuses sets without improving extensions.
///
/// If `S \ {x}` is closed then the largest optimum for `S` only adds vertices connected to
/// `x`, which is a much smaller search than the unrestricted one.
pub struct PhiOracle<'g> {
    g: &'g Hypergraph,
    solver: CappedSolver<'g>,
    fast: Option<GraphSearch<'g>>,
    pieces: Vec<VertexSet>,
    memo: FxHashMap<VertexSet, Entry>,
    pub anchored: u64,
    pub full: u64,
}

impl<'g> PhiOracle<'g> {
    pub fn new(g: &'g Hypergraph, alpha_tilde: Rational, cap: usize) -> Self {
        let mut solver = CappedSolver::new(g, alpha_tilde, cap);
        let use_fast = g.c() == 2 && cap <= 8 && g.n() <= 1 << 16 && *alpha_tilde.numer() > 0;
        let pieces = if use_fast { solver.pieces() } else { Vec::new() };
        Self::assemble(g, solver, use_fast, pieces)
    }

    fn assemble(g: &'g Hypergraph, solver: CappedSolver<'g>, use_fast: bool, pieces: Vec<VertexSet>) -> Self {
        let fast = use_fast.then(|| GraphSearch::new(g, solver.alpha_tilde(), solver.cap(), &pieces));
        PhiOracle {
            g,
            solver,
            fast,
            pieces,
            memo: FxHashMap::default(),
            anchored: 0,
            full: 0,
        }
    }

    pub fn graph(&self) -> &'g Hypergraph {
        self.g
    }

    pub fn alpha_tilde(&self) -> Rational {
        self.solver.alpha_tilde()
    }

    pub fn cap(&self) -> usize {
        self.solver.cap()
    }

    pub fn cached(&self) -> usize {
        self.memo.len()
    }

    pub fn clear(&mut self) {
        self.memo.clear();
    }

    /// Records a known optimum for `s`, as if it had been computed here.
    pub fn seed(&mut self, s: &VertexSet, phi_star: Rational, best: VertexSet) {
        let den = *self.solver.alpha_tilde().denom();
        let scaled = phi_star * den;
        assert!(scaled.is_integer(), "phi_star {phi_star} not on the alpha_tilde grid");
        let value = scaled.to_integer();
        let own = self.scaled_phi(crate::hgraph::induced_edge_count(self.g, s), s.len());
        let closed = best == *s;
        self.memo.insert(s.clone(), Entry { value, tight: value == own, closed, best });
    }

    /// A fresh oracle on the same graph sharing everything cached so far.
    pub fn fork(&self) -> PhiOracle<'g> {
        let solver = CappedSolver::new(self.g, self.solver.alpha_tilde(), self.solver.cap());
        let mut other = Self::assemble(self.g, solver, self.fast.is_some(), self.pieces.clone());
        other.memo = self.memo.clone();
        other
    }

    fn scaled_phi(&self, edges: usize, size: usize) -> i64 {
        let at = self.solver.alpha_tilde();
        at.numer() * edges as i64 - at.denom() * size as i64
    }

    fn entry(&mut self, s: &VertexSet) -> &Entry {
        if !self.memo.contains_key(s) {
            let e = self.compute(s);
            self.memo.insert(s.clone(), e);
        }
        &self.memo[s]
    }

    fn compute(&mut self, s: &VertexSet) -> Entry {
        let anchor = self.pick_anchor(s);
        let ext: Extension = match anchor {
            Some(x) => {
                self.anchored += 1;
                match &mut self.fast {
                    Some(f) => f.best_extension_touching(s, x),
                    None => self.solver.best_extension_touching(s, x),
                }
            }
            None => {
                self.full += 1;
                match &mut self.fast {
                    Some(f) => f.best_extension(s),
                    None => self.solver.best_extension(s),
                }
            }
        };
        Entry {
            value: self.scaled_phi(ext.edges, ext.set.len()),
            tight: ext.gain_numer == 0,
            closed: ext.set == *s,
            best: ext.set,
        }
    }

    fn pick_anchor(&mut self, s: &VertexSet) -> Option<Vertex> {
        if s.is_empty() {
            return None;
        }
        let mut untried = None;
        for x in s.iter() {
            let rest = s.without(x);
            match self.memo.get(&rest) {
                Some(e) if e.closed => return Some(x),
                Some(_) => {}
                None if untried.is_none() => untried = Some(x),
                None => {}
            }
        }
        let x = untried?;
        if self.entry(&s.without(x)).closed {
            Some(x)
        } else {
            None
        }
    }

    /// `denom(alpha_tilde) * Phi*(S)`.
    pub fn scaled(&mut self, s: &VertexSet) -> i64 {
        self.entry(s).value
    }

    pub fn phi_star(&mut self, s: &VertexSet) -> Rational {
        let v = self.scaled(s);
        Rational::new(v, *self.solver.alpha_tilde().denom())
    }

    /// The largest maximizer for `S`; the maximal one when optima are closed under union.
    pub fn best_set(&mut self, s: &VertexSet) -> VertexSet {
        self.entry(s).best.clone()
    }

    pub fn is_tight(&mut self, s: &VertexSet) -> bool {
        self.entry(s).tight
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::sample_gnp;
    use crate::rational::rat;

    #[test]
    fn matches_unrestricted_search() {
        let mut anchored = 0;
        for seed in 0..6u64 {
            for &(c, prob) in &[(2usize, 0.3), (2, 0.15), (3, 0.12), (3, 0.05)] {
                let g = sample_gnp(14, c, prob, seed).unwrap();
                for at in [rat(9, 20), rat(4, 5)] {
                    let mut plain = CappedSolver::new(&g, at, 6);
                    let mut oracle = PhiOracle::new(&g, at, 6);
                    for a in 0..14u32 {
                        for b in a..14u32 {
                            for d in [b, (b + 3) % 14] {
                                let s = VertexSet::from_vec(vec![a, b, d]);
                                assert_eq!(oracle.phi_star(&s), plain.phi_star(&s), "seed {seed} c {c} {s}");
                            }
                        }
                    }
                    anchored += oracle.anchored;
                }
            }
        }
        assert!(anchored > 0);
    }

    #[test]
    fn ties_resolve_to_the_maximal_optimum() {
        let mut checked = 0;
        for seed in 0..8u64 {
            let g = sample_gnp(12, 2, 0.3, seed).unwrap();
            let at = rat(1, 2);
            let mut oracle = PhiOracle::new(&g, at, 6);
            let mut generic = CappedSolver::new(&g, at, 6);
            for a in 0..12u32 {
                for b in a..12u32 {
                    let s = VertexSet::from_vec(vec![a, b]);
                    let fam = crate::phi::phi_star_bruteforce(&g, at, &s, 6).unwrap();
                    if !fam.union_optimal {
                        continue;
                    }
                    checked += 1;
                    assert_eq!(oracle.best_set(&s), fam.maximal_set, "seed {seed} {s}");
                    assert_eq!(generic.best_extension(&s).set, fam.maximal_set, "seed {seed} {s}");
                }
            }
        }
        assert!(checked > 100);
    }
}
