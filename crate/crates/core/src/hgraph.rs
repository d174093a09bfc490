use crate::error::{Error, Result};
use crate::rational::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::fmt;

pub type Vertex = u32;

/// Sorted set of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(SmallVec<[Vertex; 8]>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(SmallVec::new())
    }

    pub fn from_vec(mut v: Vec<Vertex>) -> Self {
        v.sort_unstable();
        v.dedup();
        VertexSet(SmallVec::from_vec(v))
    }

    pub fn from_slice(v: &[Vertex]) -> Self {
        Self::from_vec(v.to_vec())
    }

    /// Caller guarantees `v` is strictly increasing.
    pub fn from_sorted(v: &[Vertex]) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(SmallVec::from_slice(v))
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    pub fn remove(&mut self, v: Vertex) -> bool {
        match self.0.binary_search(&v) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn without(&self, v: Vertex) -> Self {
        let mut s = self.clone();
        s.remove(v);
        s
    }

    pub fn with(&self, v: Vertex) -> Self {
        let mut s = self.clone();
        s.insert(v);
        s
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.union_slice(&other.0)
    }

    pub fn union_slice(&self, other: &[Vertex]) -> VertexSet {
        let (a, b) = (&self.0[..], other);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] < b[j] {
                out.push(a[i]);
                i += 1;
            } else if b[j] < a[i] {
                out.push(b[j]);
                j += 1;
            } else {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        VertexSet(out)
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| other.contains(v)).collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| !other.contains(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    /// Comma separated members, or `-` for the empty set.
    pub fn to_token(&self) -> String {
        if self.is_empty() {
            "-".to_string()
        } else {
            self.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        }
    }

    pub fn from_token(s: &str) -> Result<VertexSet> {
        if s == "-" {
            return Ok(VertexSet::new());
        }
        let mut v = Vec::new();
        for part in s.split(',') {
            v.push(
                part.parse::<Vertex>()
                    .map_err(|_| Error::Parameter(format!("bad vertex set token {s:?}")))?,
            );
        }
        let set = VertexSet::from_vec(v.clone());
        if set.len() != v.len() || set.as_slice() != &v[..] {
            return Err(Error::Parameter(format!("vertex set not strictly increasing: {s:?}")));
        }
        Ok(set)
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        VertexSet::from_vec(iter.into_iter().collect())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// c-uniform hypergraph with a lexicographically sorted edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    c: usize,
    flat: Vec<Vertex>,
    incidence: Vec<Vec<u32>>,
}

impl Hypergraph {
    /// Sorts each edge and the edge list; rejects out-of-range, repeated vertices and duplicate edges.
    pub fn new(n: usize, c: usize, edges: Vec<Vec<Vertex>>) -> Result<Self> {
        if c == 0 {
            return Err(Error::Parameter("uniformity must be positive".into()));
        }
        let mut edges: Vec<Vec<Vertex>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e
            })
            .collect();
        for e in &edges {
            if e.len() != c {
                return Err(Error::Parameter(format!("edge {e:?} does not have {c} vertices")));
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parameter(format!("edge {e:?} repeats a vertex")));
            }
            if e.iter().any(|&v| v as usize >= n) {
                return Err(Error::Parameter(format!("edge {e:?} out of range for n={n}")));
            }
        }
        edges.sort();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter("duplicate edge".into()));
        }
        let flat: Vec<Vertex> = edges.into_iter().flatten().collect();
        Ok(Self::from_flat(n, c, flat))
    }

    fn from_flat(n: usize, c: usize, flat: Vec<Vertex>) -> Self {
        let m = flat.len() / c;
        let mut incidence = vec![Vec::new(); n];
        for j in 0..m {
            for &v in &flat[j * c..(j + 1) * c] {
                incidence[v as usize].push(j as u32);
            }
        }
        Hypergraph { n, c, flat, incidence }
    }

    pub fn empty(n: usize, c: usize) -> Self {
        Self::from_flat(n, c, Vec::new())
    }

    pub fn complete(n: usize, c: usize) -> Self {
        let mut flat = Vec::new();
        for_each_combination(n, c, |comb| flat.extend_from_slice(comb));
        Self::from_flat(n, c, flat)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn m(&self) -> usize {
        self.flat.len().checked_div(self.c).unwrap_or(0)
    }

    pub fn edge(&self, j: usize) -> &[Vertex] {
        &self.flat[j * self.c..(j + 1) * self.c]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[Vertex]> + '_ {
        self.flat.chunks_exact(self.c.max(1))
    }

    pub fn incidence(&self, v: Vertex) -> &[u32] {
        &self.incidence[v as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.incidence[v as usize].len()
    }

    pub fn edge_index(&self, e: &[Vertex]) -> Option<usize> {
        let m = self.m();
        let (mut lo, mut hi) = (0usize, m);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.edge(mid).cmp(e) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn has_edge(&self, e: &[Vertex]) -> bool {
        self.edge_index(e).is_some()
    }

    /// Re-derives every structural invariant.
    pub fn check_invariants(&self) -> Result<()> {
        for (j, e) in self.edges().enumerate() {
            if e.windows(2).any(|w| w[0] >= w[1]) || e.iter().any(|&v| v as usize >= self.n) {
                return Err(Error::Contract(format!("edge {j} malformed: {e:?}")));
            }
            if j > 0 && self.edge(j - 1) >= e {
                return Err(Error::Contract(format!("edge list not strictly increasing at {j}")));
            }
        }
        let rebuilt = Self::from_flat(self.n, self.c, self.flat.clone());
        if rebuilt.incidence != self.incidence {
            return Err(Error::Contract("incidence index inconsistent".into()));
        }
        Ok(())
    }

    pub fn to_hgr(&self) -> String {
        let mut s = format!("HGR {} {} {}\n", self.n, self.c, self.m());
        for e in self.edges() {
            let parts: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            s.push_str(&parts.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_hgr(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 4 || fields[0] != "HGR" {
            return Err(Error::Parse { line: 1, msg: format!("bad header {header:?}") });
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse { line: 1, msg: format!("bad number {s:?}") })
        };
        let (n, c, m) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        let mut flat = Vec::with_capacity(m * c);
        let mut count = 0;
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let before = flat.len();
            for tok in line.split(' ') {
                let v: Vertex = tok
                    .parse()
                    .map_err(|_| Error::Parse { line: line_no, msg: format!("bad vertex {tok:?}") })?;
                flat.push(v);
            }
            if flat.len() - before != c {
                return Err(Error::Parse { line: line_no, msg: format!("expected {c} vertices") });
            }
            count += 1;
        }
        if count != m {
            return Err(Error::Parse { line: 1, msg: format!("header says {m} edges, found {count}") });
        }
        let g = Self::from_flat(n, c, flat);
        g.check_invariants().map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
        Ok(g)
    }
}

/// Calls `f` on every c-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, c: usize, mut f: impl FnMut(&[Vertex])) {
    if c > n {
        return;
    }
    let mut comb: Vec<Vertex> = (0..c as Vertex).collect();
    loop {
        f(&comb);
        let mut i = c;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if (comb[i] as usize) < n - c + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        comb[i] += 1;
        for j in i + 1..c {
            comb[j] = comb[j - 1] + 1;
        }
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("{name}={p} outside [0,1]")));
    }
    Ok(())
}

fn check_uniformity(n: usize, c: usize) -> Result<()> {
    if c < 2 || c > n {
        return Err(Error::Parameter(format!("need 2 <= c <= n, got c={c}, n={n}")));
    }
    Ok(())
}

/// Independent seed for `stream` derived from `seed` (splitmix64 finaliser over both).
pub fn substream(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn sample_gnp(n: usize, c: usize, prob: f64, seed: u64) -> Result<Hypergraph> {
    check_uniformity(n, c)?;
    check_prob("prob", prob)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flat = Vec::new();
    for_each_combination(n, c, |comb| {
        if rng.gen_bool(prob) {
            flat.extend_from_slice(comb);
        }
    });
    Ok(Hypergraph::from_flat(n, c, flat))
}

/// Marks vertices first, then decides c-sets in lexicographic order from the same generator.
pub fn sample_planted(
    n: usize,
    c: usize,
    prob: f64,
    k_over_n: f64,
    q: f64,
    seed: u64,
) -> Result<(Hypergraph, VertexSet)> {
    check_uniformity(n, c)?;
    check_prob("prob", prob)?;
    check_prob("kOverN", k_over_n)?;
    check_prob("q", q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let marked_flags: Vec<bool> = (0..n).map(|_| rng.gen_bool(k_over_n)).collect();
    let mut flat = Vec::new();
    for_each_combination(n, c, |comb| {
        let inside = comb.iter().all(|&v| marked_flags[v as usize]);
        if rng.gen_bool(if inside { q } else { prob }) {
            flat.extend_from_slice(comb);
        }
    });
    let marked = (0..n as Vertex).filter(|&v| marked_flags[v as usize]).collect();
    Ok((Hypergraph::from_flat(n, c, flat), marked))
}

pub fn induced_edge_count(g: &Hypergraph, s: &VertexSet) -> usize {
    let mut count = 0;
    for v in s.iter() {
        for &j in g.incidence(v) {
            let e = g.edge(j as usize);
            if e[0] == v && e[1..].iter().all(|&u| s.contains(u)) {
                count += 1;
            }
        }
    }
    count
}

pub fn incident_edges<'a>(g: &'a Hypergraph, i: Vertex, exclude_within: &VertexSet) -> Vec<&'a [Vertex]> {
    g.incidence(i)
        .iter()
        .map(|&j| g.edge(j as usize))
        .filter(|e| !e.iter().all(|&u| exclude_within.contains(u)))
        .collect()
}

/// Returns a set `S`, `|S| <= max_size`, with `|E(S)| > threshold * |S|`, if any exists.
///
/// Exact for every `max_size`: a witness exists iff the capped maximum of
/// `|E(S)|/threshold - |S|` over nonempty sets is positive, which the capped
/// search of [`crate::phi`] computes exactly. The returned set is that maximizer.
pub fn witness_scan(g: &Hypergraph, threshold: Rational, max_size: usize) -> Option<VertexSet> {
    assert!(threshold > Rational::from_integer(0), "threshold must be positive");
    let ratio = threshold.recip();
    let mut solver = crate::phi::CappedSolver::new(g, ratio, max_size);
    let best = solver.best_extension(&VertexSet::new());
    if best.gain_numer > 0 {
        Some(best.set)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub left_count: usize,
    pub right_count: usize,
    pub edges: Vec<(u32, u32)>,
}

impl BipartiteGraph {
    pub fn new(left_count: usize, right_count: usize, mut edges: Vec<(u32, u32)>) -> Result<Self> {
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter("duplicate bipartite edge".into()));
        }
        if edges
            .iter()
            .any(|&(l, r)| l as usize >= left_count || r as usize >= right_count)
        {
            return Err(Error::Parameter("bipartite edge out of range".into()));
        }
        Ok(BipartiteGraph { left_count, right_count, edges })
    }

    /// Right neighbours of each left node.
    pub fn left_adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.left_count];
        for &(l, r) in &self.edges {
            adj[l as usize].push(r);
        }
        adj
    }
}

pub fn to_incidence_bipartite(g: &Hypergraph) -> BipartiteGraph {
    let mut edges = Vec::with_capacity(g.m() * g.c());
    for (j, e) in g.edges().enumerate() {
        for &v in e {
            edges.push((j as u32, v));
        }
    }
    BipartiteGraph { left_count: g.m(), right_count: g.n(), edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    pub(crate) fn cycle5() -> Hypergraph {
        Hypergraph::new(5, 2, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 0]]).unwrap()
    }

    #[test]
    fn gnp_extremes() {
        assert_eq!(sample_gnp(5, 2, 1.0, 7).unwrap().m(), 10);
        assert_eq!(sample_gnp(5, 3, 0.0, 7).unwrap().m(), 0);
        let a = sample_gnp(20, 3, 0.3, 99).unwrap();
        let b = sample_gnp(20, 3, 0.3, 99).unwrap();
        assert_eq!(a, b);
        a.check_invariants().unwrap();
        assert!(sample_gnp(5, 1, 0.5, 0).is_err());
        assert!(sample_gnp(5, 6, 0.5, 0).is_err());
        assert!(sample_gnp(5, 2, 1.5, 0).is_err());
    }

    #[test]
    fn planted_extremes() {
        let (g, marked) = sample_planted(6, 3, 0.2, 1.0, 1.0, 3).unwrap();
        assert_eq!(marked.len(), 6);
        assert_eq!(g.m(), 20);
        let (g, marked) = sample_planted(12, 2, 0.4, 0.0, 0.9, 5).unwrap();
        assert!(marked.is_empty());
        g.check_invariants().unwrap();
    }

    #[test]
    fn induced_counts() {
        let k5 = Hypergraph::complete(5, 2);
        assert_eq!(induced_edge_count(&k5, &VertexSet::from_slice(&[0, 2, 4])), 3);
        assert_eq!(induced_edge_count(&k5, &VertexSet::new()), 0);
        assert_eq!(induced_edge_count(&cycle5(), &VertexSet::from_slice(&[0, 1, 2])), 2);
    }

    #[test]
    fn incident() {
        let k4 = Hypergraph::complete(4, 2);
        assert_eq!(incident_edges(&k4, 0, &VertexSet::new()).len(), 3);
        assert!(incident_edges(&k4, 0, &VertexSet::from_slice(&[0, 1, 2, 3])).is_empty());
        assert!(incident_edges(&Hypergraph::empty(4, 2), 1, &VertexSet::new()).is_empty());
    }

    #[test]
    fn witness_examples() {
        assert_eq!(witness_scan(&Hypergraph::empty(6, 2), int(1), 6), None);
        let k4 = Hypergraph::complete(4, 2);
        assert_eq!(witness_scan(&k4, int(1), 4), Some(VertexSet::from_slice(&[0, 1, 2, 3])));
        assert_eq!(witness_scan(&cycle5(), int(1), 5), None);
        assert_eq!(witness_scan(&k4, rat(3, 2), 4), None);
    }

    #[test]
    fn bipartite_examples() {
        let g = Hypergraph::new(4, 2, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        let b = to_incidence_bipartite(&g);
        assert_eq!((b.left_count, b.right_count, b.edges.len()), (3, 4, 6));
        assert_eq!(to_incidence_bipartite(&Hypergraph::empty(3, 2)).left_count, 0);
        let g = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(to_incidence_bipartite(&g).edges, vec![(0, 0), (0, 1), (0, 2)]);
    }

    #[test]
    fn hgr_round_trip() {
        let g = sample_gnp(15, 3, 0.1, 4).unwrap();
        let text = g.to_hgr();
        let back = Hypergraph::from_hgr(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_hgr(), text);
        assert!(Hypergraph::from_hgr("HGR 3 2 1\n1 0\n").is_err());
        assert!(Hypergraph::from_hgr("HGR 3 2 2\n0 1\n").is_err());
    }

    #[test]
    fn vertex_set_ops() {
        let a = VertexSet::from_slice(&[3, 1, 2]);
        let b = VertexSet::from_slice(&[2, 5]);
        assert_eq!(a.union(&b).as_slice(), &[1, 2, 3, 5]);
        assert_eq!(a.intersection(&b).as_slice(), &[2]);
        assert_eq!(a.difference(&b).as_slice(), &[1, 3]);
        assert!(VertexSet::from_slice(&[1, 3]).is_subset(&a));
        assert_eq!(VertexSet::from_token(&a.to_token()).unwrap(), a);
        assert_eq!(VertexSet::from_token("-").unwrap(), VertexSet::new());
        assert!(VertexSet::from_token("2,1").is_err());
    }
}
