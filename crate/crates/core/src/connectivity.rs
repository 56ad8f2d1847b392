//! Edge configurations, component counts and pivotality queries.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A subset `A` of the edge set, stored as a bitset over edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeConfig {
    words: Vec<u64>,
    len: usize,
}

impl EdgeConfig {
    pub fn empty(len: usize) -> Self {
        EdgeConfig { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn full(len: usize) -> Self {
        let mut c = Self::empty(len);
        for (i, w) in c.words.iter_mut().enumerate() {
            let bits = (len - 64 * i).min(64);
            *w = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        }
        c
    }

    /// Low `len` bits of `mask`; `len <= 64`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut c = Self::empty(len);
        if len > 0 {
            c.words[0] = if len == 64 { mask } else { mask & ((1u64 << len) - 1) };
        }
        c
    }

    pub fn from_edges(len: usize, edges: impl IntoIterator<Item = usize>) -> Self {
        let mut c = Self::empty(len);
        for e in edges {
            c.insert(e);
        }
        c
    }

    /// Low 64 bits as an integer mask.
    pub fn to_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, e: usize) -> bool {
        debug_assert!(e < self.len);
        self.words[e >> 6] >> (e & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, e: usize) {
        debug_assert!(e < self.len);
        self.words[e >> 6] |= 1 << (e & 63);
    }

    #[inline]
    pub fn remove(&mut self, e: usize) {
        debug_assert!(e < self.len);
        self.words[e >> 6] &= !(1 << (e & 63));
    }

    #[inline]
    pub fn set(&mut self, e: usize, occupied: bool) {
        if occupied {
            self.insert(e)
        } else {
            self.remove(e)
        }
    }

    /// `N(A) = |A|`, the number of occupied edges.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &EdgeConfig) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&e| self.contains(e))
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// `k(A)`: number of connected components of the spanning subgraph `(V, A)`.
pub fn component_count(g: &Graph, a: &EdgeConfig) -> usize {
    debug_assert_eq!(a.len(), g.edge_count());
    let mut sets = DisjointSets::new(g.vertex_count());
    let mut k = g.vertex_count();
    for e in a.iter() {
        let (u, v) = g.edge(e);
        if sets.union(u, v) {
            k -= 1;
        }
    }
    k
}

/// Whether edge `e` is pivotal to `A`: its endpoints are disconnected in
/// `(V, A \ {e})`. Independent of whether `e` itself is in `A`.
pub fn is_pivotal(g: &Graph, a: &EdgeConfig, e: usize) -> Result<bool> {
    if e >= g.edge_count() {
        return Err(Error::OutOfRange { index: e, size: g.edge_count() });
    }
    Ok(BfsOracle::new(g).is_pivotal(g, a, e))
}

/// Answers pivotality queries against a graph. Implementations may keep
/// mutable scratch space, so each worker owns its own instance.
pub trait PivotalityOracle {
    /// `e` must be a valid edge index of `g`, and `a` must belong to `g`.
    fn is_pivotal(&mut self, g: &Graph, a: &EdgeConfig, e: usize) -> bool;
}

/// Breadth-first search over `A \ {e}`, grown alternately from both endpoints.
///
/// Stops as soon as the two searches meet (not pivotal) or one of them runs out
/// of frontier (pivotal). Marks live in a reusable buffer keyed by a
/// generation counter, so a query allocates nothing.
#[derive(Debug, Clone)]
pub struct BfsOracle {
    mark: Vec<u32>,
    generation: u32,
    queues: [Vec<usize>; 2],
}

impl BfsOracle {
    pub fn new(g: &Graph) -> Self {
        BfsOracle {
            mark: vec![0; g.vertex_count()],
            generation: 0,
            queues: [Vec::new(), Vec::new()],
        }
    }

    fn next_generation(&mut self) -> u32 {
        // each query uses the two marks 2k+1 and 2k+2
        if self.generation >= u32::MAX - 4 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.generation = 0;
        }
        self.generation += 2;
        self.generation
    }
}

impl PivotalityOracle for BfsOracle {
    fn is_pivotal(&mut self, g: &Graph, a: &EdgeConfig, e: usize) -> bool {
        let (u, v) = g.edge(e);
        if self.mark.len() != g.vertex_count() {
            self.mark = vec![0; g.vertex_count()];
            self.generation = 0;
        }
        let gen = self.next_generation();
        let side_mark = [gen - 1, gen];
        self.mark[u] = side_mark[0];
        self.mark[v] = side_mark[1];
        let [qa, qb] = &mut self.queues;
        qa.clear();
        qb.clear();
        qa.push(u);
        qb.push(v);
        let mut heads = [0usize, 0usize];
        let mut side = 0;
        loop {
            let (queue, other_mark) = if side == 0 { (&mut *qa, side_mark[1]) } else { (&mut *qb, side_mark[0]) };
            if heads[side] == queue.len() {
                return true;
            }
            let x = queue[heads[side]];
            heads[side] += 1;
            for inc in g.incident(x) {
                if inc.edge == e || !a.contains(inc.edge) {
                    continue;
                }
                let y = inc.other;
                let my = self.mark[y];
                if my == other_mark {
                    return false;
                }
                if my != side_mark[side] {
                    self.mark[y] = side_mark[side];
                    queue.push(y);
                }
            }
            side ^= 1;
        }
    }
}

/// Recomputes a full component labelling of `A \ {e}` for every query.
/// Slow; used to cross-check [`BfsOracle`].
#[derive(Debug, Clone, Default)]
pub struct LabelingOracle;

impl PivotalityOracle for LabelingOracle {
    fn is_pivotal(&mut self, g: &Graph, a: &EdgeConfig, e: usize) -> bool {
        let mut sets = DisjointSets::new(g.vertex_count());
        for f in a.iter().filter(|&f| f != e) {
            let (x, y) = g.edge(f);
            sets.union(x, y);
        }
        let (u, v) = g.edge(e);
        sets.find(u) != sets.find(v)
    }
}
