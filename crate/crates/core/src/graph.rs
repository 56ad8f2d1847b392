//! Finite graphs the dynamics run on.
//!
//! Tori `Z_L^d` number their vertices row-major over coordinates (the first
//! coordinate varies slowest) and enumerate edges direction-major, then
//! vertex-major: edge `dir * n + v` joins `v` to its `+1` neighbour along
//! `dir`. Seeded runs therefore reproduce exactly across platforms.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeShape {
    Path,
    Star,
    BalancedBinary,
}

/// How a graph was built. Serialized with a `kind` tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSpec {
    Torus {
        d: usize,
        #[serde(rename = "L")]
        l: usize,
    },
    Tree {
        shape: TreeShape,
        size: usize,
    },
    Custom {
        n: usize,
        edges: Vec<(usize, usize)>,
    },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Torus { d, l } => Graph::torus(*d, *l),
            GraphSpec::Tree { shape, size } => Graph::tree(*shape, *size),
            GraphSpec::Custom { n, edges } => Graph::from_edges(*n, edges.clone()),
        }
    }
}

/// JSON description used in experiment manifests and sample records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDescriptor {
    #[serde(flatten)]
    pub spec: GraphSpec,
    pub n: usize,
    pub m: usize,
}

/// Immutable, connected graph with stable edge indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    // CSR incidence: neighbours of v are adj[offsets[v]..offsets[v + 1]]
    offsets: Vec<usize>,
    adj: Vec<Incidence>,
    spec: GraphSpec,
}

/// One entry of a vertex's incidence list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub other: usize,
}

impl Graph {
    /// The torus `Z_L^d`; requires `d >= 1` and `L >= 3`.
    pub fn torus(d: usize, l: usize) -> Result<Graph> {
        if d < 1 {
            return Err(Error::InvalidGraph(format!("torus dimension must be >= 1, got {d}")));
        }
        if l < 3 {
            return Err(Error::InvalidGraph(format!(
                "torus side must be >= 3 (smaller sides create parallel edges), got {l}"
            )));
        }
        let n = l
            .checked_pow(d as u32)
            .filter(|&n| n.checked_mul(d).is_some())
            .ok_or_else(|| Error::InvalidGraph(format!("torus {l}^{d} is too large")))?;
        let mut edges = Vec::with_capacity(d * n);
        for dir in 0..d {
            let stride = l.pow((d - 1 - dir) as u32);
            for v in 0..n {
                let coord = (v / stride) % l;
                let w = if coord + 1 == l { v - coord * stride } else { v + stride };
                edges.push((v, w));
            }
        }
        Self::assemble(n, edges, GraphSpec::Torus { d, l })
    }

    /// The cycle `Z_L`.
    pub fn cycle(l: usize) -> Result<Graph> {
        Self::torus(1, l)
    }

    pub fn tree(shape: TreeShape, size: usize) -> Result<Graph> {
        if size < 1 {
            return Err(Error::InvalidGraph("tree size must be >= 1".into()));
        }
        let (n, edges): (usize, Vec<(usize, usize)>) = match shape {
            TreeShape::Path => (size, (1..size).map(|i| (i - 1, i)).collect()),
            // `size` leaves around a centre vertex 0
            TreeShape::Star => (size + 1, (1..=size).map(|i| (0, i)).collect()),
            TreeShape::BalancedBinary => (size, (1..size).map(|i| ((i - 1) / 2, i)).collect()),
        };
        Self::assemble(n, edges, GraphSpec::Tree { shape, size })
    }

    /// Arbitrary connected graph without self-loops.
    pub fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> Result<Graph> {
        Self::assemble(n, edges.clone(), GraphSpec::Custom { n, edges })
    }

    fn assemble(n: usize, edges: Vec<(usize, usize)>, spec: GraphSpec) -> Result<Graph> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut degree = vec![0usize; n + 1];
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![Incidence { edge: 0, other: 0 }; 2 * edges.len()];
        for (i, &(u, v)) in edges.iter().enumerate() {
            adj[fill[u]] = Incidence { edge: i, other: v };
            fill[u] += 1;
            adj[fill[v]] = Incidence { edge: i, other: u };
            fill[v] += 1;
        }
        let g = Graph { n, edges, offsets, adj, spec };
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for inc in self.incident(v) {
                if !seen[inc.other] {
                    seen[inc.other] = true;
                    count += 1;
                    queue.push_back(inc.other);
                }
            }
        }
        count == self.n
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn incident(&self, v: usize) -> &[Incidence] {
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn descriptor(&self) -> GraphDescriptor {
        GraphDescriptor { spec: self.spec.clone(), n: self.n, m: self.edges.len() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_basic(g: &Graph) {
        let deg_sum: usize = (0..g.vertex_count()).map(|v| g.degree(v)).sum();
        assert_eq!(deg_sum, 2 * g.edge_count());
        assert!(g.is_connected());
    }

    #[test]
    fn torus_sizes() {
        for (d, l, n, m, deg) in [(1, 5, 5, 5, 2), (2, 4, 16, 32, 4), (3, 3, 27, 81, 6)] {
            let g = Graph::torus(d, l).unwrap();
            assert_eq!(g.vertex_count(), n);
            assert_eq!(g.edge_count(), m);
            assert!((0..n).all(|v| g.degree(v) == deg));
            check_basic(&g);
        }
    }

    #[test]
    fn torus_rejects_small_sides() {
        assert!(matches!(Graph::torus(2, 2), Err(Error::InvalidGraph(_))));
        assert!(matches!(Graph::torus(0, 5), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn cycle_edges_are_consecutive() {
        let g = Graph::cycle(5).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
    }

    #[test]
    fn torus_edge_order_is_direction_major() {
        let g = Graph::torus(2, 3).unwrap();
        // first block: direction 0 (the slow coordinate, stride 3)
        assert_eq!(g.edge(0), (0, 3));
        assert_eq!(g.edge(6), (6, 0));
        // second block: direction 1 (stride 1)
        assert_eq!(g.edge(9), (0, 1));
        assert_eq!(g.edge(11), (2, 0));
    }

    #[test]
    fn trees() {
        let p = Graph::tree(TreeShape::Path, 4).unwrap();
        assert_eq!((p.vertex_count(), p.edge_count()), (4, 3));
        let s = Graph::tree(TreeShape::Star, 5).unwrap();
        assert_eq!((s.vertex_count(), s.edge_count(), s.degree(0)), (6, 5, 5));
        let b = Graph::tree(TreeShape::BalancedBinary, 7).unwrap();
        assert_eq!((b.vertex_count(), b.edge_count()), (7, 6));
        for g in [&p, &s, &b] {
            assert!(g.is_tree());
            check_basic(g);
        }
        assert!(Graph::tree(TreeShape::Path, 0).is_err());
    }

    #[test]
    fn custom_graph_validation() {
        assert!(Graph::from_edges(3, vec![(0, 1)]).is_err());
        assert!(Graph::from_edges(2, vec![(0, 0), (0, 1)]).is_err());
        assert!(Graph::from_edges(2, vec![(0, 2)]).is_err());
        assert!(Graph::from_edges(3, vec![(0, 1), (1, 2), (2, 0)]).is_ok());
    }

    #[test]
    fn rebuild_is_identical() {
        let a = Graph::torus(2, 5).unwrap();
        let b = a.spec().build().unwrap();
        assert_eq!(a, b);
        let ja = serde_json::to_string(&a.descriptor()).unwrap();
        let jb = serde_json::to_string(&b.descriptor()).unwrap();
        assert_eq!(ja, jb);
        assert_eq!(ja, r#"{"kind":"torus","d":2,"L":5,"n":25,"m":50}"#);
        let back: GraphDescriptor = serde_json::from_str(&ja).unwrap();
        assert_eq!(back, a.descriptor());
        let t = serde_json::to_string(&Graph::tree(TreeShape::BalancedBinary, 3).unwrap().descriptor()).unwrap();
        assert_eq!(t, r#"{"kind":"tree","shape":"balanced-binary","size":3,"n":3,"m":2}"#);
    }
}
