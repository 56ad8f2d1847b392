//! Brute-force ground truth for tiny systems.
//!
//! States are integer masks over the sites (edges for FK, vertices for Ising
//! with bit set meaning spin `+1`). Everything here is computed by explicit
//! enumeration, independently of the simulation code paths: FK pivotality
//! comes from a table of component counts rather than from a search oracle.

mod chain;
mod checks;
mod pair;

pub use chain::{exact_d, exact_tmix, ExactChain};
pub use checks::{
    check_appendix_a, check_lemma1, check_theorem1, check_theorem2iv, CheckReport, Theorem2ivReport,
    THEOREM2IV_CONSTANT,
};
pub use pair::PairChain;

use crate::error::{Error, Result};
use crate::fk::FkParams;
use crate::graph::Graph;
use crate::ising::{spin_threshold, IsingParams};

/// Largest site count for which a chain is enumerated.
pub const MAX_CHAIN_SITES: usize = 16;
/// Largest site count for which the pair chain is built (`3^8` pairs).
pub const MAX_PAIR_SITES: usize = 8;

/// A single-site heat-bath model small enough to enumerate.
pub trait TinyModel {
    fn sites(&self) -> usize;
    /// Probability that `site` is set after an update from `state`.
    fn threshold(&self, state: u32, site: usize) -> f64;
    /// Unnormalized log stationary weight.
    fn log_weight(&self, state: u32) -> f64;
    /// The observable whose autocorrelations are studied (`N` or `M`).
    fn observable(&self, state: u32) -> f64;
    fn fk_params(&self) -> Option<FkParams> {
        None
    }
}

/// The FK heat-bath chain on a graph with at most 16 edges.
#[derive(Debug, Clone)]
pub struct FkTiny {
    m: usize,
    params: FkParams,
    components: Vec<u32>,
}

impl FkTiny {
    pub fn new(g: &Graph, params: FkParams) -> Result<Self> {
        let m = g.edge_count();
        if m > MAX_CHAIN_SITES {
            return Err(Error::StateSpaceTooLarge { sites: m, limit: MAX_CHAIN_SITES });
        }
        if m == 0 {
            return Err(Error::InvalidGraph("need at least one edge".into()));
        }
        let n = g.vertex_count();
        let components = (0..1u32 << m)
            .map(|mask| {
                let mut parent: Vec<usize> = (0..n).collect();
                fn find(parent: &mut [usize], mut x: usize) -> usize {
                    while parent[x] != x {
                        x = parent[x];
                    }
                    x
                }
                let mut k = n as u32;
                for e in 0..m {
                    if mask >> e & 1 == 1 {
                        let (u, v) = g.edge(e);
                        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                        if ru != rv {
                            parent[ru] = rv;
                            k -= 1;
                        }
                    }
                }
                k
            })
            .collect();
        Ok(FkTiny { m, params, components })
    }

    pub fn component_count(&self, state: u32) -> u32 {
        self.components[state as usize]
    }

    pub fn is_pivotal(&self, state: u32, e: usize) -> bool {
        let bit = 1u32 << e;
        self.components[(state & !bit) as usize] != self.components[(state | bit) as usize]
    }
}

impl TinyModel for FkTiny {
    fn sites(&self) -> usize {
        self.m
    }

    fn threshold(&self, state: u32, site: usize) -> f64 {
        // p(A, e) = φ(A^e) / (φ(A^e) + φ(A_e)), evaluated from the weights
        let bit = 1u32 << site;
        let up = self.log_weight(state | bit);
        let down = self.log_weight(state & !bit);
        1.0 / (1.0 + (down - up).exp())
    }

    fn log_weight(&self, state: u32) -> f64 {
        let occupied = state.count_ones() as f64;
        self.components[state as usize] as f64 * self.params.q().ln()
            + occupied * self.params.p().ln()
            + (self.m as f64 - occupied) * (1.0 - self.params.p()).ln()
    }

    fn observable(&self, state: u32) -> f64 {
        state.count_ones() as f64
    }

    fn fk_params(&self) -> Option<FkParams> {
        Some(self.params)
    }
}

/// The Ising heat-bath chain on a graph with at most 16 vertices.
#[derive(Debug, Clone)]
pub struct IsingTiny {
    n: usize,
    params: IsingParams,
    neighbours: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl IsingTiny {
    pub fn new(g: &Graph, params: IsingParams) -> Result<Self> {
        let n = g.vertex_count();
        if n > MAX_CHAIN_SITES {
            return Err(Error::StateSpaceTooLarge { sites: n, limit: MAX_CHAIN_SITES });
        }
        if n < 2 {
            return Err(Error::InvalidGraph("need at least two vertices".into()));
        }
        let neighbours = (0..n).map(|v| g.incident(v).iter().map(|i| i.other).collect()).collect();
        Ok(IsingTiny { n, params, neighbours, edges: g.edges().to_vec() })
    }
}

#[inline]
fn spin(state: u32, v: usize) -> i64 {
    if state >> v & 1 == 1 {
        1
    } else {
        -1
    }
}

impl TinyModel for IsingTiny {
    fn sites(&self) -> usize {
        self.n
    }

    fn threshold(&self, state: u32, site: usize) -> f64 {
        let s: i64 = self.neighbours[site].iter().map(|&w| spin(state, w)).sum();
        spin_threshold(&self.params, s)
    }

    fn log_weight(&self, state: u32) -> f64 {
        let bond: i64 = self.edges.iter().map(|&(u, v)| spin(state, u) * spin(state, v)).sum();
        self.params.beta() * bond as f64
    }

    fn observable(&self, state: u32) -> f64 {
        (0..self.n).map(|v| spin(state, v)).sum::<i64>() as f64
    }
}

/// Enumerates the FK heat-bath chain on `g` (at most 16 edges).
pub fn enumerate_chain(g: &Graph, params: FkParams) -> Result<ExactChain> {
    ExactChain::new(&FkTiny::new(g, params)?)
}

/// Exact law of the FK coupling time (at most 8 edges).
pub fn pair_chain_law(g: &Graph, params: FkParams) -> Result<PairChain> {
    PairChain::new(&FkTiny::new(g, params)?)
}

/// Exact law of the Ising coupling time (at most 8 vertices).
pub fn ising_pair_chain_law(g: &Graph, params: IsingParams) -> Result<PairChain> {
    PairChain::new(&IsingTiny::new(g, params)?)
}

/// Normalized stationary law `φ` over state masks.
pub fn stationary_distribution<M: TinyModel>(model: &M) -> Vec<f64> {
    let n = 1u32 << model.sites();
    let logw: Vec<f64> = (0..n).map(|a| model.log_weight(a)).collect();
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut phi: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = phi.iter().sum();
    phi.iter_mut().for_each(|x| *x /= z);
    phi
}

pub(crate) fn threshold_table<M: TinyModel>(model: &M) -> Vec<f64> {
    let s = model.sites();
    let mut up = Vec::with_capacity(s << s);
    for state in 0..1u32 << s {
        for e in 0..s {
            up.push(model.threshold(state, e));
        }
    }
    up
}
