//! FK (random-cluster) heat-bath dynamics.
//!
//! A step picks an edge `e` and a uniform `u` and sets `e` occupied iff
//! `u <= p(A, e)`, where the threshold is `p_tilde` when `e` is pivotal to `A`
//! and `p` otherwise. The map is monotone in `A`, so the chains started from
//! the empty and full configurations sandwich every other chain.

use serde::{Deserialize, Serialize};

use crate::connectivity::{BfsOracle, EdgeConfig, PivotalityOracle};
use crate::coupling::{self, CouplingSample, MonotoneDynamics, DEFAULT_STEP_CAP};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{NoiseSource, NoiseStep};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFkParams", into = "RawFkParams")]
pub struct FkParams {
    p: f64,
    q: f64,
    p_tilde: f64,
}

#[derive(Serialize, Deserialize)]
struct RawFkParams {
    p: f64,
    q: f64,
}

impl TryFrom<RawFkParams> for FkParams {
    type Error = Error;
    fn try_from(raw: RawFkParams) -> Result<Self> {
        FkParams::new(raw.p, raw.q)
    }
}

impl From<FkParams> for RawFkParams {
    fn from(params: FkParams) -> Self {
        RawFkParams { p: params.p, q: params.q }
    }
}

impl FkParams {
    /// Requires `0 < p < 1` and `q >= 1`.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (0, 1), got {p}")));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("q must be finite and >= 1, got {q}")));
        }
        let p_tilde = p / (1.0 + (q - 1.0) * (1.0 - p));
        Ok(FkParams { p, q, p_tilde })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Occupation probability of a pivotal edge.
    pub fn p_tilde(&self) -> f64 {
        self.p_tilde
    }

    /// `q^2 / (p (1 - p))`.
    pub fn psi(&self) -> f64 {
        self.q * self.q / (self.p * (1.0 - self.p))
    }
}

/// Conditional probability that the updated edge ends up occupied.
#[inline]
pub fn heat_bath_threshold(params: &FkParams, pivotal: bool) -> f64 {
    if pivotal {
        params.p_tilde
    } else {
        params.p
    }
}

/// The FK heat-bath random map bound to a graph and a pivotality oracle.
#[derive(Debug, Clone)]
pub struct FkDynamics<'g, O = BfsOracle> {
    graph: &'g Graph,
    params: FkParams,
    oracle: O,
}

impl<'g> FkDynamics<'g, BfsOracle> {
    pub fn new(graph: &'g Graph, params: FkParams) -> Result<Self> {
        Self::with_oracle(graph, params, BfsOracle::new(graph))
    }
}

impl<'g, O: PivotalityOracle> FkDynamics<'g, O> {
    pub fn with_oracle(graph: &'g Graph, params: FkParams, oracle: O) -> Result<Self> {
        if graph.edge_count() == 0 {
            return Err(Error::InvalidGraph("FK dynamics needs at least one edge".into()));
        }
        Ok(FkDynamics { graph, params, oracle })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn params(&self) -> &FkParams {
        &self.params
    }

    /// `f(A, e, u)` in place. Pivotality only matters for `p_tilde < u <= p`,
    /// so the oracle is consulted only there.
    #[inline]
    pub fn apply(&mut self, a: &mut EdgeConfig, step: NoiseStep) {
        let e = step.site;
        let occupy = if step.u <= self.params.p_tilde {
            true
        } else if step.u > self.params.p {
            false
        } else {
            !self.oracle.is_pivotal(self.graph, a, e)
        };
        a.set(e, occupy);
    }
}

impl<O: PivotalityOracle> MonotoneDynamics for FkDynamics<'_, O> {
    type State = EdgeConfig;

    fn sites(&self) -> usize {
        self.graph.edge_count()
    }

    fn bottom_state(&self) -> EdgeConfig {
        EdgeConfig::empty(self.graph.edge_count())
    }

    fn top_state(&self) -> EdgeConfig {
        EdgeConfig::full(self.graph.edge_count())
    }

    fn update(&mut self, state: &mut EdgeConfig, step: NoiseStep) {
        self.apply(state, step)
    }

    fn site_agrees(&self, a: &EdgeConfig, b: &EdgeConfig, site: usize) -> bool {
        a.contains(site) == b.contains(site)
    }

    fn site_precedes(&self, lower: &EdgeConfig, upper: &EdgeConfig, site: usize) -> bool {
        !lower.contains(site) || upper.contains(site)
    }
}

/// Returns `f(A, e, u)` as a new configuration.
pub fn apply_update<O: PivotalityOracle>(
    g: &Graph,
    a: &EdgeConfig,
    step: NoiseStep,
    params: &FkParams,
    oracle: &mut O,
) -> EdgeConfig {
    let pivotal = oracle.is_pivotal(g, a, step.site);
    let mut next = a.clone();
    next.set(step.site, step.u <= heat_bath_threshold(params, pivotal));
    next
}

pub fn forward_coupling_time(g: &Graph, params: &FkParams, seed: u64, stream: u64) -> Result<CouplingSample> {
    forward_coupling_time_capped(g, params, seed, stream, DEFAULT_STEP_CAP)
}

/// Coupling time `T` of the FK heat-bath coupling from `(∅, E)`, together with
/// the coupon time `W` of the same edge sequence.
pub fn forward_coupling_time_capped(
    g: &Graph,
    params: &FkParams,
    seed: u64,
    stream: u64,
    cap: u64,
) -> Result<CouplingSample> {
    let mut dynamics = FkDynamics::new(g, *params)?;
    let mut noise = NoiseSource::new(seed, stream);
    let times = coupling::forward_coupling(&mut dynamics, &mut noise, cap)?;
    Ok(CouplingSample {
        coupling_time: times.coupling_time,
        coupon_time: times.coupon_time,
        seed,
        stream,
    })
}

/// An exact sample from the FK measure by coupling from the past.
pub fn cftp_sample(g: &Graph, params: &FkParams, seed: u64, stream: u64) -> Result<EdgeConfig> {
    let mut dynamics = FkDynamics::new(g, *params)?;
    let mut noise = NoiseSource::new(seed, stream);
    Ok(coupling::cftp(&mut dynamics, &mut noise, DEFAULT_STEP_CAP)?.state)
}

/// `N(X_t)` after each of `length` updates of a stationary chain started from
/// a CFTP sample. The forward noise continues the same stream after the
/// backward pass.
pub fn stationary_series(g: &Graph, params: &FkParams, length: usize, seed: u64, stream: u64) -> Result<Vec<usize>> {
    if length == 0 {
        return Err(Error::InvalidParameter("series length must be >= 1".into()));
    }
    let mut dynamics = FkDynamics::new(g, *params)?;
    let mut noise = NoiseSource::new(seed, stream);
    let mut state = coupling::cftp(&mut dynamics, &mut noise, DEFAULT_STEP_CAP)?.state;
    let m = g.edge_count();
    let mut n = state.count();
    let mut series = Vec::with_capacity(length);
    for _ in 0..length {
        let step = noise.step(m);
        let was = state.contains(step.site);
        dynamics.apply(&mut state, step);
        match (was, state.contains(step.site)) {
            (false, true) => n += 1,
            (true, false) => n -= 1,
            _ => {}
        }
        series.push(n);
    }
    Ok(series)
}
