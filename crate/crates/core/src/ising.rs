//! Single-spin Ising heat-bath dynamics.

use serde::{Deserialize, Serialize};

use crate::coupling::{self, CouplingSample, MonotoneDynamics, DEFAULT_STEP_CAP};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{NoiseSource, NoiseStep};

/// Spins in `{-1, +1}`, one per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn uniform(n: usize, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1);
        SpinConfig(vec![spin; n])
    }

    /// Bit `v` of `mask` set means spin `+1` at `v`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        SpinConfig((0..n).map(|v| if mask >> v & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn magnetization(&self) -> i64 {
        self.0.iter().map(|&s| s as i64).sum()
    }

    /// `S_v`, the sum of neighbouring spins.
    pub fn local_field(&self, g: &Graph, v: usize) -> i64 {
        g.incident(v).iter().map(|inc| self.0[inc.other] as i64).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    beta: f64,
}

impl IsingParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(IsingParams { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Critical inverse temperature of the square lattice, `ln sqrt(1 + sqrt 2)`.
pub fn beta_critical_2d() -> f64 {
    (1.0 + 2f64.sqrt()).sqrt().ln()
}

/// Probability that the updated spin becomes `+1` given local field `s`:
/// `e^{βs} / (e^{βs} + e^{-βs})`.
#[inline]
pub fn spin_threshold(params: &IsingParams, s: i64) -> f64 {
    1.0 / (1.0 + (-2.0 * params.beta * s as f64).exp())
}

/// Heat-bath update of spin `v` with uniform `u`; returns the new configuration.
pub fn spin_update(g: &Graph, w: &SpinConfig, v: usize, u: f64, params: &IsingParams) -> Result<SpinConfig> {
    if v >= g.vertex_count() {
        return Err(Error::OutOfRange { index: v, size: g.vertex_count() });
    }
    let mut next = w.clone();
    next.0[v] = if u <= spin_threshold(params, w.local_field(g, v)) { 1 } else { -1 };
    Ok(next)
}

/// The Ising heat-bath random map with a precomputed threshold table.
#[derive(Debug, Clone)]
pub struct IsingDynamics<'g> {
    graph: &'g Graph,
    params: IsingParams,
    offset: i64,
    thresholds: Vec<f64>,
}

impl<'g> IsingDynamics<'g> {
    pub fn new(graph: &'g Graph, params: IsingParams) -> Result<Self> {
        if graph.vertex_count() < 2 {
            return Err(Error::InvalidGraph("Ising dynamics needs a connected graph with at least two vertices".into()));
        }
        let max_deg = graph.max_degree() as i64;
        let thresholds = (-max_deg..=max_deg).map(|s| spin_threshold(&params, s)).collect();
        Ok(IsingDynamics { graph, params, offset: max_deg, thresholds })
    }

    pub fn params(&self) -> &IsingParams {
        &self.params
    }

    #[inline]
    pub fn apply(&self, w: &mut SpinConfig, step: NoiseStep) {
        let s = w.local_field(self.graph, step.site);
        let threshold = self.thresholds[(s + self.offset) as usize];
        w.0[step.site] = if step.u <= threshold { 1 } else { -1 };
    }
}

impl MonotoneDynamics for IsingDynamics<'_> {
    type State = SpinConfig;

    fn sites(&self) -> usize {
        self.graph.vertex_count()
    }

    fn bottom_state(&self) -> SpinConfig {
        SpinConfig::uniform(self.graph.vertex_count(), -1)
    }

    fn top_state(&self) -> SpinConfig {
        SpinConfig::uniform(self.graph.vertex_count(), 1)
    }

    fn update(&mut self, state: &mut SpinConfig, step: NoiseStep) {
        self.apply(state, step)
    }

    fn site_agrees(&self, a: &SpinConfig, b: &SpinConfig, site: usize) -> bool {
        a.0[site] == b.0[site]
    }

    fn site_precedes(&self, lower: &SpinConfig, upper: &SpinConfig, site: usize) -> bool {
        lower.0[site] <= upper.0[site]
    }
}

pub fn ising_coupling_time(g: &Graph, params: &IsingParams, seed: u64, stream: u64) -> Result<CouplingSample> {
    ising_coupling_time_capped(g, params, seed, stream, DEFAULT_STEP_CAP)
}

/// Coupling time of the chains started from all-minus and all-plus, with the
/// vertex coupon time of the same noise.
pub fn ising_coupling_time_capped(
    g: &Graph,
    params: &IsingParams,
    seed: u64,
    stream: u64,
    cap: u64,
) -> Result<CouplingSample> {
    let mut dynamics = IsingDynamics::new(g, *params)?;
    let mut noise = NoiseSource::new(seed, stream);
    let times = coupling::forward_coupling(&mut dynamics, &mut noise, cap)?;
    Ok(CouplingSample {
        coupling_time: times.coupling_time,
        coupon_time: times.coupon_time,
        seed,
        stream,
    })
}

/// Exact relaxation time of the Ising heat-bath process on the cycle `Z_L`:
/// `L / (1 - tanh(2β))`.
pub fn ising_trel_1d(l: usize, beta: f64) -> Result<f64> {
    if l < 3 {
        return Err(Error::InvalidParameter(format!("cycle length must be >= 3, got {l}")));
    }
    let params = IsingParams::new(beta)?;
    Ok(l as f64 / (1.0 - (2.0 * params.beta).tanh()))
}

pub fn ising_cftp_sample(g: &Graph, params: &IsingParams, seed: u64, stream: u64) -> Result<SpinConfig> {
    let mut dynamics = IsingDynamics::new(g, *params)?;
    let mut noise = NoiseSource::new(seed, stream);
    Ok(coupling::cftp(&mut dynamics, &mut noise, DEFAULT_STEP_CAP)?.state)
}

/// Total magnetization after each of `length` updates, starting from an exact
/// CFTP sample.
pub fn magnetization_series(g: &Graph, params: &IsingParams, length: usize, seed: u64, stream: u64) -> Result<Vec<i64>> {
    if length == 0 {
        return Err(Error::InvalidParameter("series length must be >= 1".into()));
    }
    let mut dynamics = IsingDynamics::new(g, *params)?;
    let mut noise = NoiseSource::new(seed, stream);
    let mut state = coupling::cftp(&mut dynamics, &mut noise, DEFAULT_STEP_CAP)?.state;
    let mut m = state.magnetization();
    let n = g.vertex_count();
    let mut series = Vec::with_capacity(length);
    for _ in 0..length {
        let step = noise.step(n);
        let old = state.0[step.site] as i64;
        dynamics.apply(&mut state, step);
        m += state.0[step.site] as i64 - old;
        series.push(m);
    }
    Ok(series)
}
