use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CriticalTag, ExperimentConfig, Mode, ModelKind, PValue, ResolvedModel, StatsOptions};
use crate::coupling::DEFAULT_STEP_CAP;
use crate::error::{Error, Result};
use crate::fk::{forward_coupling_time_capped, stationary_series};
use crate::graph::{GraphDescriptor, GraphSpec};
use crate::ising::{ising_coupling_time_capped, magnetization_series};
use crate::stats::{autocorrelation_runs, estimate_moments, MomentEstimate, DEFAULT_BOOTSTRAP_REPS};

/// Series runs use streams starting here, clear of the coupling runs.
pub const SERIES_STREAM_OFFSET: u64 = 1 << 40;

/// Scaled-autocorrelation experiment over a family of graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledAutocorrConfig {
    pub model: ModelKind,
    pub graphs: Vec<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Forward coupling runs used to estimate `σ_T`.
    #[serde(default = "default_coupling_samples")]
    pub coupling_samples: usize,
    /// Independent stationary series averaged for `ρ̂`.
    #[serde(default = "default_series_runs")]
    pub series_runs: usize,
    /// Series length as a multiple of the largest lag.
    #[serde(default = "default_length_factor")]
    pub length_factor: usize,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<f64>,
    #[serde(default = "default_cap")]
    pub step_cap: u64,
    #[serde(default = "default_reps")]
    pub bootstrap_reps: usize,
}

fn default_coupling_samples() -> usize {
    1000
}
fn default_series_runs() -> usize {
    20
}
fn default_length_factor() -> usize {
    200
}
fn default_k_grid() -> Vec<f64> {
    (0..=12).map(|i| i as f64 * 0.25).collect()
}
fn default_cap() -> u64 {
    DEFAULT_STEP_CAP
}
fn default_reps() -> usize {
    DEFAULT_BOOTSTRAP_REPS
}

/// `ln ρ̂` at lag `round(k·σ̂_T)`; `ln_rho` is `None` when `ρ̂ <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub k: f64,
    pub lag: usize,
    pub rho: f64,
    pub rho_se: f64,
    pub ln_rho: Option<f64>,
    pub se: Option<f64>,
}

/// Weighted straight-line fit of `ln ρ̂` against `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub se_slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseCurve {
    pub graph: GraphDescriptor,
    pub sites: usize,
    pub coupling_time: MomentEstimate,
    pub points: Vec<CollapsePoint>,
    pub slope: Option<SlopeFit>,
}

impl ScaledAutocorrConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    fn resolve(&self, graph: &GraphSpec) -> Result<ResolvedModel> {
        ExperimentConfig {
            model: self.model,
            graph: graph.clone(),
            p: self.p,
            q: self.q,
            beta: self.beta,
            mode: Mode::CouplingTime,
            n_samples: self.coupling_samples,
            seed: self.seed,
            step_cap: self.step_cap,
            output: None,
            max_failure_rate: 0.0,
            stats: StatsOptions::default(),
        }
        .resolve()
    }

    fn validate(&self) -> Result<()> {
        if self.graphs.is_empty() {
            return Err(Error::Config("graphs must not be empty".into()));
        }
        if self.coupling_samples < 2 || self.series_runs == 0 || self.length_factor < 10 {
            return Err(Error::Config(
                "need coupling_samples >= 2, series_runs >= 1 and length_factor >= 10".into(),
            ));
        }
        if self.k_grid.is_empty() || self.k_grid.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(Error::Config("k_grid must hold finite non-negative values".into()));
        }
        if let Some(PValue::Named(CriticalTag::Critical)) = self.p {
            if self.graphs.iter().any(|g| !matches!(g, GraphSpec::Torus { .. })) {
                return Err(Error::Config("p = \"critical\" needs torus graphs".into()));
            }
        }
        Ok(())
    }
}

/// Least squares of `ln ρ̂(k)` on `k` over points with `k > 0`, weighted by
/// `1/se²` (unit weights if any se vanishes).
pub fn fit_slope(points: &[CollapsePoint]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|p| p.k > 0.0)
        .filter_map(|p| Some((p.k, p.ln_rho?, p.se?)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let unit = pts.iter().any(|p| !(p.2 > 0.0));
    let w: Vec<f64> = pts.iter().map(|p| if unit { 1.0 } else { 1.0 / (p.2 * p.2) }).collect();
    let sw: f64 = w.iter().sum();
    let xm = pts.iter().zip(&w).map(|(p, w)| w * p.0).sum::<f64>() / sw;
    let ym = pts.iter().zip(&w).map(|(p, w)| w * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p.0 - xm) * (p.1 - ym)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let var = if unit {
        let dof = pts.len().saturating_sub(2).max(1) as f64;
        let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        rss / dof / sxx
    } else {
        1.0 / sxx
    };
    Some(SlopeFit { slope, se_slope: var.sqrt(), intercept, points: pts.len() })
}

fn coupling_times(model: &ResolvedModel, n: usize, seed: u64, cap: u64) -> Result<Vec<f64>> {
    (0..n as u64)
        .into_par_iter()
        .map(|r| {
            let s = match model {
                ResolvedModel::Fk { graph, params } => forward_coupling_time_capped(graph, params, seed, r, cap)?,
                ResolvedModel::Ising { graph, params } => ising_coupling_time_capped(graph, params, seed, r, cap)?,
            };
            Ok(s.coupling_time as f64)
        })
        .collect()
}

fn series(model: &ResolvedModel, runs: usize, length: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let stream = SERIES_STREAM_OFFSET + r;
            Ok(match model {
                ResolvedModel::Fk { graph, params } => {
                    stationary_series(graph, params, length, seed, stream)?.into_iter().map(|x| x as f64).collect()
                }
                ResolvedModel::Ising { graph, params } => {
                    magnetization_series(graph, params, length, seed, stream)?.into_iter().map(|x| x as f64).collect()
                }
            })
        })
        .collect()
}

/// For each graph: estimates `σ_T` from forward coupling runs, then the
/// autocorrelation of `N` (FK) or `M` (Ising) at lags `k·σ̂_T`.
pub fn scaled_autocorr_experiment(config: &ScaledAutocorrConfig) -> Result<Vec<CollapseCurve>> {
    config.validate()?;
    let k_max = config.k_grid.iter().cloned().fold(0.0, f64::max);
    config
        .graphs
        .iter()
        .map(|spec| {
            let model = config.resolve(spec)?;
            let ts = coupling_times(&model, config.coupling_samples, config.seed, config.step_cap)?;
            let coupling_time = estimate_moments(&ts, config.bootstrap_reps, config.seed)?;
            let sigma = coupling_time.std;
            let max_lag = ((k_max * sigma).round() as usize).max(1);
            let runs = series(&model, config.series_runs, config.length_factor * max_lag, config.seed)?;
            let est = autocorrelation_runs(&runs, max_lag)?;
            let points: Vec<CollapsePoint> = config
                .k_grid
                .iter()
                .map(|&k| {
                    let lag = (k * sigma).round() as usize;
                    let (rho, rho_se) = (est.rho[lag], est.se[lag]);
                    let positive = rho > 0.0;
                    CollapsePoint {
                        k,
                        lag,
                        rho,
                        rho_se,
                        ln_rho: positive.then(|| rho.ln()),
                        se: positive.then(|| rho_se / rho),
                    }
                })
                .collect();
            Ok(CollapseCurve {
                graph: model.graph().descriptor(),
                sites: model.sites(),
                coupling_time,
                slope: fit_slope(&points),
                points,
            })
        })
        .collect()
}
