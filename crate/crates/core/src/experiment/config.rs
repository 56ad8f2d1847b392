use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::DEFAULT_STEP_CAP;
use crate::error::{Error, Result};
use crate::fk::FkParams;
use crate::graph::{Graph, GraphSpec};
use crate::ising::IsingParams;
use crate::stats::DEFAULT_BOOTSTRAP_REPS;

/// Estimated critical points of the FK model on `Z^3`, keyed by `q`.
pub const CRITICAL_POINTS_3D: [(f64, f64); 4] =
    [(1.5, 0.311_574_97), (1.8, 0.340_960_70), (2.0, 0.358_091_24), (2.2, 0.373_614_01)];

/// `p_c(q)`: `√q / (1 + √q)` in two dimensions, table values in three.
pub fn critical_p(q: f64, d: usize) -> Result<f64> {
    match d {
        2 if q >= 1.0 => Ok(q.sqrt() / (1.0 + q.sqrt())),
        3 => CRITICAL_POINTS_3D
            .iter()
            .find(|(qq, _)| (qq - q).abs() < 1e-12)
            .map(|&(_, p)| p)
            .ok_or_else(|| Error::Config(format!("no tabulated d=3 critical point for q = {q}"))),
        _ => Err(Error::Config(format!("no critical point known for q = {q}, d = {d}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Fk,
    Ising,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    CouplingTime,
    CftpSample,
    StationarySeries,
    ExactOracle,
}

/// `p` as a number or the literal `"critical"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Value(f64),
    Named(CriticalTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalTag {
    Critical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsOptions {
    #[serde(default = "default_bootstrap")]
    pub bootstrap_reps: usize,
    /// Fit a GEV law to the standardized coupling times.
    #[serde(default)]
    pub gev: bool,
    /// Kolmogorov–Smirnov distance of the standardized coupling times to the
    /// Gumbel law.
    #[serde(default = "yes")]
    pub ks: bool,
    /// Updates per run in `stationary-series` mode.
    #[serde(default = "default_series_length")]
    pub series_length: usize,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    /// `[t_min, t_max]` for the `t_exp` fit; the default rule otherwise.
    #[serde(default)]
    pub fit_window: Option<(usize, usize)>,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            bootstrap_reps: DEFAULT_BOOTSTRAP_REPS,
            gev: false,
            ks: true,
            series_length: default_series_length(),
            max_lag: default_max_lag(),
            fit_window: None,
        }
    }
}

fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP_REPS
}
fn yes() -> bool {
    true
}
fn default_series_length() -> usize {
    100_000
}
fn default_max_lag() -> usize {
    1000
}
fn default_samples() -> usize {
    1000
}
fn default_cap() -> u64 {
    DEFAULT_STEP_CAP
}

/// One experiment, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub graph: GraphSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub mode: Mode,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub step_cap: u64,
    /// Output directory; `--out` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Largest tolerated fraction of runs that hit the step cap.
    #[serde(default)]
    pub max_failure_rate: f64,
    #[serde(default)]
    pub stats: StatsOptions,
}

/// A validated model on its graph.
#[derive(Debug, Clone)]
pub enum ResolvedModel {
    Fk { graph: Graph, params: FkParams },
    Ising { graph: Graph, params: IsingParams },
}

impl ResolvedModel {
    pub fn graph(&self) -> &Graph {
        match self {
            ResolvedModel::Fk { graph, .. } | ResolvedModel::Ising { graph, .. } => graph,
        }
    }

    /// Number of sites the dynamics update: edges for FK, vertices for Ising.
    pub fn sites(&self) -> usize {
        match self {
            ResolvedModel::Fk { graph, .. } => graph.edge_count(),
            ResolvedModel::Ising { graph, .. } => graph.vertex_count(),
        }
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks model constraints and builds the graph. Every failure is a
    /// [`Error::Config`].
    pub fn resolve(&self) -> Result<ResolvedModel> {
        let graph = self.graph.build().map_err(config_error)?;
        if self.n_samples == 0 && self.mode != Mode::ExactOracle {
            return Err(Error::Config("n_samples must be >= 1".into()));
        }
        if self.step_cap == 0 {
            return Err(Error::Config("step_cap must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(Error::Config("max_failure_rate must lie in [0, 1]".into()));
        }
        match self.model {
            ModelKind::Fk => {
                if self.beta.is_some() {
                    return Err(Error::Config("beta is an Ising parameter".into()));
                }
                let q = self.q.ok_or_else(|| Error::Config("fk model needs q".into()))?;
                let p = match self.p.ok_or_else(|| Error::Config("fk model needs p".into()))? {
                    PValue::Value(p) => p,
                    PValue::Named(CriticalTag::Critical) => match self.graph {
                        GraphSpec::Torus { d, .. } => critical_p(q, d)?,
                        _ => return Err(Error::Config("p = \"critical\" needs a torus".into())),
                    },
                };
                let params = FkParams::new(p, q).map_err(config_error)?;
                Ok(ResolvedModel::Fk { graph, params })
            }
            ModelKind::Ising => {
                if self.p.is_some() || self.q.is_some() {
                    return Err(Error::Config("p and q are FK parameters".into()));
                }
                let beta = self.beta.ok_or_else(|| Error::Config("ising model needs beta".into()))?;
                let params = IsingParams::new(beta).map_err(config_error)?;
                if graph.vertex_count() < 2 {
                    return Err(Error::Config("ising model needs at least two vertices".into()));
                }
                Ok(ResolvedModel::Ising { graph, params })
            }
        }
    }
}
