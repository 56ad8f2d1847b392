use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode, ModelKind, ResolvedModel};
use crate::coupling::CouplingSample;
use crate::coupon::{coupon_moments, gumbel_cdf};
use crate::error::{Error, Result};
use crate::exact::{
    self, check_appendix_a, check_lemma1, check_theorem1, exact_tmix, CheckReport, ExactChain, FkTiny, IsingTiny,
    PairChain,
};
use crate::fk::{cftp_sample, forward_coupling_time_capped, stationary_series};
use crate::graph::GraphDescriptor;
use crate::ising::{ising_cftp_sample, ising_coupling_time_capped, magnetization_series};
use crate::stats::{
    autocorrelation_runs, bootstrap, estimate_moments, fit_gev, fit_texp, ks_distance, percentile_se, sample_mean_std,
    standardize, AutocorrEstimate, GevParams, MomentEstimate, TexpFit,
};

/// Records are written and synced in batches of this size.
pub const BATCH: usize = 100;
pub const SAMPLES_FILE: &str = "samples.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.json";

/// One FK coupling run; `T` and `W` are null when the step cap was hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkRecord {
    #[serde(rename = "T")]
    pub t: Option<u64>,
    #[serde(rename = "W")]
    pub w: Option<u64>,
    pub seed: u64,
    pub stream: u64,
    pub graph: GraphDescriptor,
    pub p: f64,
    pub q: f64,
}

/// One Ising coupling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingRecord {
    pub model: ModelKind,
    #[serde(rename = "T")]
    pub t: Option<u64>,
    #[serde(rename = "W")]
    pub w: Option<u64>,
    pub seed: u64,
    pub stream: u64,
    pub graph: GraphDescriptor,
    pub beta: f64,
}

/// One CFTP sample: the observable (`N` or `M`) and the state as a string of
/// site bits (`1` = occupied edge or plus spin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub value: Option<i64>,
    pub state: Option<String>,
    pub seed: u64,
    pub stream: u64,
}

/// One stationary run of the observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub seed: u64,
    pub stream: u64,
    pub series: Vec<i64>,
}

/// Minimal view of a coupling record, for either model.
#[derive(Debug, Clone, Copy, Deserialize)]
struct TimesView {
    #[serde(rename = "T")]
    t: Option<u64>,
    #[serde(rename = "W")]
    w: Option<u64>,
}

/// A point estimate with a bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSummary {
    pub model: ModelKind,
    pub graph: GraphDescriptor,
    pub sites: usize,
    pub n_requested: usize,
    pub n_completed: usize,
    pub n_capped: usize,
    pub coupling_time: MomentEstimate,
    pub coupon_time: MomentEstimate,
    /// `μ_T / μ_W`.
    pub mean_ratio: Estimate,
    /// `σ_T / σ_W`.
    pub std_ratio: Estimate,
    /// Exact coupon-collector mean and standard deviation for this many sites.
    pub coupon_exact_mean: f64,
    pub coupon_exact_std: f64,
    pub w_le_t_everywhere: bool,
    pub t_equals_w: usize,
    pub ks_gumbel: Option<f64>,
    pub gev: Option<GevParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CftpSummary {
    pub model: ModelKind,
    pub graph: GraphDescriptor,
    pub n_requested: usize,
    pub n_completed: usize,
    pub n_capped: usize,
    pub observable: MomentEstimate,
    /// Total-variation distance between the empirical state law and the exact
    /// stationary law, for systems of at most 16 sites.
    pub tv_to_exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub model: ModelKind,
    pub graph: GraphDescriptor,
    pub runs: usize,
    pub series_length: usize,
    pub autocorrelation: AutocorrEstimate,
    pub texp_fit: Option<TexpFit>,
    pub texp_fit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub model: ModelKind,
    pub graph: GraphDescriptor,
    pub lambda2: f64,
    pub trel: f64,
    pub texp: f64,
    pub tmix: usize,
    pub coupling_mean: Option<f64>,
    pub coupling_std: Option<f64>,
    pub checks: Vec<CheckReport>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Summary {
    CouplingTime(CouplingSummary),
    CftpSample(CftpSummary),
    StationarySeries(SeriesSummary),
    ExactOracle(OracleSummary),
}

/// Where a run put its files and whether the step-cap failure rate stayed
/// within the configured bound.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Summary,
    pub samples_path: Option<PathBuf>,
    pub summary_path: PathBuf,
    pub failure_rate: f64,
    pub failure_rate_exceeded: bool,
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    builder.build().map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Produces records `0..n` in parallel batches and appends them in index
/// order, syncing after each batch.
fn stream_records<R, F>(path: &Path, n: usize, pool: &rayon::ThreadPool, make: F) -> Result<Vec<R>>
where
    R: Serialize + Send,
    F: Fn(u64) -> Result<R> + Sync,
{
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    let mut all = Vec::with_capacity(n);
    for start in (0..n).step_by(BATCH) {
        let end = (start + BATCH).min(n);
        let batch: Vec<R> = pool.install(|| {
            (start..end).into_par_iter().map(|r| make(r as u64)).collect::<Result<Vec<_>>>()
        })?;
        for record in &batch {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        out.get_ref().sync_data()?;
        all.extend(batch);
    }
    Ok(all)
}

fn capped<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NoCoalescence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn times(sample: Option<CouplingSample>) -> (Option<u64>, Option<u64>) {
    sample.map_or((None, None), |s| (Some(s.coupling_time), Some(s.coupon_time)))
}

/// Runs one experiment into `out_dir`: `config.json`, `samples.jsonl` (for
/// sampling modes) and `summary.json`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path, threads: Option<usize>) -> Result<RunReport> {
    let model = config.resolve()?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(CONFIG_FILE), serde_json::to_string_pretty(config)?)?;
    let pool = thread_pool(threads)?;
    let samples_path = out_dir.join(SAMPLES_FILE);
    let seed = config.seed;
    let cap = config.step_cap;
    let descriptor = model.graph().descriptor();

    let (summary, failures, wrote_samples) = match config.mode {
        Mode::CouplingTime => {
            let pairs: Vec<(Option<u64>, Option<u64>)> = match &model {
                ResolvedModel::Fk { graph, params } => {
                    let recs = stream_records(&samples_path, config.n_samples, &pool, |r| {
                        let (t, w) = times(capped(forward_coupling_time_capped(graph, params, seed, r, cap))?);
                        Ok(FkRecord { t, w, seed, stream: r, graph: descriptor.clone(), p: params.p(), q: params.q() })
                    })?;
                    recs.iter().map(|r| (r.t, r.w)).collect()
                }
                ResolvedModel::Ising { graph, params } => {
                    let recs = stream_records(&samples_path, config.n_samples, &pool, |r| {
                        let (t, w) = times(capped(ising_coupling_time_capped(graph, params, seed, r, cap))?);
                        Ok(IsingRecord {
                            model: ModelKind::Ising,
                            t,
                            w,
                            seed,
                            stream: r,
                            graph: descriptor.clone(),
                            beta: params.beta(),
                        })
                    })?;
                    recs.iter().map(|r| (r.t, r.w)).collect()
                }
            };
            let failures = pairs.iter().filter(|p| p.0.is_none()).count();
            (Summary::CouplingTime(summarize_coupling(config, &model, &pairs, &pool)?), failures, true)
        }
        Mode::CftpSample => {
            let recs = stream_records(&samples_path, config.n_samples, &pool, |r| {
                let (value, state) = match &model {
                    ResolvedModel::Fk { graph, params } => match capped(cftp_sample(graph, params, seed, r))? {
                        Some(a) => {
                            let bits = (0..a.len()).map(|e| if a.contains(e) { '1' } else { '0' }).collect();
                            (Some(a.count() as i64), Some(bits))
                        }
                        None => (None, None),
                    },
                    ResolvedModel::Ising { graph, params } => {
                        match capped(ising_cftp_sample(graph, params, seed, r))? {
                            Some(w) => {
                                let bits = w.spins().iter().map(|&s| if s > 0 { '1' } else { '0' }).collect();
                                (Some(w.magnetization()), Some(bits))
                            }
                            None => (None, None),
                        }
                    }
                };
                Ok(StateRecord { value, state, seed, stream: r })
            })?;
            let failures = recs.iter().filter(|r| r.value.is_none()).count();
            (Summary::CftpSample(summarize_cftp(config, &model, &recs)?), failures, true)
        }
        Mode::StationarySeries => {
            let length = config.stats.series_length;
            let recs = stream_records(&samples_path, config.n_samples, &pool, |r| {
                let series = match &model {
                    ResolvedModel::Fk { graph, params } => {
                        stationary_series(graph, params, length, seed, r)?.into_iter().map(|x| x as i64).collect()
                    }
                    ResolvedModel::Ising { graph, params } => magnetization_series(graph, params, length, seed, r)?,
                };
                Ok(SeriesRecord { seed, stream: r, series })
            })?;
            (Summary::StationarySeries(summarize_series(config, &model, &recs)?), 0, true)
        }
        Mode::ExactOracle => (Summary::ExactOracle(oracle_summary(config, &model)?), 0, false),
    };
    let summary_path = out_dir.join(SUMMARY_FILE);
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    let failure_rate = if config.n_samples > 0 { failures as f64 / config.n_samples as f64 } else { 0.0 };
    Ok(RunReport {
        summary,
        samples_path: wrote_samples.then_some(samples_path),
        summary_path,
        failure_rate,
        failure_rate_exceeded: failure_rate > config.max_failure_rate,
    })
}

fn summarize_coupling(
    config: &ExperimentConfig,
    model: &ResolvedModel,
    pairs: &[(Option<u64>, Option<u64>)],
    pool: &rayon::ThreadPool,
) -> Result<CouplingSummary> {
    let done: Vec<(f64, f64)> =
        pairs.iter().filter_map(|&(t, w)| Some((t? as f64, w? as f64))).collect();
    let ts: Vec<f64> = done.iter().map(|p| p.0).collect();
    let ws: Vec<f64> = done.iter().map(|p| p.1).collect();
    let reps = config.stats.bootstrap_reps;
    let seed = config.seed;
    pool.install(|| {
        let coupling_time = estimate_moments(&ts, reps, seed)?;
        let coupon_time = estimate_moments(&ws, reps, seed.wrapping_add(1))?;
        // paired resampling of (T, W) by index
        let index: Vec<f64> = (0..done.len()).map(|i| i as f64).collect();
        let ratios = bootstrap(&index, reps, seed.wrapping_add(2), |idx| {
            let t: Vec<f64> = idx.iter().map(|&i| ts[i as usize]).collect();
            let w: Vec<f64> = idx.iter().map(|&i| ws[i as usize]).collect();
            let (mt, st) = sample_mean_std(&t);
            let (mw, sw) = sample_mean_std(&w);
            (mt / mw, st / sw)
        });
        let mean_ratio = Estimate {
            value: coupling_time.mean / coupon_time.mean,
            se: percentile_se(&ratios.iter().map(|r| r.0).collect::<Vec<_>>()),
        };
        let std_ratio = Estimate {
            value: coupling_time.std / coupon_time.std,
            se: percentile_se(&ratios.iter().map(|r| r.1).collect::<Vec<_>>()),
        };
        let standardized = standardize(&ts, &coupling_time).ok();
        let ks_gumbel = match (&standardized, config.stats.ks) {
            (Some(s), true) => Some(ks_distance(s, gumbel_cdf)?),
            _ => None,
        };
        let gev = match (&standardized, config.stats.gev) {
            (Some(s), true) => Some(fit_gev(s, reps, seed.wrapping_add(3))?),
            _ => None,
        };
        let exact = coupon_moments(model.sites() as u64);
        Ok(CouplingSummary {
            model: config.model,
            graph: model.graph().descriptor(),
            sites: model.sites(),
            n_requested: config.n_samples,
            n_completed: done.len(),
            n_capped: pairs.len() - done.len(),
            coupling_time,
            coupon_time,
            mean_ratio,
            std_ratio,
            coupon_exact_mean: exact.mean,
            coupon_exact_std: exact.std(),
            w_le_t_everywhere: done.iter().all(|&(t, w)| w <= t),
            t_equals_w: done.iter().filter(|&&(t, w)| t == w).count(),
            ks_gumbel,
            gev,
        })
    })
}

fn exact_law(model: &ResolvedModel) -> Result<Vec<f64>> {
    Ok(match model {
        ResolvedModel::Fk { graph, params } => exact::stationary_distribution(&FkTiny::new(graph, *params)?),
        ResolvedModel::Ising { graph, params } => exact::stationary_distribution(&IsingTiny::new(graph, *params)?),
    })
}

fn summarize_cftp(config: &ExperimentConfig, model: &ResolvedModel, recs: &[StateRecord]) -> Result<CftpSummary> {
    let values: Vec<f64> = recs.iter().filter_map(|r| r.value).map(|v| v as f64).collect();
    let observable = estimate_moments(&values, config.stats.bootstrap_reps, config.seed)?;
    let tv_to_exact = if model.sites() <= exact::MAX_CHAIN_SITES {
        let phi = exact_law(model)?;
        let mut counts = vec![0usize; phi.len()];
        let mut total = 0usize;
        for state in recs.iter().filter_map(|r| r.state.as_ref()) {
            let mask = state.bytes().enumerate().filter(|&(_, b)| b == b'1').fold(0usize, |m, (i, _)| m | 1 << i);
            counts[mask] += 1;
            total += 1;
        }
        Some(0.5 * phi.iter().zip(&counts).map(|(p, &c)| (c as f64 / total as f64 - p).abs()).sum::<f64>())
    } else {
        None
    };
    Ok(CftpSummary {
        model: config.model,
        graph: model.graph().descriptor(),
        n_requested: config.n_samples,
        n_completed: values.len(),
        n_capped: recs.len() - values.len(),
        observable,
        tv_to_exact,
    })
}

fn summarize_series(config: &ExperimentConfig, model: &ResolvedModel, recs: &[SeriesRecord]) -> Result<SeriesSummary> {
    let runs: Vec<Vec<f64>> = recs.iter().map(|r| r.series.iter().map(|&x| x as f64).collect()).collect();
    let max_lag = config.stats.max_lag.min(config.stats.series_length / 10);
    let autocorrelation = autocorrelation_runs(&runs, max_lag)?;
    let (texp_fit, texp_fit_error) = match fit_texp(&autocorrelation, config.stats.fit_window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SeriesSummary {
        model: config.model,
        graph: model.graph().descriptor(),
        runs: recs.len(),
        series_length: config.stats.series_length,
        autocorrelation,
        texp_fit,
        texp_fit_error,
    })
}

fn oracle_summary(config: &ExperimentConfig, model: &ResolvedModel) -> Result<OracleSummary> {
    let (chain, pair): (ExactChain, Option<PairChain>) = match model {
        ResolvedModel::Fk { graph, params } => {
            let tiny = FkTiny::new(graph, *params)?;
            let pair = (graph.edge_count() <= exact::MAX_PAIR_SITES).then(|| PairChain::new(&tiny)).transpose()?;
            (ExactChain::new(&tiny)?, pair)
        }
        ResolvedModel::Ising { graph, params } => {
            let tiny = IsingTiny::new(graph, *params)?;
            let pair = (graph.vertex_count() <= exact::MAX_PAIR_SITES).then(|| PairChain::new(&tiny)).transpose()?;
            (ExactChain::new(&tiny)?, pair)
        }
    };
    let mut checks = Vec::new();
    if chain.fk_params().is_some() {
        checks.push(check_lemma1(&chain)?);
        if let Some(law) = &pair {
            checks.extend(check_theorem1(&chain, law)?);
        }
    }
    if chain.eigenvalues().is_some() {
        checks.extend(check_appendix_a(&chain, config.seed)?);
    }
    let (tmix, _) = exact_tmix(&chain, 0.25)?;
    Ok(OracleSummary {
        model: config.model,
        graph: model.graph().descriptor(),
        lambda2: chain.lambda2(),
        trel: chain.trel(),
        texp: chain.texp(),
        tmix,
        coupling_mean: pair.as_ref().map(|p| p.mean()),
        coupling_std: pair.as_ref().map(|p| p.std()),
        all_passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Reads back the records of a run directory and recomputes its summary with
/// the same code path as the run itself.
pub fn report(dir: &Path, threads: Option<usize>) -> Result<Summary> {
    let config = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
    let model = config.resolve()?;
    let pool = thread_pool(threads)?;
    let path = dir.join(SAMPLES_FILE);
    let lines = || -> Result<Vec<String>> {
        BufReader::new(File::open(&path)?).lines().map(|l| l.map_err(Error::from)).collect()
    };
    Ok(match config.mode {
        Mode::CouplingTime => {
            let pairs = lines()?
                .iter()
                .map(|l| serde_json::from_str::<TimesView>(l).map(|v| (v.t, v.w)).map_err(Error::from))
                .collect::<Result<Vec<_>>>()?;
            Summary::CouplingTime(summarize_coupling(&config, &model, &pairs, &pool)?)
        }
        Mode::CftpSample => {
            let recs = lines()?.iter().map(|l| serde_json::from_str(l).map_err(Error::from)).collect::<Result<Vec<_>>>()?;
            Summary::CftpSample(summarize_cftp(&config, &model, &recs)?)
        }
        Mode::StationarySeries => {
            let recs = lines()?.iter().map(|l| serde_json::from_str(l).map_err(Error::from)).collect::<Result<Vec<_>>>()?;
            Summary::StationarySeries(summarize_series(&config, &model, &recs)?)
        }
        Mode::ExactOracle => Summary::ExactOracle(oracle_summary(&config, &model)?),
    })
}

/// One row of a plot-ready ratio table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub sites: usize,
    pub mean_ratio: f64,
    pub mean_ratio_se: f64,
    pub std_ratio: f64,
    pub std_ratio_se: f64,
}

impl RatioRow {
    pub fn from_summary(s: &CouplingSummary) -> Self {
        let l = match s.graph.spec {
            crate::graph::GraphSpec::Torus { l, .. } => l,
            _ => s.graph.n,
        };
        RatioRow {
            l,
            sites: s.sites,
            mean_ratio: s.mean_ratio.value,
            mean_ratio_se: s.mean_ratio.se,
            std_ratio: s.std_ratio.value,
            std_ratio_se: s.std_ratio.se,
        }
    }
}

/// Writes `(L, ratio, se)` rows as CSV with a header.
pub fn write_ratio_csv(path: &Path, rows: &[RatioRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}
