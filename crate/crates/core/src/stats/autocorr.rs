use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum ratio of series length to the largest lag.
pub const MIN_LENGTH_PER_LAG: usize = 10;

/// Normalized autocorrelation `ρ̂(t)` for `t = 0..=max_lag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrEstimate {
    pub lags: Vec<usize>,
    pub rho: Vec<f64>,
    pub se: Vec<f64>,
    /// Number of independent series averaged.
    pub runs: usize,
    pub texp_fit: Option<TexpFit>,
}

/// `ln ρ̂(t) ≈ a - t/b` over `t_min..=t_max`; `b` estimates `t_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TexpFit {
    pub a: f64,
    pub b: f64,
    pub se_a: f64,
    pub se_b: f64,
    pub t_min: usize,
    pub t_max: usize,
    pub points: usize,
}

/// Biased (`1/n`) autocorrelation of one series via FFT.
fn rho_fft(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let variance = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if !(variance > 1e-28 * mean * mean) {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series.iter().map(|x| Complex::new(x - mean, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    buf.iter_mut().for_each(|z| *z = Complex::new(z.norm_sqr(), 0.0));
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    Ok((0..=max_lag).map(|t| buf[t].re / c0).collect())
}

fn check_length(len: usize, max_lag: usize) -> Result<()> {
    if len < MIN_LENGTH_PER_LAG * max_lag.max(1) {
        return Err(Error::InsufficientData(format!(
            "series of length {len} is shorter than {MIN_LENGTH_PER_LAG} × max_lag = {}",
            MIN_LENGTH_PER_LAG * max_lag
        )));
    }
    Ok(())
}

/// Autocorrelation of a single series with Bartlett standard errors
/// `se(t)² = (1 + 2 Σ_{k<t} ρ̂(k)²) / n`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<AutocorrEstimate> {
    check_length(series.len(), max_lag)?;
    let rho = rho_fft(series, max_lag)?;
    let n = series.len() as f64;
    let mut acc = 0.0;
    let se = (0..=max_lag)
        .map(|t| {
            if t == 0 {
                return 0.0;
            }
            if t > 1 {
                acc += rho[t - 1] * rho[t - 1];
            }
            ((1.0 + 2.0 * acc) / n).sqrt()
        })
        .collect();
    Ok(AutocorrEstimate { lags: (0..=max_lag).collect(), rho, se, runs: 1, texp_fit: None })
}

/// Mean of the per-run autocorrelations of independent series; the standard
/// error at each lag is the across-run scatter divided by `√runs`.
pub fn autocorrelation_runs(runs: &[Vec<f64>], max_lag: usize) -> Result<AutocorrEstimate> {
    match runs.len() {
        0 => return Err(Error::InsufficientData("no series".into())),
        1 => return autocorrelation(&runs[0], max_lag),
        _ => {}
    }
    let per_run = runs
        .iter()
        .map(|s| {
            check_length(s.len(), max_lag)?;
            rho_fft(s, max_lag)
        })
        .collect::<Result<Vec<_>>>()?;
    let r = per_run.len() as f64;
    let rho: Vec<f64> = (0..=max_lag).map(|t| per_run.iter().map(|v| v[t]).sum::<f64>() / r).collect();
    let se = (0..=max_lag)
        .map(|t| {
            let ss: f64 = per_run.iter().map(|v| (v[t] - rho[t]).powi(2)).sum();
            (ss / (r - 1.0) / r).sqrt()
        })
        .collect();
    Ok(AutocorrEstimate { lags: (0..=max_lag).collect(), rho, se, runs: runs.len(), texp_fit: None })
}

/// Default window: from the first lag with `ρ̂ < 0.8` up to the last lag of
/// the run that follows with `ρ̂ > 5·se`.
fn default_window(est: &AutocorrEstimate) -> Option<(usize, usize)> {
    let start = est.rho.iter().position(|&r| r < 0.8)?;
    let mut end = None;
    for i in start..est.rho.len() {
        if est.rho[i] > 5.0 * est.se[i] && est.rho[i] > 0.0 {
            end = Some(i);
        } else {
            break;
        }
    }
    end.map(|e| (est.lags[start], est.lags[e]))
}

/// Weighted least squares of `ln ρ̂` against `t` with weights `(ρ̂/se)²`
/// (unit weights when any standard error vanishes). Lags with `ρ̂ <= 0` are
/// skipped.
pub fn fit_texp(est: &AutocorrEstimate, window: Option<(usize, usize)>) -> Result<TexpFit> {
    let (t_min, t_max) = match window {
        Some(w) => w,
        None => default_window(est)
            .ok_or_else(|| Error::InsufficientData("no lag satisfies the default window rule".into()))?,
    };
    let idx: Vec<usize> = (0..est.lags.len())
        .filter(|&i| est.lags[i] >= t_min && est.lags[i] <= t_max && est.rho[i] > 0.0)
        .collect();
    if idx.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 positive lags in [{t_min}, {t_max}], found {}",
            idx.len()
        )));
    }
    let unit = idx.iter().any(|&i| est.se[i] <= 0.0);
    let pts: Vec<(f64, f64, f64)> = idx
        .iter()
        .map(|&i| {
            let w = if unit { 1.0 } else { (est.rho[i] / est.se[i]).powi(2) };
            (est.lags[i] as f64, est.rho[i].ln(), w)
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let sx: f64 = pts.iter().map(|p| p.2 * p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.2 * p.1).sum();
    let xm = sx / sw;
    let ym = sy / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::Degenerate(format!("fitted slope {slope} is not negative")));
    }
    let intercept = ym - slope * xm;
    let dof = (pts.len() - 2) as f64;
    let chi2: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
    // known-variance errors, inflated by the reduced chi-square when it exceeds one
    let scale = if unit { chi2 / dof } else { (chi2 / dof).max(1.0) };
    let var_slope = scale / sxx;
    let var_intercept = scale * (1.0 / sw + xm * xm / sxx);
    let b = -1.0 / slope;
    Ok(TexpFit {
        a: intercept,
        b,
        se_a: var_intercept.sqrt(),
        se_b: var_slope.sqrt() / (slope * slope),
        t_min,
        t_max,
        points: pts.len(),
    })
}

impl AutocorrEstimate {
    /// Attaches a `t_exp` fit.
    pub fn with_fit(mut self, window: Option<(usize, usize)>) -> Result<Self> {
        self.texp_fit = Some(fit_texp(&self, window)?);
        Ok(self)
    }
}
