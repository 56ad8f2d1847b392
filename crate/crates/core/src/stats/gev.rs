use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{bootstrap, percentile_se, sample_mean_std};
use crate::coupon::{gumbel_scale, EULER_GAMMA};
use crate::error::{Error, Result};

/// Simplex iterations allowed per start.
pub const GEV_MAX_ITERATIONS: u64 = 4000;
const MAX_STARTS: usize = 5;
/// Shapes closer to zero than this use the Gumbel limit.
const GUMBEL_BRANCH: f64 = 1e-8;

/// Maximum-likelihood GEV parameters with bootstrap standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub xi: f64,
    pub eta: f64,
    pub theta: f64,
    pub se_xi: f64,
    pub se_eta: f64,
    pub se_theta: f64,
    pub log_likelihood: f64,
    pub n_samples: usize,
    pub bootstrap_reps: usize,
}

/// `exp(-(1 + ξ(x-η)/θ)^{-1/ξ})`, with the Gumbel limit at `ξ = 0`.
pub fn gev_cdf(x: f64, xi: f64, eta: f64, theta: f64) -> f64 {
    let y = (x - eta) / theta;
    if xi.abs() < GUMBEL_BRANCH {
        return (-(-y).exp()).exp();
    }
    let z = 1.0 + xi * y;
    if z <= 0.0 {
        return if xi > 0.0 { 0.0 } else { 1.0 };
    }
    (-(-z.ln() / xi).exp()).exp()
}

/// Inverse of [`gev_cdf`] for `u ∈ (0, 1)`.
pub fn gev_quantile(u: f64, xi: f64, eta: f64, theta: f64) -> f64 {
    let w = -u.ln();
    if xi.abs() < GUMBEL_BRANCH {
        eta - theta * w.ln()
    } else {
        eta + theta * (w.powf(-xi) - 1.0) / xi
    }
}

/// Total log-likelihood; `None` outside the support or for `θ <= 0`.
pub fn gev_log_likelihood(samples: &[f64], xi: f64, eta: f64, theta: f64) -> Option<f64> {
    if !(theta > 0.0) || !xi.is_finite() || !eta.is_finite() {
        return None;
    }
    let ln_theta = theta.ln();
    let mut total = 0.0;
    if xi.abs() < GUMBEL_BRANCH {
        for &x in samples {
            let y = (x - eta) / theta;
            total += -ln_theta - y - (-y).exp();
        }
    } else {
        for &x in samples {
            let v = xi * (x - eta) / theta;
            if v <= -1.0 {
                return None;
            }
            let l = v.ln_1p();
            total += -ln_theta - (1.0 + 1.0 / xi) * l - (-l / xi).exp();
        }
    }
    total.is_finite().then_some(total)
}

/// Mean negative log-likelihood over `(ξ, η, ln θ)`, with a penalty outside
/// the support that grows with the number of violating samples.
struct Objective<'a> {
    samples: &'a [f64],
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let (xi, eta, theta) = (p[0], p[1], p[2].exp());
        Ok(match gev_log_likelihood(self.samples, xi, eta, theta) {
            Some(ll) => -ll / self.samples.len() as f64,
            None => {
                let bad = self.samples.iter().filter(|&&x| 1.0 + xi * (x - eta) / theta <= 0.0).count();
                1e10 * (1.0 + bad as f64)
            }
        })
    }
}

struct Optimum {
    point: Vec<f64>,
    value: f64,
    converged: bool,
    iterations: u64,
}

fn simplex(samples: &[f64], start: &[f64], step: &[f64]) -> Result<Optimum> {
    let mut vertices = vec![start.to_vec()];
    for i in 0..start.len() {
        let mut v = start.to_vec();
        v[i] += step[i];
        vertices.push(v);
    }
    let solver = NelderMead::new(vertices)
        .with_sd_tolerance(1e-13)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let res = Executor::new(Objective { samples }, solver)
        .configure(|s| s.max_iters(GEV_MAX_ITERATIONS))
        .run()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let state = res.state();
    let converged = matches!(
        state.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::SolverConverged)
    );
    Ok(Optimum {
        point: state.get_best_param().cloned().unwrap_or_else(|| start.to_vec()),
        value: state.get_best_cost(),
        converged,
        iterations: state.get_iter(),
    })
}

/// Best `(ξ, η, θ)` and log-likelihood, starting from `start` in `(ξ, η, ln θ)`.
///
/// A converged search is restarted once from its optimum to escape a
/// collapsed simplex; failed searches restart from jittered points.
fn maximize(samples: &[f64], start: [f64; 3], scale: f64, seed: u64) -> Result<(Vec<f64>, f64)> {
    let step = [0.1, 0.1 * scale, 0.1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Optimum> = None;
    let mut total_iterations = 0;
    for attempt in 0..MAX_STARTS {
        let from: Vec<f64> = match (&best, attempt) {
            (_, 0) => start.to_vec(),
            (Some(b), _) if b.converged => b.point.clone(),
            _ => start
                .iter()
                .zip(&step)
                .map(|(x, s)| x + s * (2.0 * rng.gen::<f64>() - 1.0))
                .collect(),
        };
        let run = simplex(samples, &from, &step)?;
        total_iterations += run.iterations;
        let previous = best.as_ref().map(|b| (b.value, b.converged));
        if best.as_ref().is_none_or(|b| run.value <= b.value) {
            best = Some(run);
        }
        let b = best.as_ref().unwrap();
        if let Some((value, true)) = previous {
            if b.converged && (value - b.value).abs() <= 1e-10 * value.abs().max(1.0) {
                break;
            }
        }
    }
    let b = best.expect("at least one start");
    if !b.converged || b.value >= 1e10 {
        return Err(Error::NoConvergence {
            iterations: total_iterations as usize,
            best: vec![b.point[0], b.point[1], b.point[2].exp()],
            value: -b.value * samples.len() as f64,
        });
    }
    Ok((vec![b.point[0], b.point[1], b.point[2].exp()], -b.value * samples.len() as f64))
}

/// Maximum-likelihood fit of the GEV family, started at the Gumbel moment
/// estimates `ξ = 0`, `θ = s·√6/π`, `η = x̄ - γθ`.
pub fn fit_gev(samples: &[f64], bootstrap_reps: usize, seed: u64) -> Result<GevParams> {
    if samples.len() < 100 {
        return Err(Error::InsufficientData(format!("need at least 100 samples, got {}", samples.len())));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    let (mean, std) = sample_mean_std(samples);
    if !(std > 1e-12 * mean.abs().max(1.0)) {
        return Err(Error::Degenerate("samples are constant".into()));
    }
    let theta0 = std / gumbel_scale();
    let start = [0.0, mean - EULER_GAMMA * theta0, theta0.ln()];
    let (best, log_likelihood) = maximize(samples, start, theta0, seed)?;

    let from = [best[0], best[1], best[2].ln()];
    let replicates = bootstrap(samples, bootstrap_reps, seed ^ 0x0067_6576, |resample| {
        maximize(resample, from, best[2], seed).map(|(p, _)| p).unwrap_or_else(|_| vec![f64::NAN; 3])
    });
    let column = |i: usize| percentile_se(&replicates.iter().map(|r| r[i]).collect::<Vec<_>>());
    Ok(GevParams {
        xi: best[0],
        eta: best[1],
        theta: best[2],
        se_xi: column(0),
        se_eta: column(1),
        se_theta: column(2),
        log_likelihood,
        n_samples: samples.len(),
        bootstrap_reps,
    })
}
