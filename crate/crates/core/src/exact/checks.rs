use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{enumerate_chain, exact_tmix, ExactChain, PairChain};
use crate::error::{Error, Result};
use crate::fk::FkParams;
use crate::graph::Graph;

/// Constant `c` in the finite-size relaxation-time bounds
/// `L(1 - c p̃^L) <= t_rel <= qL(1 + c p̃^L)` on the cycle.
pub const THEOREM2IV_CONSTANT: f64 = 4.0;

/// Relative slack tolerated before an inequality counts as violated.
const TOLERANCE: f64 = 1e-9;
/// Tails below this are too small for a meaningful comparison with `d(t)`.
const SANDWICH_FLOOR: f64 = 1e-9;

/// Outcome of one machine-checked inequality. `worst_margin` is the smallest
/// relative slack `(rhs - lhs) / |rhs|` over all instances; negative means
/// violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub location: String,
}

/// Accumulates `lhs <= rhs` instances into a report.
struct Tracker {
    check: &'static str,
    worst: f64,
    location: String,
}

impl Tracker {
    fn new(check: &'static str) -> Self {
        Tracker { check, worst: f64::INFINITY, location: String::new() }
    }

    fn le(&mut self, lhs: f64, rhs: f64, location: impl FnOnce() -> String) {
        let scale = rhs.abs().max(lhs.abs()).max(f64::MIN_POSITIVE);
        self.record((rhs - lhs) / scale, location);
    }

    fn record(&mut self, margin: f64, location: impl FnOnce() -> String) {
        if margin < self.worst {
            self.worst = margin;
            self.location = location();
        }
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            check: self.check.to_string(),
            passed: self.worst >= -TOLERANCE,
            worst_margin: self.worst,
            location: self.location,
        }
    }
}

fn fk_params(chain: &ExactChain) -> Result<FkParams> {
    chain
        .fk_params()
        .ok_or_else(|| Error::InvalidParameter("check applies to FK chains only".into()))
}

/// Coupling-time bounds against the exact spectrum, mixing time and pair law.
///
/// When `λ₂ = 0` (a single edge) `t_exp = 0` and the spectral terms of the
/// mean and standard-deviation upper bounds are dropped.
pub fn check_theorem1(chain: &ExactChain, law: &PairChain) -> Result<Vec<CheckReport>> {
    let params = fk_params(chain)?;
    if law.sites() != chain.sites() {
        return Err(Error::InvalidParameter(format!(
            "chain has {} sites but pair law has {}",
            chain.sites(),
            law.sites()
        )));
    }
    let m = chain.sites() as f64;
    let psi = params.psi();
    let lambda2 = chain.lambda2();
    let texp = chain.texp();
    let (tmix, _) = exact_tmix(chain, 0.25)?;
    let tail = law.tail();

    let mut tail_lower = Tracker::new("tail_lower");
    let mut tail_upper = Tracker::new("tail_upper");
    let prefactor = ((psi.ln() + 2.0) * m).exp();
    for (t, &p) in tail.iter().enumerate() {
        let decay = lambda2.powi(t as i32);
        tail_lower.le(decay / 2.0, p, || format!("t = {t}"));
        tail_upper.le(p, prefactor * decay, || format!("t = {t}"));
    }

    let log2_4m = (4.0 * m).log2();
    let spectral = (psi.log2() + 3.0) * m * texp;
    let mean = law.mean();
    let mut mean_lower = Tracker::new("mean_lower");
    mean_lower.le((tmix as f64 - 1.0) / 4.0, mean, || format!("t_mix = {tmix}"));
    let mut mean_upper = Tracker::new("mean_upper");
    let mut sd_upper = Tracker::new("sd_upper");
    let (mut mean_bound, mut sd_bound) = (12.0 * log2_4m * tmix as f64, 15.0 * log2_4m * tmix as f64);
    if lambda2 > 0.0 {
        mean_bound = mean_bound.min(4.0 * spectral);
        sd_bound = sd_bound.min(5.0 * spectral);
    }
    mean_upper.le(mean, mean_bound, || format!("E(T) = {mean}"));
    sd_upper.le(law.std(), sd_bound, || format!("sd(T) = {}", law.std()));

    let mut sandwich_lower = Tracker::new("sandwich_lower");
    let mut sandwich_upper = Tracker::new("sandwich_upper");
    let horizon = tail.iter().rposition(|&p| p >= SANDWICH_FLOOR).unwrap_or(0);
    let d = chain.distance_profile(horizon);
    for t in 0..=horizon {
        sandwich_lower.le(d[t], tail[t], || format!("t = {t}"));
        sandwich_upper.le(tail[t], 2.0 * (m + 1.0) * d[t], || format!("t = {t}"));
    }

    Ok([tail_lower, tail_upper, mean_lower, mean_upper, sd_upper, sandwich_lower, sandwich_upper]
        .into_iter()
        .map(Tracker::finish)
        .collect())
}

/// `min_A φ(A) >= (p(1-p)/q²)^m`.
pub fn check_lemma1(chain: &ExactChain) -> Result<CheckReport> {
    let params = fk_params(chain)?;
    let (argmin, &min) = chain
        .phi()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("chain has states");
    let bound = (1.0 / params.psi()).powi(chain.sites() as i32);
    let mut tracker = Tracker::new("min_phi");
    tracker.le(bound, min, || format!("state {argmin:#b}"));
    Ok(tracker.finish())
}

/// Spectral positivity, monotonicity of `P` on increasing functions, and
/// convergence of the normalized autocovariance of `N` to `‖N_W‖²`.
pub fn check_appendix_a(chain: &ExactChain, seed: u64) -> Result<Vec<CheckReport>> {
    let eigenvalues = chain.eigenvalues().ok_or_else(|| Error::StateSpaceTooLarge {
        sites: chain.sites(),
        limit: super::chain::MAX_DENSE_SITES,
    })?;
    let s = chain.sites();
    let n = chain.len();

    let mut nonneg = Tracker::new("eigenvalues_nonnegative");
    for (i, &l) in eigenvalues.iter().enumerate() {
        nonneg.record(l, || format!("eigenvalue {i}"));
    }
    let mut nonneg = nonneg.finish();
    nonneg.passed = nonneg.worst_margin >= -1e-10;
    let mut positive = Tracker::new("lambda2_positive");
    positive.record(chain.lambda2(), || "λ₂".into());
    let mut positive = positive.finish();
    positive.passed = positive.worst_margin > 0.0;

    // increasing functions: N plus random non-negative combinations of
    // site weights and up-set indicators
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut functions = vec![chain.observable().to_vec()];
    for _ in 0..100 {
        let weights: Vec<f64> = (0..s).map(|_| rng.gen::<f64>()).collect();
        let upsets: Vec<(usize, f64)> = (0..3).map(|_| (rng.gen_range(0..n), 3.0 * rng.gen::<f64>())).collect();
        functions.push(
            (0..n)
                .map(|a| {
                    let linear: f64 = (0..s).filter(|e| a >> e & 1 == 1).map(|e| weights[e]).sum();
                    let indicators: f64 = upsets.iter().filter(|&&(mask, _)| a & mask == mask).map(|&(_, c)| c).sum();
                    linear + indicators
                })
                .collect(),
        );
    }
    let mut monotone = Tracker::new("p_preserves_increasing");
    for (k, g) in functions.iter().enumerate() {
        let pg = chain.apply_right(g);
        let scale = g.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
        for a in 0..n {
            for e in 0..s {
                if a >> e & 1 == 0 {
                    let b = a | 1 << e;
                    // increment of Pg relative to the scale of g
                    monotone.record((pg[b] - pg[a]) / scale, || format!("function {k}, A = {a:#b}, e = {e}"));
                }
            }
        }
    }
    let monotone = monotone.finish();

    let convergence = autocovariance_convergence(chain, eigenvalues);
    Ok(vec![nonneg, positive, monotone, convergence])
}

fn autocovariance_convergence(chain: &ExactChain, eigenvalues: &[f64]) -> CheckReport {
    let lambda2 = chain.lambda2();
    let g = chain.observable();
    let weight = chain.lambda2_projection(g).unwrap_or(0.0);
    let report = |passed: bool, margin: f64, location: String| CheckReport {
        check: "autocovariance_ratio".into(),
        passed,
        worst_margin: margin,
        location,
    };
    if lambda2 <= 0.0 || weight <= 0.0 {
        return report(false, -1.0, format!("λ₂ = {lambda2}, ‖N_W‖² = {weight}"));
    }
    let cluster = chain.lambda2_space().len();
    let rest = eigenvalues[1 + cluster..].iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let ratio = rest / lambda2;
    // stop before λ₂^t drowns in rounding, or once the rest has died out
    let mut horizon = (1e-8f64.ln() / lambda2.ln()).floor().max(1.0) as usize;
    if ratio > 0.0 {
        horizon = horizon.min((1e-6f64.ln() / ratio.ln()).ceil().max(1.0) as usize);
    }
    let cov = chain.autocovariance(g, horizon);
    let variance = cov[0];
    // |cov(t)/λ₂^t - ‖N_W‖²| <= (λ_rest/λ₂)^t (var - ‖N_W‖²) up to rounding
    let mut worst = f64::INFINITY;
    let mut location = String::new();
    for (t, &c) in cov.iter().enumerate() {
        let scaled = c / lambda2.powi(t as i32);
        let rounding = 1e-12 * variance / lambda2.powi(t as i32);
        let bound = ratio.powi(t as i32) * (variance - weight).max(0.0) + rounding;
        let margin = (bound - (scaled - weight).abs()) / weight;
        if margin < worst {
            worst = margin;
            location = format!("t = {t}");
        }
    }
    let last = cov[horizon] / lambda2.powi(horizon as i32);
    report(
        worst >= -TOLERANCE,
        worst,
        format!("{location}; ratio at t = {horizon}: {last}, ‖N_W‖² = {weight}"),
    )
}

/// Exact `t_rel` of the cycle against `L(1 - c p̃^L) <= t_rel <= qL(1 + c p̃^L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2ivReport {
    pub l: usize,
    pub p: f64,
    pub q: f64,
    pub trel: f64,
    pub lower: f64,
    pub upper: f64,
    pub report: CheckReport,
}

pub fn check_theorem2iv(l: usize, p: f64, q: f64) -> Result<Theorem2ivReport> {
    if !(3..=10).contains(&l) {
        return Err(Error::InvalidParameter(format!("cycle length must lie in 3..=10, got {l}")));
    }
    let params = FkParams::new(p, q)?;
    let chain = enumerate_chain(&Graph::cycle(l)?, params)?;
    let trel = chain.trel();
    let correction = THEOREM2IV_CONSTANT * params.p_tilde().powi(l as i32);
    let lower = l as f64 * (1.0 - correction);
    let upper = q * l as f64 * (1.0 + correction);
    let mut lo = Tracker::new("trel_bounds");
    lo.le(lower, trel, || "lower".into());
    lo.le(trel, upper, || "upper".into());
    Ok(Theorem2ivReport { l, p, q, trel, lower, upper, report: lo.finish() })
}
