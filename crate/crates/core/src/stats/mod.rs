//! Statistics downstream of raw samples: moments with bootstrap errors,
//! standardization, autocorrelation and `t_exp` extraction, GEV fits,
//! Kolmogorov–Smirnov distances and finite-size-scaling fits.

mod autocorr;
mod gev;
mod moments;
mod scaling;

pub use autocorr::{autocorrelation, autocorrelation_runs, fit_texp, AutocorrEstimate, TexpFit};
pub use gev::{fit_gev, gev_cdf, gev_log_likelihood, gev_quantile, GevParams, GEV_MAX_ITERATIONS};
pub use moments::{estimate_moments, sample_mean_std, standardize, MomentEstimate};
pub use scaling::{fit_scaling, Ansatz, AnsatzFit, ScalingFit};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Bootstrap replicates default.
pub const DEFAULT_BOOTSTRAP_REPS: usize = 1000;

/// Evaluates `statistic` on `reps` resamples with replacement. Replicate `r`
/// draws from stream `r` of `seed`, so results do not depend on scheduling.
pub fn bootstrap<T, F>(samples: &[f64], reps: usize, seed: u64, statistic: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    let n = samples.len();
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let resample: Vec<f64> = (0..n).map(|_| samples[rand::Rng::gen_range(&mut rng, 0..n)]).collect();
            statistic(&resample)
        })
        .collect()
}

/// Half-width of the central 68.27% percentile interval of `values`, the
/// percentile analogue of one standard error.
pub fn percentile_se(values: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if sorted.len() < 2 {
        return 0.0;
    }
    sorted.sort_by(f64::total_cmp);
    let lo = quantile_sorted(&sorted, 0.158_655_253_931_457_05);
    let hi = quantile_sorted(&sorted, 0.841_344_746_068_542_9);
    (hi - lo) / 2.0
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let pos = prob.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// `sup_x |F_n(x) - F(x)|` between the empirical CDF of `samples` and `cdf`.
///
/// Both sides are compared at every sample value and just below it, so
/// step-function references (including the empirical CDF itself) are handled
/// exactly.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        worst = worst.max((at - cdf(v)).abs()).max((below - cdf(v.next_down())).abs());
        i = j;
    }
    Ok(worst.min(1.0))
}

/// Empirical CDF of `samples` as a closure.
pub fn empirical_cdf(samples: &[f64]) -> impl Fn(f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    move |x| sorted.partition_point(|&s| s <= x) as f64 / sorted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupon::gumbel_cdf;

    #[test]
    fn ks_against_point_mass() {
        let d = ks_distance(&[0.0; 50], gumbel_cdf).unwrap();
        let g0 = gumbel_cdf(0.0);
        assert!((d - g0.max(1.0 - g0)).abs() < 1e-12);
        assert!((d - 0.5704).abs() < 1e-4);
    }

    #[test]
    fn ks_against_own_ecdf() {
        let xs = [3.0, 1.0, 2.0, 2.0, 5.0, -1.0];
        assert_eq!(ks_distance(&xs, empirical_cdf(&xs)).unwrap(), 0.0);
    }

    #[test]
    fn ks_errors() {
        assert!(ks_distance(&[], gumbel_cdf).is_err());
        assert!(ks_distance(&[f64::NAN], gumbel_cdf).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let xs: Vec<f64> = (0..100).map(|i| (i * i % 17) as f64).collect();
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let a = bootstrap(&xs, 50, 9, mean);
        let b = bootstrap(&xs, 50, 9, mean);
        assert_eq!(a, b);
        assert_ne!(a, bootstrap(&xs, 50, 10, mean));
    }

    #[test]
    fn percentile_se_of_normal_quantiles() {
        // evenly spaced standard-normal-ish spread: uniform on [-1, 1]
        let xs: Vec<f64> = (0..=20000).map(|i| -1.0 + i as f64 / 10000.0).collect();
        assert!((percentile_se(&xs) - 0.682_689_492_137_086).abs() < 1e-3);
    }
}
