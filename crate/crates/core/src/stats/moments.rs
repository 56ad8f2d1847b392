use serde::{Deserialize, Serialize};

use super::{bootstrap, percentile_se};
use crate::error::{Error, Result};

/// Sample mean and standard deviation with bootstrap standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub n_samples: usize,
    pub mean: f64,
    pub std: f64,
    pub se_mean: f64,
    pub se_std: f64,
}

/// Mean and `n - 1` standard deviation.
pub fn sample_mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Unbiased moments plus percentile bootstrap errors; deterministic in `seed`.
///
/// Constant input yields zero standard errors.
pub fn estimate_moments(samples: &[f64], bootstrap_reps: usize, seed: u64) -> Result<MomentEstimate> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 samples, got {}", samples.len())));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    let (mean, std) = sample_mean_std(samples);
    let replicates = bootstrap(samples, bootstrap_reps, seed, sample_mean_std);
    let means: Vec<f64> = replicates.iter().map(|r| r.0).collect();
    let stds: Vec<f64> = replicates.iter().map(|r| r.1).collect();
    Ok(MomentEstimate {
        n_samples: samples.len(),
        mean,
        std,
        se_mean: percentile_se(&means),
        se_std: percentile_se(&stds),
    })
}

/// `S = (T - μ) / σ`.
pub fn standardize(samples: &[f64], moments: &MomentEstimate) -> Result<Vec<f64>> {
    if !(moments.std > 0.0 && moments.std.is_finite()) {
        return Err(Error::Degenerate(format!("cannot standardize with σ = {}", moments.std)));
    }
    Ok(samples.iter().map(|x| (x - moments.mean) / moments.std).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_samples() {
        let m = estimate_moments(&[0.0, 2.0], 200, 1).unwrap();
        assert_eq!(m.mean, 1.0);
        assert!((m.std - 2f64.sqrt()).abs() < 1e-15);
        assert!(m.se_mean > 0.0);
    }

    #[test]
    fn constant_samples() {
        let m = estimate_moments(&[4.0; 10], 100, 1).unwrap();
        assert_eq!((m.mean, m.std, m.se_mean, m.se_std), (4.0, 0.0, 0.0, 0.0));
        assert!(matches!(standardize(&[4.0; 10], &m), Err(Error::Degenerate(_))));
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(estimate_moments(&[1.0], 10, 0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn standardize_pair() {
        let xs = [1.0, 3.0];
        let m = estimate_moments(&xs, 10, 0).unwrap();
        let s = standardize(&xs, &m).unwrap();
        assert!((s[0] + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let again = standardize(&s, &estimate_moments(&s, 10, 0).unwrap()).unwrap();
        assert!(again.iter().zip(&s).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn se_shrinks_like_root_n() {
        let xs: Vec<f64> = (0..4000).map(|i| ((i * 7919) % 1000) as f64).collect();
        let m = estimate_moments(&xs, 400, 3).unwrap();
        let expected = m.std / (xs.len() as f64).sqrt();
        assert!((m.se_mean / expected - 1.0).abs() < 0.15, "{} vs {expected}", m.se_mean);
    }
}
