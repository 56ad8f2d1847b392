use fk_cftp::coupon::gumbel_cdf;
use fk_cftp::stats::{
    autocorrelation, bootstrap, estimate_moments, fit_scaling, gev_cdf, gev_quantile, ks_distance, standardize,
    Ansatz,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ks_distance_is_a_probability(xs in prop::collection::vec(-5.0f64..5.0, 1..200)) {
        let d = ks_distance(&xs, gumbel_cdf).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn standardized_samples_have_unit_moments(xs in prop::collection::vec(-100.0f64..100.0, 3..100)) {
        let m = estimate_moments(&xs, 10, 1).unwrap();
        prop_assume!(m.std > 1e-6);
        let s = standardize(&xs, &m).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s.len() - 1) as f64;
        prop_assert!(mean.abs() < 1e-9);
        prop_assert!((var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bootstrap_is_deterministic(xs in prop::collection::vec(0.0f64..1.0, 2..50), seed in any::<u64>()) {
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        prop_assert_eq!(bootstrap(&xs, 20, seed, mean), bootstrap(&xs, 20, seed, mean));
    }

    #[test]
    fn moments_are_shift_equivariant(xs in prop::collection::vec(0.0f64..10.0, 2..60), c in -50.0f64..50.0) {
        let a = estimate_moments(&xs, 50, 3).unwrap();
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let b = estimate_moments(&shifted, 50, 3).unwrap();
        prop_assert!((b.mean - a.mean - c).abs() < 1e-9);
        prop_assert!((b.std - a.std).abs() < 1e-9);
        prop_assert!((b.se_std - a.se_std).abs() < 1e-9);
    }

    #[test]
    fn gev_quantile_inverts_cdf(u in 0.001f64..0.999, xi in -0.4f64..0.4, eta in -2.0f64..2.0, theta in 0.1f64..3.0) {
        let x = gev_quantile(u, xi, eta, theta);
        prop_assert!((gev_cdf(x, xi, eta, theta) - u).abs() < 1e-9);
    }

    #[test]
    fn scaling_recovers_synthetic_exponent(z in -1.0f64..3.0, a in 0.1f64..10.0) {
        let ls = [8.0, 12.0, 16.0, 24.0, 32.0, 48.0];
        let y: Vec<f64> = ls.iter().map(|l: &f64| a * l.powf(z)).collect();
        let se: Vec<f64> = y.iter().map(|v| 0.02 * v).collect();
        let fit = fit_scaling(&ls, &y, &se).unwrap();
        prop_assert!((fit.get(Ansatz::PowerNoOffset).z.unwrap() - z).abs() < 0.005);
    }

    #[test]
    fn autocorrelation_starts_at_one(xs in prop::collection::vec(-1.0f64..1.0, 100..300)) {
        let est = autocorrelation(&xs, 10);
        prop_assume!(est.is_ok());
        let est = est.unwrap();
        prop_assert!((est.rho[0] - 1.0).abs() < 1e-12);
        prop_assert!(est.rho.iter().all(|r| r.abs() <= 1.0 + 1e-9));
    }
}
