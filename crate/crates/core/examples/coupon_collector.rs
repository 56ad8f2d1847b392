//! Coupon-collector times: simulated moments against the harmonic-number
//! formulas, and the standardized law against the Gumbel distribution.

use fk_cftp::coupon::{coupon_moments, coupon_time, gumbel_cdf};
use fk_cftp::stats::{estimate_moments, ks_distance, standardize};

fn main() -> fk_cftp::Result<()> {
    for m in [10usize, 100, 1000] {
        let ws: Vec<f64> = (0..20_000).map(|s| coupon_time(m, 2, s) as f64).collect();
        let est = estimate_moments(&ws, 200, 0)?;
        let exact = coupon_moments(m as u64);
        let ks = ks_distance(&standardize(&ws, &est)?, gumbel_cdf)?;
        println!(
            "m={m:5}: mean {:9.2} ± {:.2} (exact {:9.2}), sd {:8.2} (exact {:8.2}), KS {:.4}",
            est.mean,
            est.se_mean,
            exact.mean,
            est.std,
            exact.std(),
            ks
        );
    }
    Ok(())
}
