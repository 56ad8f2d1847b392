//! Standardized coupling times on a long cycle against the Gumbel law: KS
//! distance and a maximum-likelihood GEV fit.
//!
//! cargo run --release --example gumbel_gev -- [L] [runs]

use fk_cftp::coupon::gumbel_cdf;
use fk_cftp::stats::{estimate_moments, fit_gev, ks_distance, standardize};
use fk_cftp::{forward_coupling_time, FkParams, Graph};
use rayon::prelude::*;

fn main() -> fk_cftp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let l: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(512);
    let runs: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let g = Graph::cycle(l)?;
    let params = FkParams::new(0.5, 2.0)?;
    let ts: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|s| forward_coupling_time(&g, &params, 5, s).map(|c| c.coupling_time as f64))
        .collect::<fk_cftp::Result<_>>()?;
    let moments = estimate_moments(&ts, 200, 0)?;
    let s = standardize(&ts, &moments)?;
    println!("cycle L={l}, {runs} runs: KS distance to Gumbel = {:.4}", ks_distance(&s, gumbel_cdf)?);
    let fit = fit_gev(&s, 100, 0)?;
    println!("xi    = {:+.4} ± {:.4}", fit.xi, fit.se_xi);
    println!("eta   = {:+.4} ± {:.4}", fit.eta, fit.se_eta);
    println!("theta = {:+.4} ± {:.4}", fit.theta, fit.se_theta);
    Ok(())
}
