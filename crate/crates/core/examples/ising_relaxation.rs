//! Ising heat-bath coupling on a cycle: sigma_T against the exact relaxation
//! time for several inverse temperatures.
//!
//! cargo run --release --example ising_relaxation -- [L] [runs]

use fk_cftp::ising::{ising_coupling_time, ising_trel_1d};
use fk_cftp::stats::estimate_moments;
use fk_cftp::{Graph, IsingParams};
use rayon::prelude::*;

fn main() -> fk_cftp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let l: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(200);
    let runs: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let g = Graph::cycle(l)?;
    println!("beta   t_rel      sigma_T     sigma_T/t_rel");
    for beta in [0.0, 0.2, 0.4] {
        let params = IsingParams::new(beta)?;
        let ts: Vec<f64> = (0..runs)
            .into_par_iter()
            .map(|s| ising_coupling_time(&g, &params, 9, s).map(|c| c.coupling_time as f64))
            .collect::<fk_cftp::Result<_>>()?;
        let m = estimate_moments(&ts, 200, 0)?;
        let trel = ising_trel_1d(l, beta)?;
        println!("{beta:.1}    {trel:9.1}  {:9.1}   {:.4} ± {:.4}", m.std, m.std / trel, m.se_std / trel);
    }
    Ok(())
}
