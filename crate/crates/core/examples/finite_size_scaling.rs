//! sigma_T over a range of torus sizes at the critical point, fitted with the
//! power-law and logarithmic ansätze.

use fk_cftp::experiment::critical_p;
use fk_cftp::stats::{estimate_moments, fit_scaling};
use fk_cftp::{forward_coupling_time, FkParams, Graph};
use rayon::prelude::*;

fn main() -> fk_cftp::Result<()> {
    let q = 2.0;
    let params = FkParams::new(critical_p(q, 2)?, q)?;
    let sizes = [4usize, 6, 8, 12, 16];
    let (mut ls, mut ys, mut ses) = (Vec::new(), Vec::new(), Vec::new());
    for &l in &sizes {
        let g = Graph::torus(2, l)?;
        let ts: Vec<f64> = (0..400u64)
            .into_par_iter()
            .map(|s| forward_coupling_time(&g, &params, 8, s).map(|c| c.coupling_time as f64))
            .collect::<fk_cftp::Result<_>>()?;
        let m = estimate_moments(&ts, 200, l as u64)?;
        let scaled = m.std / (l * l) as f64;
        println!("L={l:3}: sigma_T/L^2 = {scaled:.4} ± {:.4}", m.se_std / (l * l) as f64);
        ls.push(l as f64);
        ys.push(scaled);
        ses.push(m.se_std / (l * l) as f64);
    }
    let fit = fit_scaling(&ls, &ys, &ses)?;
    for f in &fit.fits {
        println!(
            "{:?}: a={:.4} z={} chi2/dof={:.2}",
            f.ansatz,
            f.a,
            f.z.map_or("-".into(), |z| format!("{z:.3} ± {:.3}", f.se_z.unwrap_or(f64::NAN))),
            f.chi2_per_dof
        );
    }
    println!("lowest chi2/dof: {:?}", fit.lowest_chi2());
    Ok(())
}
