//! Forward coupling times on a critical 2D torus, next to the coupon time of
//! the same update sequence.
//!
//! cargo run --release --example coupling_time -- [L] [q] [runs]

use fk_cftp::coupon::coupon_moments;
use fk_cftp::experiment::critical_p;
use fk_cftp::stats::estimate_moments;
use fk_cftp::{forward_coupling_time, FkParams, Graph};

fn main() -> fk_cftp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let l: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(16);
    let q: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let runs: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(400);

    let g = Graph::torus(2, l)?;
    let params = FkParams::new(critical_p(q, 2)?, q)?;
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for stream in 0..runs {
        let s = forward_coupling_time(&g, &params, 1, stream)?;
        assert!(s.coupon_time <= s.coupling_time);
        ts.push(s.coupling_time as f64);
        ws.push(s.coupon_time as f64);
    }
    let t = estimate_moments(&ts, 200, 1)?;
    let w = estimate_moments(&ws, 200, 2)?;
    let exact = coupon_moments(g.edge_count() as u64);
    println!("torus L={l}, q={q}, p=p_c={:.6}, m={} edges", params.p(), g.edge_count());
    println!("T: mean {:.1} ± {:.1}, sd {:.1} ± {:.1}", t.mean, t.se_mean, t.std, t.se_std);
    println!("W: mean {:.1} ± {:.1}, sd {:.1} ± {:.1}", w.mean, w.se_mean, w.std, w.se_std);
    println!("coupon exact: mean {:.1}, sd {:.1}", exact.mean, exact.std());
    println!("mu_T/mu_W = {:.4}, sigma_T/sigma_W = {:.4}", t.mean / w.mean, t.std / w.std);
    Ok(())
}
