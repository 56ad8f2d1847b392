//! Exact spectral quantities and coupling-time law on a small cycle, with the
//! inequality checks they are expected to satisfy.

use fk_cftp::exact::{
    check_appendix_a, check_lemma1, check_theorem1, check_theorem2iv, exact_tmix, ExactChain, FkTiny, PairChain,
};
use fk_cftp::{FkParams, Graph};

fn main() -> fk_cftp::Result<()> {
    let g = Graph::cycle(5)?;
    let params = FkParams::new(0.5, 2.0)?;
    let tiny = FkTiny::new(&g, params)?;
    let chain = ExactChain::new(&tiny)?;
    let law = PairChain::new(&tiny)?;
    let (tmix, _) = exact_tmix(&chain, 0.25)?;
    println!("5-cycle, p=0.5, q=2: {} states", chain.len());
    println!("lambda2 = {:.10}, t_rel = {:.6}, t_exp = {:.6}, t_mix(1/4) = {tmix}", chain.lambda2(), chain.trel(), chain.texp());
    println!("E[T] = {:.6}, sd[T] = {:.6}", law.mean(), law.std());

    let mut reports = vec![check_lemma1(&chain)?];
    reports.extend(check_theorem1(&chain, &law)?);
    reports.extend(check_appendix_a(&chain, 0)?);
    for r in &reports {
        println!("{:<24} {}  margin {:.3e}", r.check, if r.passed { "ok  " } else { "FAIL" }, r.worst_margin);
    }

    for l in 3..=8 {
        let r = check_theorem2iv(l, 0.5, 2.0)?;
        println!("L={l}: {:.4} <= t_rel = {:.4} <= {:.4}", r.lower, r.trel, r.upper);
    }
    Ok(())
}
