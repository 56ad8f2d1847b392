//! Acceptance criteria. Each test prints one PASS/FAIL line straight to
//! stdout (bypassing test capture) before asserting.

use std::io::Write;

use fk_cftp::coupon::{gumbel_cdf, gumbel_scale, EULER_GAMMA};
use fk_cftp::exact::{
    check_appendix_a, check_theorem1, check_theorem2iv, enumerate_chain, pair_chain_law, stationary_distribution,
    ExactChain, FkTiny, THEOREM2IV_CONSTANT,
};
use fk_cftp::experiment::{critical_p, scaled_autocorr_experiment, ScaledAutocorrConfig};
use fk_cftp::ising::{ising_coupling_time, ising_trel_1d};
use fk_cftp::stats::{estimate_moments, fit_gev, fit_scaling, ks_distance, standardize, Ansatz};
use fk_cftp::{cftp_sample, forward_coupling_time, FkParams, Graph, IsingParams, TreeShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn verdict(n: u32, passed: bool, detail: &str) {
    let line = format!("criterion {n:2} [{}] {detail}\n", if passed { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn coupling_times(g: &Graph, params: &FkParams, seed: u64, n: u64) -> Vec<(u64, u64)> {
    (0..n)
        .into_par_iter()
        .map(|s| {
            let c = forward_coupling_time(g, params, seed, s).unwrap();
            (c.coupling_time, c.coupon_time)
        })
        .collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn harmonic(m: u64, r: i32) -> f64 {
    (1..=m).map(|k| (k as f64).powi(-r)).sum()
}

#[test]
fn criterion_01_q1_and_tree_identity() {
    let torus = Graph::torus(2, 8).unwrap();
    let a = coupling_times(&torus, &FkParams::new(0.3, 1.0).unwrap(), 101, 10_000);
    let tree = Graph::tree(TreeShape::BalancedBinary, 51).unwrap();
    assert_eq!(tree.edge_count(), 50);
    let b = coupling_times(&tree, &FkParams::new(0.5, 3.0).unwrap(), 102, 10_000);
    let bad = a.iter().chain(&b).filter(|(t, w)| t != w).count();
    let passed = bad == 0;
    verdict(1, passed, &format!("T = W in {} of 20000 runs (torus q=1, 50-edge tree q=3)", 20_000 - bad));
    assert!(passed);
}

#[test]
fn criterion_02_exact_oracle_agreement() {
    let g = Graph::cycle(5).unwrap();
    let params = FkParams::new(0.5, 2.0).unwrap();
    let law = pair_chain_law(&g, params).unwrap();
    let ts: Vec<f64> = coupling_times(&g, &params, 202, 100_000).iter().map(|c| c.0 as f64).collect();
    let n = ts.len() as f64;
    let (mean, var) = mean_var(&ts);
    let m4 = ts.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let se_mean = (var / n).sqrt();
    let se_var = ((m4 - var * var) / n).sqrt();
    let z_mean = (mean - law.mean()) / se_mean;
    let z_var = (var - law.variance()) / se_var;

    // q = 1: the pair chain tail must be the coupon-collector tail
    let m = 5usize;
    let perc = pair_chain_law(&g, FkParams::new(0.5, 1.0).unwrap()).unwrap();
    let binom = |j: usize| (1..=j).fold(1.0, |acc, i| acc * (m - j + i) as f64 / i as f64);
    let mut worst: f64 = 0.0;
    for t in 0..400 {
        let ie: f64 = (1..=m).map(|j| if j % 2 == 1 { 1.0 } else { -1.0 } * binom(j) * (1.0 - j as f64 / m as f64).powi(t as i32)).sum();
        worst = worst.max((perc.tail_at(t) - ie.min(1.0)).abs());
    }
    let passed = z_mean.abs() <= 3.0 && z_var.abs() <= 3.0 && worst <= 1e-10;
    verdict(
        2,
        passed,
        &format!(
            "E(T) {mean:.4} vs {:.4} ({z_mean:+.2} se), var(T) {var:.3} vs {:.3} ({z_var:+.2} se), q=1 tail gap {worst:.1e}",
            law.mean(),
            law.variance()
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_03_coupling_bounds() {
    let mut failures = Vec::new();
    let mut count = 0;
    for l in [3, 4, 5] {
        for (p, q) in [(0.5, 2.0), (0.2, 3.0)] {
            let g = Graph::cycle(l).unwrap();
            let params = FkParams::new(p, q).unwrap();
            let chain = enumerate_chain(&g, params).unwrap();
            let law = pair_chain_law(&g, params).unwrap();
            for r in check_theorem1(&chain, &law).unwrap() {
                count += 1;
                if !r.passed {
                    failures.push(format!("L={l} p={p} q={q} {}", r.check));
                }
            }
        }
    }
    let passed = failures.is_empty() && count == 6 * 7;
    verdict(3, passed, &format!("{count} inequality checks on 6 instances, failures: {failures:?}"));
    assert!(passed);
}

#[test]
fn criterion_04_05_cycle_moments_and_gumbel() {
    let g = Graph::cycle(4096).unwrap();
    let m = g.edge_count() as u64;
    let ts: Vec<f64> =
        coupling_times(&g, &FkParams::new(0.5, 2.0).unwrap(), 404, 2000).iter().map(|c| c.0 as f64).collect();
    let (mean, var) = mean_var(&ts);
    let (h1, h2) = (harmonic(m, 1), harmonic(m, 2));
    let mf = m as f64;
    let mean_dev = mean / (mf * h1) - 1.0;
    let var_dev = var / (mf * mf * h2 - mf * h1) - 1.0;
    let p4 = mean_dev.abs() < 0.02 && var_dev.abs() < 0.10;
    verdict(4, p4, &format!("cycle L=4096, 2000 runs: E(T)/(m H_m) - 1 = {mean_dev:+.4}, var(T)/exact - 1 = {var_dev:+.4}"));

    let moments = estimate_moments(&ts, 0, 0).unwrap();
    let ks = ks_distance(&standardize(&ts, &moments).unwrap(), gumbel_cdf).unwrap();
    let p5 = ks < 0.03;
    verdict(5, p5, &format!("KS distance of standardized T to Gumbel = {ks:.4}"));
    assert!(p4 && p5);
}

#[test]
fn criterion_06_spectrum_and_relaxation_bounds() {
    let mut spectrum_gap: f64 = 0.0;
    for l in 3..=8usize {
        let chain = enumerate_chain(&Graph::cycle(l).unwrap(), FkParams::new(0.5, 1.0).unwrap()).unwrap();
        let mut got = chain.eigenvalues().expect("dense spectrum").to_vec();
        got.sort_by(|a, b| b.total_cmp(a));
        let mut want = Vec::new();
        for k in 0..=l {
            let mult = (1..=k).fold(1usize, |acc, i| acc * (l - k + i) / i);
            want.extend(std::iter::repeat(1.0 - k as f64 / l as f64).take(mult));
        }
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            spectrum_gap = spectrum_gap.max((a - b).abs());
        }
    }
    let mut bound_failures = Vec::new();
    for l in 3..=8usize {
        for q in [1.5, 2.0, 3.0] {
            for p in [0.2, 0.5, 0.8] {
                let trel = enumerate_chain(&Graph::cycle(l).unwrap(), FkParams::new(p, q).unwrap()).unwrap().trel();
                let pt = p / (p + q * (1.0 - p));
                let c = THEOREM2IV_CONSTANT * pt.powi(l as i32);
                let (lo, hi) = (l as f64 * (1.0 - c), q * l as f64 * (1.0 + c));
                let report = check_theorem2iv(l, p, q).unwrap();
                if !(lo <= trel && trel <= hi) || !report.report.passed || (report.trel - trel).abs() > 1e-9 * trel {
                    bound_failures.push((l, p, q, trel, lo, hi));
                }
            }
        }
    }
    let passed = spectrum_gap < 1e-10 && bound_failures.is_empty();
    verdict(
        6,
        passed,
        &format!("q=1 spectrum max deviation {spectrum_gap:.1e}; t_rel bound failures over 54 instances: {bound_failures:?}"),
    );
    assert!(passed);
}

#[test]
fn criterion_07_cftp_exactness() {
    let g = Graph::cycle(4).unwrap();
    let params = FkParams::new(0.5, 2.0).unwrap();
    let phi = stationary_distribution(&FkTiny::new(&g, params).unwrap());
    let masks: Vec<usize> =
        (0..100_000u64).into_par_iter().map(|s| cftp_sample(&g, &params, 707, s).unwrap().to_mask() as usize).collect();
    let mut counts = vec![0usize; phi.len()];
    masks.iter().for_each(|&a| counts[a] += 1);
    let tv: f64 = phi.iter().zip(&counts).map(|(p, &c)| (c as f64 / 1e5 - p).abs()).sum::<f64>() / 2.0;
    let passed = tv < 0.01;
    verdict(7, passed, &format!("TV distance of 100000 CFTP samples to exact phi = {tv:.4}"));
    assert!(passed);
}

#[test]
fn criterion_08_q1_pipeline() {
    let l = 200usize;
    let g = Graph::cycle(l).unwrap();
    let ts: Vec<f64> =
        coupling_times(&g, &FkParams::new(0.5, 1.0).unwrap(), 808, 10_000).iter().map(|c| c.0 as f64).collect();
    let sigma = mean_var(&ts).1.sqrt();
    let texp = -1.0 / (1.0 - 1.0 / l as f64).ln();
    let target = std::f64::consts::PI / 6f64.sqrt();
    let ratio = sigma / texp;
    let ratio_dev = ratio / target - 1.0;

    let config = ScaledAutocorrConfig::from_json(
        r#"{"model":"fk","graphs":[{"kind":"torus","d":1,"L":200}],"p":0.5,"q":1,"seed":809,
            "coupling_samples":10000,"series_runs":20,"bootstrap_reps":200}"#,
    )
    .unwrap();
    let curve = &scaled_autocorr_experiment(&config).unwrap()[0];
    let slope = curve.slope.unwrap().slope;
    let slope_dev = slope / -target - 1.0;
    let passed = ratio_dev.abs() < 0.05 && slope_dev.abs() < 0.10 && curve.points[0].ln_rho == Some(0.0);
    verdict(
        8,
        passed,
        &format!("sigma_T/t_exp = {ratio:.4} ({:+.2}%), scaled-autocorrelation slope = {slope:.4} ({:+.2}%)", 100.0 * ratio_dev, 100.0 * slope_dev),
    );
    assert!(passed);
}

#[test]
fn criterion_09_off_critical_gev_2d() {
    let g = Graph::torus(2, 32).unwrap();
    let ts: Vec<f64> =
        coupling_times(&g, &FkParams::new(0.25, 2.0).unwrap(), 909, 10_000).iter().map(|c| c.0 as f64).collect();
    let moments = estimate_moments(&ts, 0, 0).unwrap();
    let fit = fit_gev(&standardize(&ts, &moments).unwrap(), 200, 9).unwrap();
    let passed =
        fit.xi.abs() <= 0.05 && (fit.eta - -0.4501).abs() <= 0.05 && (fit.theta - 0.7797).abs() <= 0.05;
    verdict(
        9,
        passed,
        &format!(
            "torus L=32 p=0.25 q=2: xi = {:.4}({:.4}), eta = {:.4}({:.4}), theta = {:.4}({:.4})",
            fit.xi, fit.se_xi, fit.eta, fit.se_eta, fit.theta, fit.se_theta
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_10_gev_calibration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let scale = 6f64.sqrt() / std::f64::consts::PI;
    let gumbel: Vec<f64> = (0..100_000)
        .map(|_| {
            let u: f64 = rng.gen();
            (-(-u.ln()).ln() - EULER_GAMMA) * scale
        })
        .collect();
    let fit = fit_gev(&gumbel, 100, 10).unwrap();
    let theta0 = 1.0 / gumbel_scale();
    let (xi0, eta0) = (0.0, -EULER_GAMMA * theta0);
    assert!((eta0 - -0.450_053_207_54).abs() < 1e-10);
    let z = [(fit.xi - xi0) / fit.se_xi, (fit.eta - eta0) / fit.se_eta, (fit.theta - theta0) / fit.se_theta];
    let gumbel_ok = z.iter().all(|z| z.abs() <= 3.0);

    let shaped: Vec<f64> = (0..100_000)
        .map(|_| {
            let u: f64 = rng.gen();
            ((-u.ln()).powf(-0.2) - 1.0) / 0.2
        })
        .collect();
    let fit2 = fit_gev(&shaped, 0, 11).unwrap();
    let shaped_ok = (fit2.xi - 0.2).abs() <= 0.02;
    let passed = gumbel_ok && shaped_ok;
    verdict(
        10,
        passed,
        &format!(
            "Gumbel draws: deviations {:+.2}, {:+.2}, {:+.2} bootstrap se; xi=0.2 draws: xi = {:.4}",
            z[0], z[1], z[2], fit2.xi
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_11_ising_cycle() {
    let target = std::f64::consts::PI / 6f64.sqrt();
    let ratio = |l: usize, beta: f64| {
        let g = Graph::cycle(l).unwrap();
        let params = IsingParams::new(beta).unwrap();
        let ts: Vec<f64> = (0..2000u64)
            .into_par_iter()
            .map(|s| ising_coupling_time(&g, &params, 1111, s).unwrap().coupling_time as f64)
            .collect();
        let m = estimate_moments(&ts, 300, l as u64).unwrap();
        let trel = ising_trel_1d(l, beta).unwrap();
        (m.std / trel, m.se_std / trel)
    };
    let (r0, s0) = ratio(1000, 0.0);
    let beta0_ok = (r0 / target - 1.0).abs() < 0.05;
    let mut detail = format!("beta=0: sigma_T/t_rel = {r0:.4}({s0:.4})");
    let mut stable = true;
    for beta in [0.2, 0.4] {
        let (a, sa) = ratio(500, beta);
        let (b, sb) = ratio(1000, beta);
        let ok = (a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt();
        stable &= ok;
        detail += &format!("; beta={beta}: L=500 {a:.4}({sa:.4}), L=1000 {b:.4}({sb:.4})");
    }
    let passed = beta0_ok && stable;
    verdict(11, passed, &detail);
    assert!(passed);
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Graph, FkParams) {
    loop {
        let n = rng.gen_range(3..=6);
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
        let extra = rng.gen_range(0..=(10 - edges.len()).min(4));
        for _ in 0..extra {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v && !edges.contains(&(u, v)) && !edges.contains(&(v, u)) {
                edges.push((u, v));
            }
        }
        if edges.len() > 10 {
            continue;
        }
        let g = Graph::from_edges(n, edges).unwrap();
        let params = FkParams::new(rng.gen_range(0.05..0.95), rng.gen_range(1.0..4.0)).unwrap();
        return (g, params);
    }
}

#[test]
fn criterion_12_monotonicity_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let mut failures = Vec::new();
    for i in 0..20 {
        let (g, params) = random_instance(&mut rng);
        let chain = ExactChain::new(&FkTiny::new(&g, params).unwrap()).unwrap();
        for r in check_appendix_a(&chain, i).unwrap() {
            if !r.passed {
                failures.push(format!("instance {i} (m={}, p={:.3}, q={:.3}): {}", g.edge_count(), params.p(), params.q(), r.check));
            }
        }
    }
    let passed = failures.is_empty();
    verdict(12, passed, &format!("20 random instances with m <= 10, failures: {failures:?}"));
    assert!(passed);
}

#[test]
fn criterion_13_desk_scale_substitutes() {
    // synthetic exponents
    let ls = [8.0, 16.0, 32.0, 64.0, 128.0];
    let mut worst: f64 = 0.0;
    for z in [0.25, 0.491, 1.0, 2.17] {
        let y: Vec<f64> = ls.iter().map(|l: &f64| 1.7 * l.powf(z)).collect();
        let se: Vec<f64> = y.iter().map(|v| 0.01 * v).collect();
        let fit = fit_scaling(&ls, &y, &se).unwrap();
        worst = worst.max((fit.get(Ansatz::PowerNoOffset).z.unwrap() - z).abs());
    }
    let fit_ok = worst <= 0.005;

    // critical pipeline, d=2, q=2
    let q = 2.0;
    let params = FkParams::new(critical_p(q, 2).unwrap(), q).unwrap();
    let mut rows = Vec::new();
    for (l, n) in [(8usize, 1000u64), (16, 1000), (32, 600), (64, 300)] {
        let c = coupling_times(&Graph::torus(2, l).unwrap(), &params, 1313, n);
        let ts: Vec<f64> = c.iter().map(|x| x.0 as f64).collect();
        let ws: Vec<f64> = c.iter().map(|x| x.1 as f64).collect();
        let (mt, vt) = mean_var(&ts);
        let (_, vw) = mean_var(&ws);
        rows.push((l, mt, (vt / vw).sqrt()));
    }
    let finite = rows.iter().all(|r| r.1.is_finite() && r.2.is_finite());
    let above_one = rows.iter().all(|r| r.2 > 1.0);
    let increasing = rows.windows(2).all(|w| w[1].2 > w[0].2);
    let passed = fit_ok && finite && above_one && increasing;
    let table: Vec<String> = rows.iter().map(|r| format!("L={} {:.3}", r.0, r.2)).collect();
    verdict(
        13,
        passed,
        &format!(
            "full-scale exponents and critical GEV tables not run (declared); synthetic z error {worst:.1e}; sigma_T/sigma_W at p_c: {}",
            table.join(", ")
        ),
    );
    assert!(passed);
}
