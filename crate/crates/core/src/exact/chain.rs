use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{stationary_distribution, threshold_table, TinyModel, MAX_CHAIN_SITES};
use crate::error::{Error, Result};
use crate::fk::FkParams;

/// Largest site count for a dense eigendecomposition (4096 states).
pub const MAX_DENSE_SITES: usize = 12;

/// An enumerated heat-bath chain: stationary law, transition operator, spectrum
/// and exact time scales.
///
/// `P = (1/s) Σ_e P_e` is stored implicitly through the per-state thresholds;
/// each row has at most `s + 1` non-zero entries.
#[derive(Debug, Clone)]
pub struct ExactChain {
    sites: usize,
    phi: Vec<f64>,
    up: Vec<f64>,
    observable: Vec<f64>,
    eigenvalues: Option<Vec<f64>>,
    // orthonormal eigenvectors (symmetrized coordinates) spanning the λ₂ eigenspace
    lambda2_space: Vec<Vec<f64>>,
    lambda2: f64,
    fk: Option<FkParams>,
}

impl ExactChain {
    pub fn new<M: TinyModel>(model: &M) -> Result<Self> {
        let s = model.sites();
        if s > MAX_CHAIN_SITES {
            return Err(Error::StateSpaceTooLarge { sites: s, limit: MAX_CHAIN_SITES });
        }
        let n = 1usize << s;
        let phi = stationary_distribution(model);
        let mut chain = ExactChain {
            sites: s,
            phi,
            up: threshold_table(model),
            observable: (0..n as u32).map(|a| model.observable(a)).collect(),
            eigenvalues: None,
            lambda2_space: Vec::new(),
            lambda2: 0.0,
            fk: model.fk_params(),
        };
        if s <= MAX_DENSE_SITES {
            chain.diagonalize();
        } else {
            chain.lambda2 = chain.lambda2_power_iteration(1e-14, 2_000_000, 1);
        }
        Ok(chain)
    }

    fn diagonalize(&mut self) {
        let n = self.len();
        let sqrt_phi: Vec<f64> = self.phi.iter().map(|x| x.sqrt()).collect();
        let mut sym = DMatrix::<f64>::zeros(n, n);
        for a in 0..n {
            for (b, prob) in self.row(a) {
                sym[(a, b)] += sqrt_phi[a] / sqrt_phi[b] * prob;
            }
        }
        // symmetric up to rounding; average the two triangles
        let sym = (&sym + sym.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        self.lambda2 = if n > 1 { values[1] } else { 0.0 };
        // rounding noise around an exactly vanishing λ₂ (a single site)
        if self.lambda2.abs() < 1e-12 {
            self.lambda2 = 0.0;
        }
        let tol = 1e-9;
        self.lambda2_space = order
            .iter()
            .skip(1)
            .take_while(|&&i| (eig.eigenvalues[i] - self.lambda2).abs() <= tol)
            .map(|&i| eig.eigenvectors.column(i).iter().cloned().collect())
            .collect();
        self.eigenvalues = Some(values);
    }

    /// Non-zero entries `(B, P(A, B))` of row `A`.
    pub fn row(&self, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.sites;
        let w = 1.0 / s as f64;
        (0..s).flat_map(move |e| {
            let th = self.up[a * s + e];
            let bit = 1usize << e;
            [(a | bit, w * th), (a & !bit, w * (1.0 - th))]
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Number of states, `2^sites`.
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn observable(&self) -> &[f64] {
        &self.observable
    }

    pub fn threshold(&self, state: usize, site: usize) -> f64 {
        self.up[state * self.sites + site]
    }

    pub fn fk_params(&self) -> Option<FkParams> {
        self.fk
    }

    /// `ψ = q² / (p(1-p))` for FK chains.
    pub fn psi(&self) -> Option<f64> {
        self.fk.map(|p| p.psi())
    }

    /// Full spectrum in descending order, when the chain was small enough for a
    /// dense decomposition.
    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eigenvalues.as_deref()
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Orthonormal basis (in `√φ`-symmetrized coordinates) of the λ₂ eigenspace.
    pub fn lambda2_space(&self) -> &[Vec<f64>] {
        &self.lambda2_space
    }

    pub fn trel(&self) -> f64 {
        1.0 / (1.0 - self.lambda2)
    }

    /// `-1 / ln λ₂`; zero when `λ₂ = 0`.
    pub fn texp(&self) -> f64 {
        if self.lambda2 <= 0.0 {
            0.0
        } else {
            -1.0 / self.lambda2.ln()
        }
    }

    /// `(P f)(A) = Σ_B P(A,B) f(B)`.
    pub fn apply_right(&self, f: &[f64]) -> Vec<f64> {
        let s = self.sites;
        let w = 1.0 / s as f64;
        (0..self.len())
            .map(|a| {
                (0..s)
                    .map(|e| {
                        let th = self.up[a * s + e];
                        let bit = 1usize << e;
                        th * f[a | bit] + (1.0 - th) * f[a & !bit]
                    })
                    .sum::<f64>()
                    * w
            })
            .collect()
    }

    /// `(μ P)(B) = Σ_A μ(A) P(A,B)`.
    pub fn apply_left(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.apply_left_into(mu, &mut out);
        out
    }

    fn apply_left_into(&self, mu: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (a, &mass) in mu.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (b, prob) in self.row(a) {
                out[b] += mass * prob;
            }
        }
    }

    /// `max_A |Σ_B P(A,B) - 1|`.
    pub fn row_sum_residual(&self) -> f64 {
        (0..self.len())
            .map(|a| (self.row(a).map(|(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |φP - φ|`.
    pub fn stationarity_residual(&self) -> f64 {
        self.apply_left(&self.phi).iter().zip(&self.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `max |φ(A)P(A,B) - φ(B)P(B,A)|` over all transitions.
    pub fn reversibility_residual(&self) -> f64 {
        let s = self.sites;
        let mut worst = 0.0f64;
        for a in 0..self.len() {
            for e in 0..s {
                let b = a ^ (1 << e);
                let forward = self.phi[a] * self.transition(a, b);
                let backward = self.phi[b] * self.transition(b, a);
                worst = worst.max((forward - backward).abs());
            }
        }
        worst
    }

    /// `P(A, B)` (zero unless `A` and `B` differ in at most one site).
    pub fn transition(&self, a: usize, b: usize) -> f64 {
        self.row(a).filter(|&(x, _)| x == b).map(|(_, p)| p).sum()
    }

    /// λ₂ by power iteration on the symmetrized operator with the stationary
    /// direction projected out. Independent of the dense decomposition.
    pub fn lambda2_power_iteration(&self, tol: f64, max_iter: usize, seed: u64) -> f64 {
        let n = self.len();
        if n <= 2 {
            // a single-site chain resamples from φ in one step
            return 0.0;
        }
        let sqrt_phi: Vec<f64> = self.phi.iter().map(|x| x.sqrt()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let project = |x: &mut Vec<f64>| {
            let c: f64 = x.iter().zip(&sqrt_phi).map(|(a, b)| a * b).sum();
            x.iter_mut().zip(&sqrt_phi).for_each(|(a, b)| *a -= c * b);
            let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            x.iter_mut().for_each(|a| *a /= norm);
        };
        project(&mut x);
        let mut estimate = 0.0;
        for _ in 0..max_iter {
            let f: Vec<f64> = x.iter().zip(&sqrt_phi).map(|(a, b)| a / b).collect();
            let pf = self.apply_right(&f);
            let mut y: Vec<f64> = pf.iter().zip(&sqrt_phi).map(|(a, b)| a * b).collect();
            let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            project(&mut y);
            x = y;
            if (rayleigh - estimate).abs() <= tol * rayleigh.abs().max(1e-300) {
                return rayleigh;
            }
            estimate = rayleigh;
        }
        estimate
    }

    /// Exact stationary autocovariance `⟨g̃, P^t g̃⟩_φ` for `t = 0..=t_max`,
    /// where `g̃ = g - E_φ g`.
    pub fn autocovariance(&self, g: &[f64], t_max: usize) -> Vec<f64> {
        let mean: f64 = g.iter().zip(&self.phi).map(|(a, b)| a * b).sum();
        let centred: Vec<f64> = g.iter().map(|x| x - mean).collect();
        let mut h = centred.clone();
        let mut out = Vec::with_capacity(t_max + 1);
        for t in 0..=t_max {
            if t > 0 {
                h = self.apply_right(&h);
            }
            out.push(centred.iter().zip(&h).zip(&self.phi).map(|((a, b), w)| a * b * w).sum());
        }
        out
    }

    /// Squared norm of the projection of `g` onto the λ₂ eigenspace,
    /// `‖g_W‖²` in the `φ`-weighted inner product.
    pub fn lambda2_projection(&self, g: &[f64]) -> Option<f64> {
        if self.lambda2_space.is_empty() {
            return None;
        }
        Some(
            self.lambda2_space
                .iter()
                .map(|v| {
                    let c: f64 = g.iter().zip(v).zip(&self.phi).map(|((x, y), w)| x * y * w.sqrt()).sum();
                    c * c
                })
                .sum(),
        )
    }

    /// `d(t) = max_A ‖P^t(A,·) - φ‖_TV` for `t = 0..=t_max`.
    pub fn distance_profile(&self, t_max: usize) -> Vec<f64> {
        let n = self.len();
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                let mut r = vec![0.0; n];
                r[a] = 1.0;
                r
            })
            .collect();
        let mut scratch = vec![0.0; n];
        let mut out = Vec::with_capacity(t_max + 1);
        for t in 0..=t_max {
            if t > 0 {
                for r in rows.iter_mut() {
                    self.apply_left_into(r, &mut scratch);
                    std::mem::swap(r, &mut scratch);
                }
            }
            out.push(rows.iter().map(|r| tv_distance(r, &self.phi)).fold(0.0, f64::max));
        }
        out
    }
}

fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `d(t)` at a single time.
pub fn exact_d(chain: &ExactChain, t: usize) -> f64 {
    chain.distance_profile(t)[t]
}

/// Mixing time `min{t : d(t) <= ε}` and the profile `d(0..=t_mix)`.
pub fn exact_tmix(chain: &ExactChain, epsilon: f64) -> Result<(usize, Vec<f64>)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let mut horizon = 16usize;
    loop {
        let profile = chain.distance_profile(horizon);
        if let Some(t) = profile.iter().position(|&d| d <= epsilon) {
            return Ok((t, profile[..=t].to_vec()));
        }
        if horizon > 1 << 24 {
            return Err(Error::NoConvergence { iterations: horizon, best: vec![], value: profile[horizon] });
        }
        horizon *= 4;
    }
}
