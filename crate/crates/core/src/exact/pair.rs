use super::{threshold_table, TinyModel, MAX_PAIR_SITES};
use crate::error::{Error, Result};

/// Iteration stops once `P(T > t)` falls below this.
pub const TAIL_CUTOFF: f64 = 1e-13;
const MAX_STEPS: usize = 50_000_000;

/// Exact law of the coupling time of the coupled bottom/top process.
///
/// A pair `(B, T)` with `B ≤ T` is encoded site-wise in base 3: digit 0 when
/// both are unset, 1 when only the top is set, 2 when both are set. The pair
/// starts at all-1 and is absorbed when no digit equals 1.
#[derive(Debug, Clone)]
pub struct PairChain {
    sites: usize,
    tail: Vec<f64>,
}

impl PairChain {
    pub fn new<M: TinyModel>(model: &M) -> Result<Self> {
        let s = model.sites();
        if s > MAX_PAIR_SITES {
            return Err(Error::StateSpaceTooLarge { sites: s, limit: MAX_PAIR_SITES });
        }
        if s == 0 {
            return Err(Error::InvalidParameter("need at least one site".into()));
        }
        let up = threshold_table(model);
        let pow3: Vec<usize> = (0..=s).map(|i| 3usize.pow(i as u32)).collect();
        let count = pow3[s];
        // bottom and top masks of every pair
        let masks: Vec<(usize, usize)> = (0..count)
            .map(|x| {
                let (mut b, mut t) = (0, 0);
                for e in 0..s {
                    match x / pow3[e] % 3 {
                        1 => t |= 1 << e,
                        2 => {
                            b |= 1 << e;
                            t |= 1 << e
                        }
                        _ => {}
                    }
                }
                (b, t)
            })
            .collect();
        let transient: Vec<bool> = masks.iter().map(|&(b, t)| b != t).collect();
        let w = 1.0 / s as f64;

        let mut mass = vec![0.0; count];
        mass[count / 2] = 1.0; // all digits 1: (3^s - 1) / 2
        let mut next = vec![0.0; count];
        let mut tail = vec![1.0];
        while *tail.last().unwrap() >= TAIL_CUTOFF {
            if tail.len() > MAX_STEPS {
                return Err(Error::NoConvergence {
                    iterations: tail.len(),
                    best: vec![],
                    value: *tail.last().unwrap(),
                });
            }
            next.iter_mut().for_each(|x| *x = 0.0);
            for x in 0..count {
                let m = mass[x];
                if m == 0.0 || !transient[x] {
                    continue;
                }
                let (b, t) = masks[x];
                for e in 0..s {
                    let lo = up[b * s + e];
                    let hi = up[t * s + e];
                    debug_assert!(lo <= hi + 1e-15, "thresholds are not monotone");
                    let base = x - (x / pow3[e] % 3) * pow3[e];
                    let mw = m * w;
                    // u <= lo: both set; lo < u <= hi: top only; u > hi: neither
                    next[base + 2 * pow3[e]] += mw * lo;
                    next[base + pow3[e]] += mw * (hi - lo).max(0.0);
                    next[base] += mw * (1.0 - hi);
                }
            }
            std::mem::swap(&mut mass, &mut next);
            let remaining: f64 = mass.iter().zip(&transient).filter(|(_, &tr)| tr).map(|(m, _)| m).sum();
            tail.push(remaining);
        }
        Ok(PairChain { sites: s, tail })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `P(T > t)` for `t = 0, 1, ...` until it drops below the cutoff.
    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    /// `P(T > t)`; zero past the computed range.
    pub fn tail_at(&self, t: usize) -> f64 {
        self.tail.get(t).copied().unwrap_or(0.0)
    }

    /// `P(T = t)`.
    pub fn pmf(&self, t: usize) -> f64 {
        if t == 0 {
            1.0 - self.tail_at(0)
        } else {
            self.tail_at(t - 1) - self.tail_at(t)
        }
    }

    /// `E(T) = Σ_t P(T > t)`.
    pub fn mean(&self) -> f64 {
        self.tail.iter().sum()
    }

    /// `E(T²) - E(T)²` with `E(T²) = Σ_t (2t + 1) P(T > t)`.
    pub fn variance(&self) -> f64 {
        let second: f64 = self.tail.iter().enumerate().map(|(t, p)| (2 * t + 1) as f64 * p).sum();
        let mean = self.mean();
        (second - mean * mean).max(0.0)
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{ising_pair_chain_law, pair_chain_law};
    use crate::coupon::coupon_moments;
    use crate::fk::FkParams;
    use crate::graph::{Graph, TreeShape};
    use crate::ising::IsingParams;

    // P(W > t) by inclusion-exclusion over the sites never chosen
    fn coupon_tail(m: usize, t: usize) -> f64 {
        let mut total = 0.0;
        let mut binom = 1.0;
        for k in 1..=m {
            binom = binom * (m - k + 1) as f64 / k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * binom * (1.0 - k as f64 / m as f64).powi(t as i32);
        }
        total
    }

    #[test]
    fn single_edge_law() {
        let g = Graph::tree(TreeShape::Path, 2).unwrap();
        let law = pair_chain_law(&g, FkParams::new(0.4, 3.0).unwrap()).unwrap();
        assert_eq!(law.tail(), &[1.0, 0.0]);
        assert_eq!(law.mean(), 1.0);
        assert_eq!(law.variance(), 0.0);
    }

    #[test]
    fn percolation_matches_coupon_tail() {
        for (g, p) in [(Graph::cycle(5).unwrap(), 0.3), (Graph::torus(1, 8).unwrap(), 0.7)] {
            let m = g.edge_count();
            let law = pair_chain_law(&g, FkParams::new(p, 1.0).unwrap()).unwrap();
            for (t, &tail) in law.tail().iter().enumerate() {
                assert!((tail - coupon_tail(m, t)).abs() < 1e-10, "t={t}");
            }
            let exact = coupon_moments(m as u64);
            assert!((law.mean() - exact.mean).abs() < 1e-9);
            assert!((law.variance() - exact.variance).abs() < 1e-7);
        }
    }

    #[test]
    fn trees_couple_at_the_coupon_time() {
        let g = Graph::tree(TreeShape::Star, 4).unwrap();
        let law = pair_chain_law(&g, FkParams::new(0.6, 5.0).unwrap()).unwrap();
        for (t, &tail) in law.tail().iter().enumerate() {
            assert!((tail - coupon_tail(4, t)).abs() < 1e-10);
        }
    }

    #[test]
    fn cycle_law_is_a_proper_tail() {
        let g = Graph::cycle(5).unwrap();
        let law = pair_chain_law(&g, FkParams::new(0.5, 2.0).unwrap()).unwrap();
        assert!(law.tail().windows(2).all(|w| w[1] <= w[0] + 1e-14));
        assert!(*law.tail().last().unwrap() < 1e-12);
        // coalescence needs every edge to have been updated
        for t in 0..law.tail().len() {
            assert!(law.tail_at(t) >= coupon_tail(5, t) - 1e-12);
        }
        assert!(law.mean() > coupon_moments(5).mean);
        let total: f64 = (0..law.tail().len() + 1).map(|t| law.pmf(t)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ising_law_exceeds_coupon() {
        let g = Graph::cycle(6).unwrap();
        let law = ising_pair_chain_law(&g, IsingParams::new(0.3).unwrap()).unwrap();
        assert!(law.mean() > coupon_moments(6).mean);
        let free = ising_pair_chain_law(&g, IsingParams::new(0.0).unwrap()).unwrap();
        assert!((free.mean() - coupon_moments(6).mean).abs() < 1e-9);
    }
}
