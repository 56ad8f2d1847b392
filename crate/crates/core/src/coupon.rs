//! Coupon-collector moments, the standardized Gumbel law, and a direct
//! coupon-time sampler.

use std::f64::consts::PI;

use crate::rng::NoiseSource;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `π / √6`, the scale linking a unit-variance Gumbel law to the standard one.
pub fn gumbel_scale() -> f64 {
    PI / 6f64.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouponMoments {
    pub m: u64,
    pub mean: f64,
    pub variance: f64,
}

impl CouponMoments {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Neumaier-compensated `Σ_{i=1}^m i^{-order}`, accumulated from the smallest term.
pub fn harmonic(m: u64, order: i32) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in (1..=m).rev() {
        let term = (i as f64).powi(-order);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean `m H_m` and variance `m^2 H_m^(2) - m H_m` of the coupon time.
pub fn coupon_moments(m: u64) -> CouponMoments {
    assert!(m >= 1, "coupon_moments needs m >= 1");
    let h1 = harmonic(m, 1);
    let h2 = harmonic(m, 2);
    let mf = m as f64;
    CouponMoments { m, mean: mf * h1, variance: mf * mf * h2 - mf * h1 }
}

/// `G(x) = exp(-exp(-(π/√6) x - γ))`: the Gumbel law with zero mean and unit variance.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-gumbel_scale() * x - EULER_GAMMA).exp()).exp()
}

pub fn gumbel_pdf(x: f64) -> f64 {
    let a = gumbel_scale();
    let z = (-a * x - EULER_GAMMA).exp();
    a * z * (-z).exp()
}

/// Draws sites uniformly from `0..m` until all have appeared. Consumes the
/// stream exactly like the coupled dynamics (site, then `u`), so it
/// reproduces the `W` of a coupled run with the same seed and stream.
pub fn coupon_time(m: usize, seed: u64, stream: u64) -> u64 {
    assert!(m >= 1, "coupon_time needs m >= 1");
    let mut noise = NoiseSource::new(seed, stream);
    let mut seen = vec![false; m];
    let mut missing = m;
    let mut t = 0u64;
    while missing > 0 {
        let step = noise.step(m);
        t += 1;
        if !seen[step.site] {
            seen[step.site] = true;
            missing -= 1;
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_moments() {
        let one = coupon_moments(1);
        assert_eq!((one.mean, one.variance), (1.0, 0.0));
        let four = coupon_moments(4);
        assert!((four.mean - 25.0 / 3.0).abs() < 1e-14);
        assert!((four.variance - 130.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn harmonic_against_asymptotics() {
        // H_m = ln m + γ + 1/(2m) - 1/(12 m^2) + 1/(120 m^4) - ...
        let m = 10_000_000u64;
        let mf = m as f64;
        let asym = mf.ln() + EULER_GAMMA + 0.5 / mf - 1.0 / (12.0 * mf * mf);
        assert!(((harmonic(m, 1) - asym) / asym).abs() < 1e-14);
        // H^(2)_m = π²/6 - 1/m + 1/(2m²) - ...
        let asym2 = PI * PI / 6.0 - 1.0 / mf + 0.5 / (mf * mf);
        assert!(((harmonic(m, 2) - asym2) / asym2).abs() < 1e-14);
    }

    #[test]
    fn gumbel_values() {
        assert!((gumbel_cdf(0.0) - 0.570_376_001_675_023_1).abs() < 1e-15);
        assert!(gumbel_cdf(40.0) > 1.0 - 1e-15);
        assert!(gumbel_cdf(-10.0) < 1e-15);
        let h = 1e-5;
        for &x in &[-2.0, -0.3, 0.0, 1.1, 3.0] {
            let fd = (gumbel_cdf(x + h) - gumbel_cdf(x - h)) / (2.0 * h);
            assert!((fd - gumbel_pdf(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn gumbel_has_zero_mean_unit_variance() {
        // composite Simpson on [-12, 40]
        let (a, b, n) = (-12.0f64, 40.0f64, 200_000usize);
        let h = (b - a) / n as f64;
        let mut moments = [0.0f64; 3];
        for i in 0..=n {
            let x = a + i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let f = gumbel_pdf(x);
            moments[0] += w * f;
            moments[1] += w * x * f;
            moments[2] += w * x * x * f;
        }
        let moments = moments.map(|s| s * h / 3.0);
        assert!((moments[0] - 1.0).abs() < 1e-6);
        assert!(moments[1].abs() < 1e-6);
        assert!((moments[2] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coupon_time_edge_cases() {
        assert_eq!(coupon_time(1, 0, 0), 1);
        assert_eq!(coupon_time(1, 99, 3), 1);
        let w = coupon_time(50, 4, 4);
        assert!(w >= 50);
        assert_eq!(w, coupon_time(50, 4, 4));
    }
}
