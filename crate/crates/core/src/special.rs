//! Scalar special functions shared by the distribution kernel.

use statrs::function::{beta, erf, gamma};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// P(Z > x) for a standard normal, accurate in the far upper tail.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn norm_cdf(x: f64) -> f64 {
    norm_sf(-x)
}

/// Standard normal quantile, `inf{x : Phi(x) >= p}`.
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    // Halley steps against the accurate tail function.
    for _ in 0..2 {
        let (r, d) = if x > 0.0 { (norm_sf(x) - (1.0 - p), -norm_pdf(x)) } else { (norm_cdf(x) - p, norm_pdf(x)) };
        if !(d.abs() > 0.0) || !x.is_finite() {
            break;
        }
        let step = r / d;
        x -= step / (1.0 + 0.5 * x * step);
    }
    x
}

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn gamma_fn(x: f64) -> f64 {
    gamma::gamma(x)
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub fn binomial_coef(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for j in 0..k {
        c = c * f64::from(n - j) / f64::from(j + 1);
    }
    c
}

/// Regularized incomplete beta I_x(a, b).
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    beta::beta_reg(a, b, x)
}

/// ln(e^a + e^b) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Clopper–Pearson one-sided upper limit for a binomial proportion at
/// confidence `1 - gamma`.
pub fn clopper_pearson_upper(successes: u64, trials: u64, gamma: f64) -> f64 {
    assert!(trials > 0 && successes <= trials);
    if successes == trials {
        return 1.0;
    }
    let n = trials as f64;
    if successes == 0 {
        return -(gamma.ln() / n).exp_m1();
    }
    // Upper limit p solves P(Bin(n, p) <= k) = gamma, i.e. I_p(k+1, n-k) = 1 - gamma.
    let a = successes as f64 + 1.0;
    let b = n - successes as f64;
    let target = 1.0 - gamma;
    let mut lo = successes as f64 / n;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_quantile_matches_table() {
        assert_relative_eq!(norm_ppf(0.975), 1.959_963_984_540_054, epsilon = 1e-12);
        assert_relative_eq!(norm_ppf(0.5), 0.0, epsilon = 1e-15);
        assert_relative_eq!(norm_cdf(norm_ppf(1e-10)), 1e-10, max_relative = 1e-10);
    }

    #[test]
    fn normal_tail_is_accurate_far_out() {
        // Q(10) = 7.6198530241605e-24
        assert_relative_eq!(norm_sf(10.0), 7.619_853_024_160_527e-24, max_relative = 1e-12);
    }

    #[test]
    fn clopper_pearson_zero_successes_closed_form() {
        let n = 10_000;
        let closed = 1.0 - (1e-6f64).powf(1.0 / n as f64);
        assert_relative_eq!(clopper_pearson_upper(0, n, 1e-6), closed, max_relative = 1e-12);
    }

    #[test]
    fn clopper_pearson_bisection_is_consistent() {
        let (k, n) = (37u64, 1000u64);
        let u = clopper_pearson_upper(k, n, 1e-6);
        // P(Bin(n, u) <= k) should be 1e-6.
        let cdf = 1.0 - beta_reg(k as f64 + 1.0, (n - k) as f64, u);
        assert_relative_eq!(cdf, 1e-6, max_relative = 1e-6);
        assert!(u > k as f64 / n as f64);
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert_relative_eq!(s.value(), 1e-14, max_relative = 1e-9);
    }
}
