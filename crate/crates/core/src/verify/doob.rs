use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::mc::{block_rng, map_blocks};
use super::CI_GAMMA;
use crate::dist::Dist;
use crate::dominance::corollary_bound;
use crate::error::{Error, Result};
use crate::special::{clopper_pearson_upper, norm_pdf, norm_ppf, norm_sf, KahanSum};

/// Stream offset separating the mean-estimation draws from the tail draws.
const MEAN_STREAM: u64 = 1 << 40;

/// `E[(χ₃ - t)_+]`.
pub fn chi3_plus_moment(t: f64) -> f64 {
    if t <= 0.0 {
        return 4.0 * norm_pdf(0.0) - t;
    }
    // Survival 2Φ̄(r) + sqrt(2/π) r e^{-r²/2}, integrated from t.
    2.0 * (norm_pdf(t) - t * norm_sf(t)) + 2.0 * norm_pdf(t)
}

/// `E[(W - t)_+]` for `W ~ Weibull(2, c)`.
fn weibull2_plus_moment(c: f64, t: f64) -> f64 {
    let mean = c * std::f64::consts::PI.sqrt() / 2.0;
    if t <= 0.0 {
        return mean - t;
    }
    c * std::f64::consts::PI.sqrt() * norm_sf(std::f64::consts::SQRT_2 * t / c)
}

const CAL_GRID: usize = 2400;
const CAL_MAX: f64 = 12.0;

fn dominates(c: f64) -> bool {
    (0..=CAL_GRID).all(|i| {
        let t = CAL_MAX * i as f64 / CAL_GRID as f64;
        chi3_plus_moment(t) <= weibull2_plus_moment(c, t)
    })
}

/// Smallest Weibull(2) scale `c`, up to a relative `1e-9` margin, with
/// `scale·χ₃ ⪯₁ Weibull(2, c)`, checked on a grid of `t` up to
/// `12·scale`. Any `c > sqrt(2)·scale` dominates far in the tail.
pub fn calibrate_weibull_scale(scale: f64) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let (mut lo, mut hi) = (std::f64::consts::SQRT_2, 4.0);
    while !dominates(hi) {
        hi *= 2.0;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if dominates(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(scale * hi * (1.0 + 1e-9))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DoobKind {
    /// `Z = Σ x_i` with Rademacher inputs.
    Sum,
    /// `Z = ‖Σ X_i‖₂` for spherical Gaussian inputs in `R³`.
    Norms,
    /// `Z = max_i L_i ‖X_i‖₂` for spherical Gaussian inputs in `R³`.
    Lipschitz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoobDemo {
    pub kind: DoobKind,
    pub n: usize,
    /// Per-coordinate standard deviation of the Gaussian inputs.
    pub sigma: f64,
    /// Lipschitz constants; empty means all ones.
    pub lipschitz: Vec<f64>,
    pub x: f64,
    pub trials: u64,
    /// Trials for the independent estimate of `E[Z]`.
    pub mean_trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl DoobDemo {
    pub fn new(kind: DoobKind, n: usize, x: f64, trials: u64, seed: u64) -> Self {
        DoobDemo { kind, n, sigma: 1.0, lipschitz: Vec::new(), x, trials, mean_trials: trials, seed, workers: 0 }
    }

    fn weight(&self, i: usize) -> f64 {
        self.lipschitz.get(i).copied().unwrap_or(1.0)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.trials == 0 || self.mean_trials < 2 {
            return Err(Error::InvalidParameter("demo needs n >= 1, trials >= 1 and mean_trials >= 2".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) || !(self.x >= 0.0 && self.x.is_finite()) {
            return Err(Error::InvalidParameter("demo needs sigma > 0 and x >= 0".into()));
        }
        if !self.lipschitz.is_empty() && self.lipschitz.len() != self.n {
            return Err(Error::InvalidParameter(format!("expected {} Lipschitz constants", self.n)));
        }
        if self.lipschitz.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter("Lipschitz constants must be positive".into()));
        }
        Ok(())
    }

    /// Dominating increment laws: Rademacher for sums, otherwise
    /// `ε·L_i·W` with `W` Weibull(2) calibrated against `‖X - X'‖ = sqrt(2)σχ₃`.
    pub fn laws(&self) -> Result<Vec<Dist>> {
        self.validate()?;
        match self.kind {
            DoobKind::Sum => Ok(vec![Dist::two_point_mean_zero(-1.0, 1.0)?; self.n]),
            DoobKind::Norms | DoobKind::Lipschitz => {
                let c = calibrate_weibull_scale(std::f64::consts::SQRT_2 * self.sigma)?;
                (0..self.n)
                    .map(|i| {
                        let l = if self.kind == DoobKind::Lipschitz { self.weight(i) } else { 1.0 };
                        Ok(Dist::sign_symmetric(Dist::weibull(2.0, l * c)?))
                    })
                    .collect()
            }
        }
    }

    /// `E[Z]` in closed form where one is available.
    pub fn exact_mean(&self) -> Option<f64> {
        match self.kind {
            DoobKind::Sum => Some(0.0),
            DoobKind::Norms => Some((self.n as f64).sqrt() * self.sigma * 4.0 * norm_pdf(0.0)),
            DoobKind::Lipschitz => None,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.kind {
            DoobKind::Sum => (0..self.n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).sum(),
            DoobKind::Norms => {
                let mut acc = [0.0f64; 3];
                for _ in 0..self.n {
                    for a in acc.iter_mut() {
                        *a += self.sigma * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                acc.iter().map(|a| a * a).sum::<f64>().sqrt()
            }
            DoobKind::Lipschitz => (0..self.n)
                .map(|i| {
                    let r2: f64 = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
                    self.weight(i) * self.sigma * r2.sqrt()
                })
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoobReport {
    pub kind: DoobKind,
    pub n: usize,
    pub x: f64,
    pub mean_estimate: f64,
    /// Half-width of the one-sided normal interval for `E[Z]`.
    pub mean_halfwidth: f64,
    pub exact_mean: Option<f64>,
    /// Tail draws counted as hits when `Z >= threshold`.
    pub threshold: f64,
    pub estimate: f64,
    pub ci_upper: f64,
    pub trials: u64,
    pub seed: u64,
    pub bound: f64,
    pub pass: bool,
}

impl DoobReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Monte Carlo check of `P(Z - E[Z] >= x)` against [`corollary_bound`].
///
/// `E[Z]` is estimated on a separate stream and lowered by a normal
/// half-width at level `1e-6`, so hits are counted on the larger event
/// `Z >= Ê - c + x`.
pub fn doob_demo(demo: &DoobDemo) -> Result<DoobReport> {
    let laws = demo.laws()?;
    let bound = corollary_bound(&laws, demo.x, None)?.bound;

    let parts = map_blocks(demo.mean_trials, demo.workers, |b, m| {
        let mut rng = block_rng(demo.seed, MEAN_STREAM + b);
        let (mut s, mut s2) = (KahanSum::new(), KahanSum::new());
        for _ in 0..m {
            let z = demo.sample(&mut rng);
            s.add(z);
            s2.add(z * z);
        }
        (s.value(), s2.value())
    })?;
    let (mut s, mut s2) = (KahanSum::new(), KahanSum::new());
    for (a, b) in parts {
        s.add(a);
        s2.add(b);
    }
    let m = demo.mean_trials as f64;
    let mean = s.value() / m;
    let var = ((s2.value() - m * mean * mean) / (m - 1.0)).max(0.0);
    let halfwidth = norm_ppf(1.0 - CI_GAMMA) * (var / m).sqrt();
    let threshold = mean - halfwidth + demo.x;

    let hits: u64 = map_blocks(demo.trials, demo.workers, |b, m| {
        let mut rng = block_rng(demo.seed, b);
        (0..m).filter(|_| demo.sample(&mut rng) >= threshold).count() as u64
    })?
    .into_iter()
    .sum();
    let ci_upper = clopper_pearson_upper(hits, demo.trials, CI_GAMMA);
    Ok(DoobReport {
        kind: demo.kind,
        n: demo.n,
        x: demo.x,
        mean_estimate: mean,
        mean_halfwidth: halfwidth,
        exact_mean: demo.exact_mean(),
        threshold,
        estimate: hits as f64 / demo.trials as f64,
        ci_upper,
        trials: demo.trials,
        seed: demo.seed,
        bound,
        pass: super::within_bound(ci_upper, bound),
    })
}
