#![allow(dead_code)]

use cbound::Dist;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A centered lattice law `X` with a lower envelope `T = min(X, c) - s`
/// and an upper envelope `W = max(X, c') + s'`, so `T <= X <= W` pointwise.
pub fn envelope_triple(seed: u64) -> (Dist, Dist, Dist) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(2..=7);
    let mut vals: Vec<f64> = (0..k).map(|_| (rng.random_range(-40..=40) as f64) / 10.0).collect();
    let mut probs: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let mean: f64 = vals.iter().zip(&probs).map(|(v, p)| v * p).sum();
    vals.iter_mut().for_each(|v| *v -= mean);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c_lo = lo + rng.random_range(0.0..1.0) * (hi - lo);
    let c_hi = lo + rng.random_range(0.0..1.0) * (hi - lo);
    let (s_lo, s_hi) = (rng.random_range(0.0..0.5), rng.random_range(0.0..0.5));
    let t: Vec<f64> = vals.iter().map(|&v| v.min(c_lo) - s_lo).collect();
    let w: Vec<f64> = vals.iter().map(|&v| v.max(c_hi) + s_hi).collect();
    (
        Dist::lattice(vals, probs.clone()).unwrap(),
        Dist::lattice(t, probs.clone()).unwrap(),
        Dist::lattice(w, probs).unwrap(),
    )
}
