use rayon::prelude::*;

use crate::dist::{Atoms, Dist};
use crate::error::{Error, Result};
use crate::special::KahanSum;

/// Mass cut from each side of a law with unbounded support.
const TRUNCATION: f64 = 1e-14;
/// Lattice nodes across the summed ranges for the default step.
const DEFAULT_NODES: f64 = 4096.0;
/// Largest tolerated relative variance change from discretization.
const MAX_VAR_DISTORTION: f64 = 0.01;

/// A law on `{(offset + i) h}`.
#[derive(Debug, Clone)]
struct Grid {
    offset: i64,
    w: Vec<f64>,
}

fn range_of(d: &Dist) -> (f64, f64) {
    d.effective_range(TRUNCATION)
}

/// `(Σ ranges) / 4096`.
pub fn default_step(laws: &[Dist]) -> f64 {
    let total: f64 = laws
        .iter()
        .map(|d| {
            let (lo, hi) = range_of(d);
            hi - lo
        })
        .sum();
    if total > 0.0 {
        total / DEFAULT_NODES
    } else {
        1.0
    }
}

fn discretize_grid(d: &Dist, h: f64) -> Result<Grid> {
    let grid = if let Some(a) = d.atoms() {
        // Split each atom between its two neighbouring nodes, keeping its mean.
        let j0 = (a.min() / h).floor() as i64;
        let j1 = (a.max() / h).floor() as i64 + 1;
        let mut w = vec![0.0; (j1 - j0 + 1) as usize];
        for (&v, &p) in a.values().iter().zip(a.probs()) {
            let r = v / h;
            let k = r.floor();
            let frac = r - k;
            let i = (k as i64 - j0) as usize;
            w[i] += p * (1.0 - frac);
            w[i + 1] += p * frac;
        }
        Grid { offset: j0, w }
    } else {
        // Node j gets E[hat((X - jh)/h)], the second difference of E[(X - t)_+].
        let (lo, hi) = range_of(d);
        let j0 = (lo / h).floor() as i64 - 1;
        let j1 = (hi / h).ceil() as i64 + 1;
        let pm: Vec<f64> = ((j0 - 1)..=(j1 + 1))
            .map(|j| d.plus_moment(j as f64 * h, 1.0))
            .collect::<Result<_>>()?;
        let w: Vec<f64> = pm.windows(3).map(|s| ((s[0] - 2.0 * s[1] + s[2]) / h).max(0.0)).collect();
        Grid { offset: j0, w }
    };
    Ok(normalize(grid))
}

fn normalize(mut g: Grid) -> Grid {
    let total = g.w.iter().copied().collect::<KahanSum>().value();
    for x in &mut g.w {
        *x /= total;
    }
    let first = g.w.iter().position(|&x| x > 0.0).unwrap_or(0);
    let last = g.w.iter().rposition(|&x| x > 0.0).unwrap_or(0);
    g.offset += first as i64;
    g.w = g.w[first..=last].to_vec();
    g
}

fn moments(g: &Grid, h: f64) -> (f64, f64) {
    let mean = g.w.iter().enumerate().map(|(i, p)| p * (g.offset + i as i64) as f64 * h).collect::<KahanSum>().value();
    let var = g
        .w
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = (g.offset + i as i64) as f64 * h - mean;
            p * d * d
        })
        .collect::<KahanSum>()
        .value();
    (mean, var)
}

fn check_variance(d: &Dist, g: &Grid, h: f64) -> Result<()> {
    let (_, exact) = d.mean_var()?;
    let (_, disc) = moments(g, h);
    if exact > 0.0 && (disc - exact).abs() > MAX_VAR_DISTORTION * exact {
        return Err(Error::StepTooCoarse { step: h, discretized: disc, exact });
    }
    Ok(())
}

fn convolve_pair(a: &Grid, b: &Grid) -> Grid {
    let mut w = vec![0.0; a.w.len() + b.w.len() - 1];
    for (i, &x) in a.w.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.w.iter().enumerate() {
            w[i + j] += x * y;
        }
    }
    Grid { offset: a.offset + b.offset, w }
}

fn to_dist(g: Grid, h: f64) -> Result<Dist> {
    let values: Vec<f64> = (0..g.w.len()).map(|i| (g.offset + i as i64) as f64 * h).collect();
    Ok(Dist::from_atoms(Atoms::new(values, g.w)?))
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("lattice step {h} must be positive")));
    }
    Ok(())
}

/// Puts a single law on the `h`-lattice: atoms are split between
/// neighbouring nodes, other laws get node masses `E[hat((X - jh)/h)]`.
/// Both keep the mean and dominate the input in convex order.
pub fn discretize(d: &Dist, h: f64) -> Result<Dist> {
    check_step(h)?;
    let g = discretize_grid(d, h)?;
    check_variance(d, &g, h)?;
    to_dist(g, h)
}

/// Law of the sum of independent `laws` on the `h`-lattice (default
/// [`default_step`]).
///
/// Pairwise convolution follows a fixed balanced tree, so the result does
/// not depend on the thread count.
pub fn convolve_independent(laws: &[Dist], h: Option<f64>) -> Result<Dist> {
    if laws.is_empty() {
        return Err(Error::EmptyInput);
    }
    let h = h.unwrap_or_else(|| default_step(laws));
    check_step(h)?;
    let mut level: Vec<Grid> = laws
        .par_iter()
        .map(|d| {
            let g = discretize_grid(d, h)?;
            check_variance(d, &g, h)?;
            Ok(g)
        })
        .collect::<Result<_>>()?;
    while level.len() > 1 {
        level = level
            .par_chunks(2)
            .map(|c| if c.len() == 2 { convolve_pair(&c[0], &c[1]) } else { c[0].clone() })
            .collect();
    }
    to_dist(normalize(level.pop().unwrap()), h)
}
