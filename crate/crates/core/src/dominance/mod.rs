//! Order-α stochastic dominance: splices `ξ_q`, grid certification of
//! `U ⪯_α V`, lattice convolution of independent laws and the resulting
//! bounds for functions of independent inputs.

mod convolve;
mod splice;

pub use convolve::{convolve_independent, default_step, discretize};
pub use splice::{check_order0, splice, splice_mean, xi_zero_mean, SpliceLaw, ZERO_MEAN_TOL};

use serde::Serialize;

use crate::bounds::{bentkus, BoundResult};
use crate::dist::Dist;
use crate::error::{Error, Result};

/// Default absolute tolerance on the dominance margin.
pub const DOMINANCE_TOL: f64 = 1e-10;

/// Number of evenly spaced points added to the atom grid.
pub const FILL_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceVerdict {
    pub alpha: f64,
    pub holds: bool,
    pub worst_t: f64,
    /// `min_t (E[(V - t)_+^α] - E[(U - t)_+^α])` over the grid.
    pub margin: f64,
}

/// Atoms and kinks of both laws plus [`FILL_POINTS`] points spread over a
/// slightly widened common range.
pub fn dominance_grid(u: &Dist, v: &Dist) -> Vec<f64> {
    let mut grid = u.breakpoints();
    grid.extend(v.breakpoints());
    let (lu, hu) = u.effective_range(1e-12);
    let (lv, hv) = v.effective_range(1e-12);
    let (lo, hi) = (lu.min(lv), hu.max(hv));
    let pad = 0.05 * (hi - lo).max(1e-12);
    let (lo, hi) = (lo - pad, hi + pad);
    for i in 0..FILL_POINTS {
        grid.push(lo + (hi - lo) * i as f64 / (FILL_POINTS - 1) as f64);
    }
    grid.retain(|x| x.is_finite());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Checks `U ⪯_α V` on [`dominance_grid`] with tolerance [`DOMINANCE_TOL`].
pub fn check_dominance(u: &Dist, v: &Dist, alpha: f64) -> Result<DominanceVerdict> {
    check_dominance_with(u, v, alpha, &dominance_grid(u, v), DOMINANCE_TOL)
}

pub fn check_dominance_with(u: &Dist, v: &Dist, alpha: f64, grid: &[f64], tol: f64) -> Result<DominanceVerdict> {
    if grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut worst_t = grid[0];
    let mut margin = f64::INFINITY;
    for &t in grid {
        let m = v.plus_moment(t, alpha)? - u.plus_moment(t, alpha)?;
        if m < margin {
            margin = m;
            worst_t = t;
        }
    }
    Ok(DominanceVerdict { alpha, holds: margin >= -tol, worst_t, margin })
}

fn check_centered(laws: &[Dist]) -> Result<()> {
    for (i, d) in laws.iter().enumerate() {
        let (m, v) = d.mean_var()?;
        if m.abs() > 1e-8 * (1.0 + v.sqrt()) {
            return Err(Error::InvalidParameter(format!("law {i} has mean {m}, expected 0")));
        }
    }
    Ok(())
}

/// `P(Z - E Z >= x) <= inf_λ E[(1 + λ(Σ ξ_i - x))_+]` for mean-zero `ξ_i`,
/// evaluated on the lattice convolution (step `h`, default
/// [`default_step`]).
pub fn corollary_bound(laws: &[Dist], x: f64, h: Option<f64>) -> Result<BoundResult> {
    check_centered(laws)?;
    let sum = convolve_independent(laws, h)?;
    bentkus(&sum, x, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerTailResult {
    #[serde(flatten)]
    pub result: BoundResult,
    /// Set when some `T_i` or `W_i` has atoms, where the reflected
    /// dominance `-W ⪯ -T` is not implied by the upper one.
    pub lattice_caveat: bool,
}

/// Lower-tail twin: bounds `P(Z - E Z <= -x)` by the upper-tail bound for
/// `Σ ξ_{-W_i, -T_i}`.
pub fn corollary_bound_lower(pairs: &[(Dist, Dist)], x: f64, h: Option<f64>) -> Result<LowerTailResult> {
    let mut laws = Vec::with_capacity(pairs.len());
    let mut caveat = false;
    for (t, w) in pairs {
        caveat |= t.is_discrete() || w.is_discrete();
        laws.push(xi_zero_mean(&w.negate(), &t.negate())?.to_dist());
    }
    let result = corollary_bound(&laws, x, h)?;
    Ok(LowerTailResult { result, lattice_caveat: caveat })
}
