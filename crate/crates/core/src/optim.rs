//! One-dimensional minimization (bracket expansion + golden section) and
//! monotone root finding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("objective is not finite at {0}")]
    NonFinite(f64),
    #[error("invalid bracket [{lo}, {hi}]: f(lo) = {flo}, f(hi) = {fhi}")]
    BadBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("invalid minimization spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Bounded(f64, f64),
    LowerBounded(f64),
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinStatus {
    Converged,
    /// The objective kept decreasing past `2^60` initial steps; the reported
    /// value is the last one seen, an approximation of the limit.
    UnboundedDescent,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub arg: f64,
    pub value: f64,
    pub status: MinStatus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeSpec {
    pub domain: Domain,
    pub guess: f64,
    pub step: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl MinimizeSpec {
    pub fn new(domain: Domain) -> Self {
        let guess = match domain {
            Domain::Bounded(lo, hi) => 0.5 * (lo + hi),
            Domain::LowerBounded(lo) => lo,
            Domain::Real => 0.0,
        };
        MinimizeSpec { domain, guess, step: 1.0, rel_tol: 1e-10, max_iter: 200 }
    }

    pub fn guess(mut self, guess: f64) -> Self {
        self.guess = guess;
        self
    }

    pub fn step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<(), OptimError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(OptimError::InvalidSpec(format!("step must be positive, got {}", self.step)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(OptimError::InvalidSpec("rel_tol must be positive".into()));
        }
        if let Domain::Bounded(lo, hi) = self.domain {
            if !(lo < hi) {
                return Err(OptimError::InvalidSpec(format!("empty domain [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

const MAX_EXPANSION: f64 = (1u64 << 60) as f64;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

struct Tracked<F> {
    f: F,
    best_x: f64,
    best_f: f64,
}

impl<F: FnMut(f64) -> f64> Tracked<F> {
    fn new(f: F) -> Self {
        Tracked { f, best_x: f64::NAN, best_f: f64::INFINITY }
    }

    fn eval(&mut self, x: f64) -> Result<f64, OptimError> {
        let v = (self.f)(x);
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(OptimError::NonFinite(x));
        }
        if v < self.best_f || self.best_x.is_nan() {
            self.best_f = v;
            self.best_x = x;
        }
        Ok(v)
    }
}

enum Bracket {
    Found(f64, f64),
    Unbounded(f64, f64),
}

/// Expands from `origin` in direction `dir` until the objective stops
/// decreasing.
fn expand<F: FnMut(f64) -> f64>(
    t: &mut Tracked<F>,
    origin: f64,
    f_origin: f64,
    step: f64,
    dir: f64,
    back: f64,
) -> Result<Bracket, OptimError> {
    let mut x0 = origin;
    let mut x1 = origin + dir * step;
    let mut f1 = t.eval(x1)?;
    if f1 >= f_origin {
        return Ok(Bracket::Found(back.min(x1), back.max(x1)));
    }
    let mut dist = step;
    loop {
        dist *= 2.0;
        let x2 = origin + dir * dist;
        let f2 = t.eval(x2)?;
        // Exact ties keep expanding: a convex function that has stopped
        // changing in floating point is either at its minimum plateau or
        // descending below resolution.
        if f2 > f1 {
            return Ok(Bracket::Found(x0.min(x2), x0.max(x2)));
        }
        if dist > MAX_EXPANSION * step || !x2.is_finite() {
            return Ok(Bracket::Unbounded(x2, f2));
        }
        x0 = x1;
        x1 = x2;
        f1 = f2;
    }
}

fn golden<F: FnMut(f64) -> f64>(
    t: &mut Tracked<F>,
    mut a: f64,
    mut b: f64,
    max_iter: usize,
) -> Result<MinStatus, OptimError> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = t.eval(c)?;
    let mut fd = t.eval(d)?;
    for _ in 0..max_iter {
        if b - a <= 4.0 * f64::EPSILON * (a.abs() + b.abs()) + f64::MIN_POSITIVE {
            return Ok(MinStatus::Converged);
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = t.eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = t.eval(d)?;
        }
    }
    if b - a <= 1e-9 * (1.0 + a.abs() + b.abs()) {
        Ok(MinStatus::Converged)
    } else {
        Ok(MinStatus::MaxIter)
    }
}

fn minimize_impl<F: FnMut(f64) -> f64>(
    f: F,
    spec: &MinimizeSpec,
    check_convex: bool,
) -> Result<Minimum, OptimError> {
    spec.validate()?;
    let mut t = Tracked::new(f);
    let (lo, hi) = match spec.domain {
        Domain::Bounded(lo, hi) => {
            t.eval(lo)?;
            t.eval(hi)?;
            (lo, hi)
        }
        Domain::LowerBounded(lo) => {
            let g = spec.guess.max(lo);
            let fg = t.eval(g)?;
            let br = if g > lo {
                let flo = t.eval(lo)?;
                if flo <= fg {
                    Bracket::Found(lo, g)
                } else {
                    expand(&mut t, g, fg, spec.step, 1.0, lo)?
                }
            } else {
                expand(&mut t, lo, fg, spec.step, 1.0, lo)?
            };
            match br {
                Bracket::Found(a, b) => (a.max(lo), b),
                Bracket::Unbounded(x, v) => {
                    return Ok(Minimum { arg: x, value: v, status: MinStatus::UnboundedDescent })
                }
            }
        }
        Domain::Real => {
            let g = spec.guess;
            let fg = t.eval(g)?;
            let fr = t.eval(g + spec.step)?;
            let br = if fr < fg {
                expand(&mut t, g, fg, spec.step, 1.0, g)?
            } else {
                let fl = t.eval(g - spec.step)?;
                if fl < fg {
                    expand(&mut t, g, fg, spec.step, -1.0, g)?
                } else {
                    Bracket::Found(g - spec.step, g + spec.step)
                }
            };
            match br {
                Bracket::Found(a, b) => (a, b),
                Bracket::Unbounded(x, v) => {
                    return Ok(Minimum { arg: x, value: v, status: MinStatus::UnboundedDescent })
                }
            }
        }
    };
    let status = golden(&mut t, lo, hi, spec.max_iter)?;
    if cfg!(debug_assertions) && check_convex {
        debug_check_convex(&mut t.f, lo, hi);
    }
    Ok(Minimum { arg: t.best_x, value: t.best_f, status })
}

fn debug_check_convex<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) {
    const K: usize = 9;
    let xs: Vec<f64> = (0..K).map(|i| lo + (hi - lo) * i as f64 / (K - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return;
    }
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    for i in 1..K - 1 {
        let chord = 0.5 * (ys[i - 1] + ys[i + 1]);
        debug_assert!(
            ys[i] <= chord + 1e-8 * (1.0 + scale),
            "objective not convex near {}: {} > {}",
            xs[i],
            ys[i],
            chord
        );
    }
}

/// Minimizes a convex objective over `spec.domain`.
///
/// On half-infinite and infinite domains the bracket is found by doubling
/// the step from `spec.guess`; a golden-section search then shrinks it to
/// machine precision. Descent that persists beyond `2^60` steps is reported
/// as [`MinStatus::UnboundedDescent`] together with the last value seen.
pub fn minimize_convex<F: FnMut(f64) -> f64>(f: F, spec: &MinimizeSpec) -> Result<Minimum, OptimError> {
    minimize_impl(f, spec, true)
}

/// Same search as [`minimize_convex`] for objectives that are only unimodal.
pub fn minimize_unimodal<F: FnMut(f64) -> f64>(f: F, spec: &MinimizeSpec) -> Result<Minimum, OptimError> {
    minimize_impl(f, spec, false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSpec {
    pub lo: f64,
    pub hi: f64,
    pub abs_tol: f64,
}

impl RootSpec {
    pub fn new(lo: f64, hi: f64) -> Self {
        RootSpec { lo, hi, abs_tol: 1e-13 }
    }
}

/// Largest point of `[lo, hi]` at which a non-decreasing `f` is still
/// (within `abs_tol`) non-positive.
///
/// Bisects on the predicate `f(q) <= abs_tol`, so a flat zero interval
/// resolves to its right endpoint.
pub fn find_root_monotone<F: FnMut(f64) -> f64>(mut f: F, spec: &RootSpec) -> Result<f64, OptimError> {
    let (mut lo, mut hi) = (spec.lo, spec.hi);
    if !(lo <= hi) {
        return Err(OptimError::InvalidSpec(format!("empty bracket [{lo}, {hi}]")));
    }
    let flo = f(lo);
    let fhi = f(hi);
    if flo.is_nan() || fhi.is_nan() || flo > spec.abs_tol || fhi < -spec.abs_tol {
        return Err(OptimError::BadBracket { lo, hi, flo, fhi });
    }
    if fhi <= spec.abs_tol {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.is_nan() {
            return Err(OptimError::NonFinite(mid));
        }
        if v <= spec.abs_tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
