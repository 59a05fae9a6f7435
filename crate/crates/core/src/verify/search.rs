use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::exact::rational_to_f64;
use super::{conjecture_rhs, event_bound, exact_union_prob, exact_union_prob_rational, EventSpec, StrategyTree};
use crate::error::{Error, Result};

type Builder = dyn Fn(&[f64]) -> Result<StrategyTree> + Send + Sync;

/// A strategy family indexed by parameters in the unit cube.
pub struct Family {
    pub name: String,
    pub dim: usize,
    /// The member returned for an empty budget.
    pub first: Vec<f64>,
    build: Box<Builder>,
}

impl std::fmt::Debug for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Family({}, dim={})", self.name, self.dim)
    }
}

impl Family {
    pub fn new<F>(name: impl Into<String>, first: Vec<f64>, build: F) -> Self
    where
        F: Fn(&[f64]) -> Result<StrategyTree> + Send + Sync + 'static,
    {
        Family { name: name.into(), dim: first.len(), first, build: Box::new(build) }
    }

    pub fn build(&self, params: &[f64]) -> Result<StrategyTree> {
        if params.len() != self.dim || params.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter(format!("{} expects {} parameters in [0, 1]", self.name, self.dim)));
        }
        (self.build)(params)
    }

    /// `first`, then a full grid with `m^dim <= budget/2` points, then random
    /// points up to `budget`.
    pub fn candidates(&self, budget: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut out = vec![self.first.clone()];
        if budget <= 1 || self.dim == 0 {
            return out;
        }
        let grid_budget = (budget / 2).max(1);
        let m = ((grid_budget as f64).powf(1.0 / self.dim as f64).floor() as usize).max(1);
        let axis: Vec<f64> = if m == 1 { vec![1.0] } else { (0..m).map(|i| i as f64 / (m - 1) as f64).collect() };
        let total = m.pow(self.dim as u32);
        for idx in 0..total {
            let mut k = idx;
            let p: Vec<f64> = (0..self.dim)
                .map(|_| {
                    let v = axis[k % m];
                    k /= m;
                    v
                })
                .collect();
            out.push(p);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while out.len() < budget {
            out.push((0..self.dim).map(|_| rng.random::<f64>()).collect());
        }
        out.truncate(budget.max(1));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub family: String,
    pub params: Vec<f64>,
    pub prob: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub evaluated: usize,
}

/// Grid plus random search for the member maximizing the exact union
/// probability. Members that fail validation are skipped.
pub fn adversarial_search(family: &Family, ev: &EventSpec, budget: usize, seed: u64) -> Result<SearchResult> {
    let cands = family.candidates(budget, seed);
    let evals: Vec<Option<(f64, f64)>> = cands
        .par_iter()
        .map(|p| {
            let t = family.build(p).ok()?;
            let out = exact_union_prob(&t, ev).ok()?;
            let bound = event_bound(ev, &t, out.p_exceed.unwrap_or(0.0)).ok()?;
            Some((out.prob, bound))
        })
        .collect();
    let mut best: Option<(usize, f64, f64)> = None;
    let mut evaluated = 0;
    let mut within = true;
    for (i, e) in evals.iter().enumerate() {
        if let Some((p, b)) = *e {
            evaluated += 1;
            within &= super::within_bound(p, b);
            if best.is_none_or(|(_, bp, _)| p > bp) {
                best = Some((i, p, b));
            }
        }
    }
    let (i, prob, bound) = best.ok_or_else(|| Error::InvalidStrategy(format!("no valid member of {}", family.name)))?;
    Ok(SearchResult { family: family.name.clone(), params: cands[i].clone(), prob, bound, within_bound: within, evaluated })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub family: String,
    pub x: f64,
    pub v2: f64,
    pub y: f64,
    pub params: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub max_ratio: f64,
    /// Ratio above `1 + 1e-6` in floating point.
    pub candidate: bool,
    /// For candidates: whether the rational recomputation of the left side
    /// still exceeds the right side.
    pub rational_confirms: Option<bool>,
    pub evaluated: usize,
}

/// Largest ratio of the exact conjecture-event probability to the
/// conjectured bound over a family. Exploratory: a ratio above one is
/// reported as a candidate and re-checked in rational arithmetic, never
/// as a disproof.
pub fn conjecture_probe(family: &Family, x: f64, v2: f64, y: f64, budget: usize, seed: u64) -> Result<ProbeReport> {
    let ev = EventSpec::conjecture(x, v2, y);
    ev.validate()?;
    let rhs = conjecture_rhs(v2, x, y)?;
    let cands = family.candidates(budget, seed);
    let evals: Vec<Option<f64>> = cands
        .par_iter()
        .map(|p| {
            let t = family.build(p).ok()?;
            exact_union_prob(&t, &ev).ok().map(|o| o.prob)
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    let mut evaluated = 0;
    for (i, e) in evals.iter().enumerate() {
        if let Some(p) = *e {
            evaluated += 1;
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((i, p));
            }
        }
    }
    let (i, lhs) = best.ok_or_else(|| Error::InvalidStrategy(format!("no valid member of {}", family.name)))?;
    let max_ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
    let candidate = max_ratio > 1.0 + 1e-6;
    let rational_confirms = if candidate {
        let t = family.build(&cands[i])?;
        let exact = exact_union_prob_rational(&t, &ev)?;
        Some(rational_to_f64(&exact) > rhs)
    } else {
        None
    };
    Ok(ProbeReport {
        family: family.name.clone(),
        x,
        v2,
        y,
        params: cands[i].clone(),
        lhs,
        rhs,
        max_ratio,
        candidate,
        rational_confirms,
        evaluated,
    })
}

/// Parametrized strategy families.
pub mod families {
    use super::Family;
    use crate::error::Result;
    use crate::verify::{NodeLaw, StrategyTree};

    /// Smallest variance fraction used in place of zero.
    const EPS: f64 = 1e-3;

    /// I.i.d. `{-σ², 1}` with `σ² = p v²/n`, `p ∈ (0, 1]`; `p = 1` is the
    /// extremal law with the full budget spread evenly.
    pub fn iid_budget_two_point(n: usize, v2: f64) -> Family {
        Family::new(format!("iid-budget-two-point(n={n},v2={v2})"), vec![1.0], move |p| {
            let s2 = p[0].max(EPS) * v2 / n as f64;
            StrategyTree::iid(n, NodeLaw::freedman_step(s2)?)
        })
    }

    /// I.i.d. `{a, 1}` with mean zero and free variance `-a ∈ (0, v²]`.
    pub fn iid_upper_atom(n: usize, v2: f64) -> Family {
        Family::new(format!("iid-upper-atom(n={n},v2={v2})"), vec![1.0 / n as f64], move |p| {
            let s2 = p[0].max(EPS) * v2;
            StrategyTree::iid(n, NodeLaw::freedman_step(s2)?)
        })
    }

    /// I.i.d. mean-zero `{a, b}` with `b ∈ (0, 1]`, `a ∈ [-2, 0)`.
    pub fn iid_two_point(n: usize) -> Family {
        Family::new(format!("iid-two-point(n={n})"), vec![0.125, 1.0], move |p| {
            let a = -2.0 * p[0].max(EPS);
            let b = p[1].max(EPS);
            StrategyTree::iid(n, NodeLaw::two_point(a, b)?)
        })
    }

    /// Spends a fraction `f` of the budget on the first step and splits
    /// the rest evenly; after an up-move the step variance is scaled by `g`.
    pub fn front_loading(n: usize, v2: f64) -> Family {
        Family::new(format!("front-loading(n={n},v2={v2})"), vec![1.0 / n as f64, 1.0], move |p| {
            let f = p[0].max(EPS);
            let g = p[1].max(EPS);
            let first = f * v2;
            let rest = if n > 1 { (1.0 - f) * v2 / (n - 1) as f64 } else { 0.0 };
            StrategyTree::adaptive(n, |h: &[f64]| -> Result<Option<NodeLaw>> {
                let s2 = if h.is_empty() { first } else if h.last() == Some(&1.0) { rest * g } else { rest };
                NodeLaw::freedman_step(s2.max(1e-12)).map(Some)
            })
        })
    }

    /// Two-point increments `{a, b}` with `b ∈ (y, 3y]` above the
    /// truncation level, `a ∈ [-2, 0)`.
    pub fn iid_above_y(n: usize, y: f64) -> Family {
        Family::new(format!("iid-above-y(n={n},y={y})"), vec![0.5, 0.5], move |p| {
            let a = -2.0 * p[0].max(EPS);
            let b = y * (1.0 + 2.0 * p[1].max(EPS));
            StrategyTree::iid(n, NodeLaw::two_point(a, b)?)
        })
    }

    /// Three-point increments `{a, c, b}` with `c <= y < b`, mean zero.
    pub fn iid_three_point_above_y(n: usize, y: f64) -> Family {
        Family::new(format!("iid-three-point-above-y(n={n},y={y})"), vec![0.5, 0.5, 0.5], move |p| {
            let a = -2.0 * p[0].max(EPS);
            let c = y * p[1];
            let b = y * (1.0 + 2.0 * p[2].max(EPS));
            // Mass split: P(c) fixed at 1/2 of the positive side, solved for mean zero.
            let w_pos = 0.5;
            let m_pos = w_pos * c + (1.0 - w_pos) * b;
            let q = -a / (m_pos - a);
            NodeLaw::new(vec![a, c, b], vec![1.0 - q, q * w_pos, q * (1.0 - w_pos)], b)
                .and_then(|l| StrategyTree::iid(n, l))
        })
    }
}
