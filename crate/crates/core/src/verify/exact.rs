use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Cursor, EventKind, EventSpec, StrategyTree, MAX_PATHS, PATH_TOL};
use crate::error::{Error, Result};
use crate::special::KahanSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOutcome {
    /// Probability of the union event.
    pub prob: f64,
    /// `P(max_i X_i > y)` for winsorized events.
    pub p_exceed: Option<f64>,
    /// Leaf paths of the strategy tree.
    pub paths: u64,
}

fn check_size(strat: &StrategyTree) -> Result<()> {
    let n = strat.path_count();
    if n > MAX_PATHS {
        return Err(Error::TreeTooLarge(n));
    }
    Ok(())
}

struct Walk<'e> {
    ev: &'e EventSpec,
    horizon: usize,
    hits: KahanSum,
}

impl Walk<'_> {
    fn visit(&mut self, cur: Cursor<'_>, depth: usize, s: f64, budget: f64, prob: f64) {
        let law = cur.law();
        let pre = budget + self.ev.pre_budget(law);
        for (i, (&v, &p)) in law.values().iter().zip(law.probs()).enumerate() {
            if p == 0.0 {
                continue;
            }
            let b = pre + self.ev.post_budget(v);
            let pr = prob * p;
            if !self.ev.budget_ok(b) {
                // Budgets only grow, so no later prefix can qualify.
                continue;
            }
            let s2 = s + v;
            if self.ev.hit(s2) {
                self.hits.add(pr);
                continue;
            }
            if let Some(c) = cur.child(i) {
                if depth + 1 < self.horizon {
                    self.visit(c, depth + 1, s2, b, pr);
                }
            }
        }
    }
}

/// Probability of the first-hitting union event, by depth-first
/// enumeration with compensated summation.
pub fn exact_union_prob(strat: &StrategyTree, ev: &EventSpec) -> Result<ExactOutcome> {
    ev.validate()?;
    check_size(strat)?;
    let prob = if ev.hit(0.0) {
        1.0
    } else {
        let mut w = Walk { ev, horizon: strat.horizon(), hits: KahanSum::new() };
        w.visit(strat.root(), 0, 0.0, 0.0, 1.0);
        w.hits.value().min(1.0)
    };
    let p_exceed = match ev.kind {
        EventKind::WinsorizedUnion => Some(exact_exceed_prob(strat, ev.y.unwrap_or(f64::INFINITY))?),
        _ => None,
    };
    Ok(ExactOutcome { prob, p_exceed, paths: strat.path_count() })
}

/// `P(max_i X_i > y)` over the stopped process.
pub fn exact_exceed_prob(strat: &StrategyTree, y: f64) -> Result<f64> {
    if strat.is_iid() {
        // Independent steps without stopping.
        let q = strat.root().law().exceed(y);
        return Ok(-((strat.horizon() as f64) * (-q).ln_1p()).exp_m1());
    }
    check_size(strat)?;
    fn visit(cur: Cursor<'_>, depth: usize, horizon: usize, y: f64, prob: f64, acc: &mut KahanSum) {
        let law = cur.law();
        for (i, (&v, &p)) in law.values().iter().zip(law.probs()).enumerate() {
            let pr = prob * p;
            if v > y {
                acc.add(pr);
                continue;
            }
            if let Some(c) = cur.child(i) {
                if depth + 1 < horizon {
                    visit(c, depth + 1, horizon, y, pr, acc);
                }
            }
        }
    }
    let mut acc = KahanSum::new();
    visit(strat.root(), 0, strat.horizon(), y, 1.0, &mut acc);
    Ok(acc.value().min(1.0))
}

fn rat(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} has no exact rational form")))
}

/// Path limit for the rational re-check.
pub const MAX_RATIONAL_PATHS: u64 = 1_000_000;

/// The union probability in exact rational arithmetic, reading every
/// float input as the rational it represents. Thresholds carry the same
/// `PATH_TOL` slack as the float walk, so the two differ only by rounding
/// in the accumulated sums. Supports Freedman, winsorized and conjecture
/// events.
pub fn exact_union_prob_rational(strat: &StrategyTree, ev: &EventSpec) -> Result<BigRational> {
    ev.validate()?;
    let n = strat.path_count();
    if n > MAX_RATIONAL_PATHS {
        return Err(Error::TreeTooLarge(n));
    }
    let tol = rat(PATH_TOL)?;
    let x = rat(ev.x)? - &tol;
    let v2 = rat(ev.v2)? * (BigRational::one() + &tol) + &tol;
    let y = match ev.kind {
        EventKind::ConjectureUnion => Some(rat(ev.y.unwrap_or(f64::INFINITY))?),
        EventKind::FreedmanUnion | EventKind::WinsorizedUnion => None,
        EventKind::AzumaUnion => {
            return Err(Error::InvalidParameter("rational re-check does not cover Azuma events".into()))
        }
    };
    if x <= BigRational::zero() {
        return Ok(BigRational::one());
    }

    struct Ctx {
        x: BigRational,
        v2: BigRational,
        y: Option<BigRational>,
        horizon: usize,
    }

    fn visit(
        ctx: &Ctx,
        cur: Cursor<'_>,
        depth: usize,
        s: &BigRational,
        budget: &BigRational,
        prob: &BigRational,
        acc: &mut BigRational,
    ) -> Result<()> {
        let law = cur.law();
        let vals: Vec<BigRational> = law.values().iter().map(|&v| rat(v)).collect::<Result<_>>()?;
        let probs: Vec<BigRational> = law.probs().iter().map(|&p| rat(p)).collect::<Result<_>>()?;
        let pre = match &ctx.y {
            None => vals.iter().zip(&probs).fold(BigRational::zero(), |a, (v, p)| a + v * v * p),
            Some(y) => vals.iter().zip(&probs).filter(|(v, _)| *v <= y).fold(BigRational::zero(), |a, (v, p)| a + v * v * p),
        };
        let pre = budget + pre;
        for (i, (v, p)) in vals.iter().zip(&probs).enumerate() {
            if p.is_zero() {
                continue;
            }
            let post = match &ctx.y {
                Some(y) if v > y => v * v,
                _ => BigRational::zero(),
            };
            let b = &pre + post;
            if b > ctx.v2 {
                continue;
            }
            let pr = prob * p;
            let s2 = s + v;
            if s2 >= ctx.x {
                *acc += pr;
                continue;
            }
            if let Some(c) = cur.child(i) {
                if depth + 1 < ctx.horizon {
                    visit(ctx, c, depth + 1, &s2, &b, &pr, acc)?;
                }
            }
        }
        Ok(())
    }

    let ctx = Ctx { x, v2, y, horizon: strat.horizon() };
    let mut acc = BigRational::zero();
    let zero = BigRational::zero();
    visit(&ctx, strat.root(), 0, &zero, &zero, &BigRational::one(), &mut acc)?;
    Ok(acc)
}

/// `r` as a float, exact to rounding.
pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    let (n, d) = (r.numer(), r.denom());
    // Scale so both fit comfortably in f64 before dividing.
    let shift = (n.bits() as i64).max(d.bits() as i64) - 1000;
    if shift > 0 {
        let n2: BigInt = n >> shift as usize;
        let d2: BigInt = d >> shift as usize;
        n2.to_f64().unwrap_or(f64::NAN) / d2.to_f64().unwrap_or(f64::NAN)
    } else {
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::super::NodeLaw;
    use super::*;
    use approx::assert_relative_eq;

    fn g_law(n: usize, v2: f64) -> StrategyTree {
        StrategyTree::iid(n, NodeLaw::freedman_step(v2 / n as f64).unwrap()).unwrap()
    }

    #[test]
    fn single_step_freedman() {
        let out = exact_union_prob(&g_law(1, 1.0), &EventSpec::freedman(1.0, 1.0)).unwrap();
        assert_relative_eq!(out.prob, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn unreachable_level() {
        let out = exact_union_prob(&g_law(3, 1.0), &EventSpec::freedman(3.5, 10.0)).unwrap();
        assert_eq!(out.prob, 0.0);
    }

    #[test]
    fn n4_budget_law() {
        // Brute force over the 16 sign sequences of {-1/4, 1}.
        let out = exact_union_prob(&g_law(4, 1.0), &EventSpec::freedman(1.0, 1.0)).unwrap();
        let mut oracle = 0.0;
        for mask in 0u32..16 {
            let mut s = 0.0;
            let mut pr = 1.0;
            let mut hit = false;
            for k in 0..4 {
                let up = mask >> k & 1 == 1;
                s += if up { 1.0 } else { -0.25 };
                pr *= if up { 0.2 } else { 0.8 };
                hit |= s >= 1.0 - 1e-12;
            }
            if hit {
                oracle += pr;
            }
        }
        assert_relative_eq!(out.prob, oracle, max_relative = 1e-14);
        assert_relative_eq!(out.prob, 0.2832, max_relative = 1e-14);
    }

    #[test]
    fn monotone_in_x_and_v2() {
        let t = StrategyTree::adaptive(4, |h| {
            let s: f64 = h.iter().sum();
            NodeLaw::freedman_step(if s < 0.0 { 0.5 } else { 0.2 }).map(Some)
        })
        .unwrap();
        let mut prev = 1.0;
        for i in 0..10 {
            let p = exact_union_prob(&t, &EventSpec::freedman(0.3 * i as f64, 1.0)).unwrap().prob;
            assert!(p <= prev + 1e-15);
            prev = p;
        }
        let mut prev = 0.0;
        for i in 1..10 {
            let p = exact_union_prob(&t, &EventSpec::freedman(1.0, 0.3 * i as f64)).unwrap().prob;
            assert!(p >= prev - 1e-15);
            prev = p;
        }
    }

    #[test]
    fn rational_matches_float() {
        let t = g_law(4, 1.0);
        let ev = EventSpec::freedman(1.0, 1.0);
        let f = exact_union_prob(&t, &ev).unwrap().prob;
        let r = exact_union_prob_rational(&t, &ev).unwrap();
        assert_relative_eq!(rational_to_f64(&r), f, max_relative = 1e-14);
    }

    #[test]
    fn iid_exceedance_closed_form() {
        let law = NodeLaw::new(vec![-1.0, 0.5, 3.0], vec![0.5, 0.4, 0.1], 3.0).unwrap();
        let iid = StrategyTree::iid(3, law.clone()).unwrap();
        let tree = StrategyTree::adaptive(3, |_| Ok(Some(law.clone()))).unwrap();
        let a = exact_exceed_prob(&iid, 2.0).unwrap();
        let b = exact_exceed_prob(&tree, 2.0).unwrap();
        assert_relative_eq!(a, 1.0 - 0.9f64.powi(3), max_relative = 1e-14);
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn too_large() {
        let t = StrategyTree::iid(30, NodeLaw::freedman_step(0.1).unwrap()).unwrap();
        assert!(matches!(exact_union_prob(&t, &EventSpec::freedman(1.0, 1.0)), Err(Error::TreeTooLarge(_))));
    }
}
