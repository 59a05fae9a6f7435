//! Fixed regression strategies for the exact-enumeration checks.

use super::{EventSpec, NodeLaw, StrategyTree, LAW_TOL};
use crate::error::Result;

pub const XS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];
pub const V2S: [f64; 3] = [0.5, 1.0, 2.0];
/// Truncation levels for the winsorized events.
pub const YS: [f64; 2] = [0.5, 1.0];

#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub name: String,
    pub strategy: StrategyTree,
    pub events: Vec<EventSpec>,
}

fn hist_sum(h: &[f64]) -> f64 {
    h.iter().sum()
}

fn strategies() -> Result<Vec<(String, StrategyTree)>> {
    let mut out = Vec::new();
    let mut push = |name: String, t: StrategyTree| out.push((name, t));

    for n in [1usize, 2, 3, 4, 5, 6, 8] {
        push(format!("iid-budget n={n}"), StrategyTree::iid(n, NodeLaw::freedman_step(1.0 / n as f64)?)?);
    }
    for (n, a, b) in [(4, -0.5, 1.0), (4, -1.0, 1.0), (5, -2.0, 1.0), (6, -0.25, 0.5), (6, -1.0, 0.3)] {
        push(format!("iid-two-point n={n} a={a} b={b}"), StrategyTree::iid(n, NodeLaw::two_point(a, b)?)?);
    }
    for (n, f) in [(4usize, 0.5), (4, 0.8), (6, 0.5), (6, 0.8), (8, 0.5), (8, 0.8)] {
        let first = f;
        let rest = (1.0 - f) / (n - 1) as f64;
        push(
            format!("front-loading n={n} f={f}"),
            StrategyTree::adaptive(n, move |h| NodeLaw::freedman_step(if h.is_empty() { first } else { rest }).map(Some))?,
        );
    }
    for (n, stop) in [(5usize, 0.5), (6, 0.9), (8, 1.9)] {
        push(
            format!("stop-near-boundary n={n} at={stop}"),
            StrategyTree::adaptive(n, move |h| {
                if hist_sum(h) >= stop {
                    return Ok(None);
                }
                NodeLaw::freedman_step(0.25).map(Some)
            })?,
        );
    }
    for (n, behind, ahead) in [(5usize, 0.6, 0.1), (7, 0.4, 0.05), (6, 0.05, 0.5)] {
        push(
            format!("sign-dependent n={n} behind={behind} ahead={ahead}"),
            StrategyTree::adaptive(n, move |h| {
                NodeLaw::freedman_step(if hist_sum(h) < 0.0 { behind } else { ahead }).map(Some)
            })?,
        );
    }
    push("three-point symmetric n=5".into(), StrategyTree::iid(5, NodeLaw::new(vec![-1.0, 0.0, 1.0], vec![0.2, 0.6, 0.2], 1.0)?)?);
    push(
        "three-point skewed n=6".into(),
        StrategyTree::iid(6, NodeLaw::new(vec![-0.5, 0.2, 1.0], vec![0.5, 0.375, 0.125], 1.0)?)?,
    );
    push(
        "three-point adaptive n=5".into(),
        StrategyTree::adaptive(5, |h| {
            let law = if h.last().is_some_and(|&v| v > 0.0) {
                NodeLaw::new(vec![-0.2, 0.0, 1.0], vec![0.5, 0.4, 0.1], 1.0)?
            } else {
                NodeLaw::new(vec![-1.0, 0.0, 1.0], vec![0.3, 0.4, 0.3], 1.0)?
            };
            Ok(Some(law))
        })?,
    );
    for (n, b) in [(4usize, 1.0), (8, 0.5), (6, 0.75)] {
        push(format!("rademacher n={n} B={b}"), StrategyTree::iid(n, NodeLaw::new(vec![-b, b], vec![0.5, 0.5], b)?)?);
    }
    push("supermartingale n=6".into(), StrategyTree::iid(6, NodeLaw::new(vec![-1.0, 1.0], vec![0.6, 0.4], 1.0)?)?);
    push("large-jumps n=4".into(), StrategyTree::iid(4, NodeLaw::two_point(-0.5, 2.0)?)?);
    push(
        "large-jumps adaptive n=5".into(),
        StrategyTree::adaptive(5, |h| {
            let law = if hist_sum(h) < 0.0 { NodeLaw::two_point(-0.25, 1.5)? } else { NodeLaw::freedman_step(0.2)? };
            Ok(Some(law))
        })?,
    );
    Ok(out)
}

/// Events for one strategy: Freedman events when increments are at most
/// one, Azuma events always, winsorized events at every `y` in [`YS`].
pub fn events_for(strategy: &StrategyTree) -> Vec<EventSpec> {
    let mut ev = Vec::new();
    for &x in &XS {
        for &v2 in &V2S {
            if strategy.max_value() <= 1.0 + LAW_TOL {
                ev.push(EventSpec::freedman(x, v2));
            }
            ev.push(EventSpec::azuma(x, v2));
            for &y in &YS {
                ev.push(EventSpec::winsorized(x, v2, y));
            }
        }
    }
    ev
}

/// The regression suite: at least 30 strategies with horizon at most 8
/// and two- or three-point nodes.
pub fn regression_suite() -> Result<Vec<SuiteCase>> {
    Ok(strategies()?
        .into_iter()
        .map(|(name, strategy)| {
            let events = events_for(&strategy);
            SuiteCase { name, strategy, events }
        })
        .collect())
}
