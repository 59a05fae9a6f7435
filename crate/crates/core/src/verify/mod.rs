//! Ground truth for the bounds: exact enumeration of small adaptive
//! strategies, seeded Monte Carlo, adversarial search over strategy
//! families and the Doob-martingale demos.

mod doob;
mod exact;
mod mc;
mod search;
pub mod suite;
mod strategy;

pub use doob::{calibrate_weibull_scale, chi3_plus_moment, doob_demo, DoobDemo, DoobKind, DoobReport};
pub use exact::{exact_exceed_prob, exact_union_prob, exact_union_prob_rational, ExactOutcome};
pub use mc::{mc_union_prob, McConfig, BLOCK};
pub use search::{adversarial_search, conjecture_probe, families, Family, ProbeReport, SearchResult};
pub use strategy::{Cursor, Node, NodeLaw, StrategyTree, LAW_TOL, MAX_HORIZON, MAX_IID_HORIZON};

use serde::{Deserialize, Serialize};

use crate::bounds::{azuma_bentkus5, bentkus, freedman_bentkus_binom, winsorized_freedman};
use crate::dist::Dist;
use crate::error::{Error, Result};

/// Path-count limit for exact enumeration.
pub const MAX_PATHS: u64 = 10_000_000;
/// Confidence parameter of the Clopper–Pearson upper limit.
pub const CI_GAMMA: f64 = 1e-6;
/// Slack in the threshold and budget comparisons along a path.
pub const PATH_TOL: f64 = 1e-12;
/// Absolute slack when comparing a probability with its bound. Strategies
/// that attain a bound exactly otherwise fail on last-bit rounding.
pub const BOUND_TOL: f64 = 1e-12;

pub(crate) fn within_bound(prob: f64, bound: f64) -> bool {
    prob <= bound + BOUND_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// `∪_k {S_k >= x, Σ σ_i² <= v²}`
    FreedmanUnion,
    /// `∪_k {S_k >= x, Σ s_i² <= v²}`, `s_i = (B_i + σ_i²/B_i)/2`
    AzumaUnion,
    /// The Freedman event, bounded through increments winsorized at `y`.
    WinsorizedUnion,
    /// `∪_k {S_k >= x, Σ E[X_i² 1{X_i <= y}] + Σ X_i² 1{X_i > y} <= v²}`
    ConjectureUnion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub kind: EventKind,
    pub x: f64,
    pub v2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

impl EventSpec {
    pub fn new(kind: EventKind, x: f64, v2: f64, y: Option<f64>) -> Result<Self> {
        let e = EventSpec { kind, x, v2, y };
        e.validate()?;
        Ok(e)
    }

    pub fn freedman(x: f64, v2: f64) -> Self {
        EventSpec { kind: EventKind::FreedmanUnion, x, v2, y: None }
    }

    pub fn azuma(x: f64, v2: f64) -> Self {
        EventSpec { kind: EventKind::AzumaUnion, x, v2, y: None }
    }

    pub fn winsorized(x: f64, v2: f64, y: f64) -> Self {
        EventSpec { kind: EventKind::WinsorizedUnion, x, v2, y: Some(y) }
    }

    pub fn conjecture(x: f64, v2: f64, y: f64) -> Self {
        EventSpec { kind: EventKind::ConjectureUnion, x, v2, y: Some(y) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x >= 0.0 && self.x.is_finite()) || !(self.v2 > 0.0 && self.v2.is_finite()) {
            return Err(Error::InvalidParameter(format!("event needs x >= 0 and v2 > 0, got x={}, v2={}", self.x, self.v2)));
        }
        match (self.kind, self.y) {
            (EventKind::WinsorizedUnion | EventKind::ConjectureUnion, Some(y)) if y > 0.0 && y.is_finite() => Ok(()),
            (EventKind::WinsorizedUnion | EventKind::ConjectureUnion, _) => {
                Err(Error::InvalidParameter("winsorized and conjecture events need y > 0".into()))
            }
            _ => Ok(()),
        }
    }

    fn y(&self) -> f64 {
        self.y.unwrap_or(f64::INFINITY)
    }

    /// Budget added before the step is played (predictable part).
    pub(crate) fn pre_budget(&self, law: &NodeLaw) -> f64 {
        match self.kind {
            EventKind::FreedmanUnion | EventKind::WinsorizedUnion => law.second_moment(),
            EventKind::AzumaUnion => {
                let s = law.azuma_s();
                s * s
            }
            EventKind::ConjectureUnion => law.truncated_second(self.y()),
        }
    }

    /// Budget added by the realized increment.
    pub(crate) fn post_budget(&self, value: f64) -> f64 {
        match self.kind {
            EventKind::ConjectureUnion if value > self.y() => value * value,
            _ => 0.0,
        }
    }

    pub(crate) fn budget_ok(&self, budget: f64) -> bool {
        budget <= self.v2 * (1.0 + PATH_TOL) + PATH_TOL
    }

    pub(crate) fn hit(&self, s: f64) -> bool {
        s >= self.x - PATH_TOL
    }
}

/// The bound matching an event for a given strategy.
///
/// `p_exceed` is `P(max X_i > y)` (or an upper bound for it) and only
/// enters the winsorized bound.
pub fn event_bound(ev: &EventSpec, strat: &StrategyTree, p_exceed: f64) -> Result<f64> {
    ev.validate()?;
    Ok(match ev.kind {
        EventKind::FreedmanUnion => {
            let max = strat.max_value();
            if max > 1.0 + LAW_TOL {
                return Err(Error::InvalidStrategy(format!("Freedman events need increments <= 1, found {max}")));
            }
            freedman_bentkus_binom(strat.horizon() as u64, ev.v2, ev.x)?.bound
        }
        EventKind::AzumaUnion => azuma_bentkus5(ev.v2.sqrt(), ev.x)?.result.bound,
        EventKind::WinsorizedUnion => winsorized_freedman(ev.v2, ev.x, ev.y(), p_exceed)?.bound,
        EventKind::ConjectureUnion => conjecture_rhs(ev.v2, ev.x, ev.y())?,
    })
}

/// Right side of the conjectured inequality: the order-2 bound for the
/// centered Poisson with variance `v2` and jumps `y`.
pub fn conjecture_rhs(v2: f64, x: f64, y: f64) -> Result<f64> {
    Ok(bentkus(&Dist::centered_poisson(v2, y)?, x, 2.0)?.bound)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub event: EventSpec,
    pub exact: Option<f64>,
    pub estimate: Option<f64>,
    pub ci_upper: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub bound: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Exact probability of `ev` under `strat`, compared with its bound.
pub fn verify_exact(strat: &StrategyTree, ev: &EventSpec) -> Result<VerifyReport> {
    let out = exact_union_prob(strat, ev)?;
    let bound = event_bound(ev, strat, out.p_exceed.unwrap_or(0.0))?;
    Ok(VerifyReport {
        event: *ev,
        exact: Some(out.prob),
        estimate: None,
        ci_upper: None,
        trials: None,
        seed: None,
        bound,
        pass: within_bound(out.prob, bound),
    })
}
