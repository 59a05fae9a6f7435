use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{event_bound, EventKind, EventSpec, StrategyTree, VerifyReport, CI_GAMMA};
use crate::error::{Error, Result};
use crate::special::clopper_pearson_upper;

/// Trials per random stream. Block `b` always uses stream `b` of the
/// seed, so counts do not depend on how blocks are spread over workers.
pub const BLOCK: u64 = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig { trials, seed, workers: 0 }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

pub(crate) fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Runs `f(block_index, trials_in_block)` for every block on `workers`
/// threads and returns the results in block order.
pub(crate) fn map_blocks<T, F>(trials: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    let nblocks = trials.div_ceil(BLOCK);
    let job = || (0..nblocks).into_par_iter().map(|b| f(b, BLOCK.min(trials - b * BLOCK))).collect::<Vec<T>>();
    if workers == 0 {
        Ok(job())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        Ok(pool.install(job))
    }
}

/// Like [`map_blocks`], summing integer count vectors.
pub(crate) fn run_blocks<F>(trials: u64, workers: usize, f: F) -> Result<Vec<u64>>
where
    F: Fn(u64, u64) -> Vec<u64> + Sync + Send,
{
    let parts = map_blocks(trials, workers, f)?;
    let mut acc = vec![0u64; parts.first().map_or(0, Vec::len)];
    for p in parts {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    Ok(acc)
}

/// Simulates one path; returns (event hit, some increment exceeded y).
fn simulate<R: Rng>(strat: &StrategyTree, ev: &EventSpec, y: f64, rng: &mut R) -> (bool, bool) {
    let mut cur = Some(strat.root());
    let (mut s, mut budget) = (0.0, 0.0);
    let mut alive = true;
    let mut hit = false;
    let mut exceeded = false;
    for _ in 0..strat.horizon() {
        let Some(c) = cur else { break };
        let law = c.law();
        let i = law.pick(rng.random::<f64>());
        let v = law.values()[i];
        exceeded |= v > y;
        if alive && !hit {
            budget += ev.pre_budget(law) + ev.post_budget(v);
            if !ev.budget_ok(budget) {
                alive = false;
            } else if ev.hit(s + v) {
                hit = true;
            }
        }
        s += v;
        if (hit || !alive) && (exceeded || y.is_infinite()) {
            break;
        }
        cur = c.child(i);
    }
    (hit, exceeded)
}

/// Monte Carlo estimate of the union probability with a one-sided
/// Clopper–Pearson upper limit at level `1 - 1e-6`.
///
/// For winsorized events `P(max X_i > y)` enters the bound exactly when
/// the strategy can be enumerated (or is i.i.d.) and through its own
/// Clopper–Pearson upper limit otherwise.
pub fn mc_union_prob(strat: &StrategyTree, ev: &EventSpec, cfg: &McConfig) -> Result<VerifyReport> {
    ev.validate()?;
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let y = match ev.kind {
        EventKind::WinsorizedUnion => ev.y.unwrap_or(f64::INFINITY),
        _ => f64::INFINITY,
    };
    let hit0 = ev.hit(0.0);
    let counts = run_blocks(cfg.trials, cfg.workers, |b, m| {
        let mut rng = block_rng(cfg.seed, b);
        let (mut hits, mut exc) = (0u64, 0u64);
        for _ in 0..m {
            let (h, e) = simulate(strat, ev, y, &mut rng);
            hits += (h || hit0) as u64;
            exc += e as u64;
        }
        vec![hits, exc]
    })?;
    let (hits, exc) = (counts[0], counts[1]);
    let p_exceed = if ev.kind == EventKind::WinsorizedUnion {
        match super::exact_exceed_prob(strat, y) {
            Ok(p) => p,
            Err(Error::TreeTooLarge(_)) => clopper_pearson_upper(exc, cfg.trials, CI_GAMMA),
            Err(e) => return Err(e),
        }
    } else {
        0.0
    };
    let bound = event_bound(ev, strat, p_exceed)?;
    let ci_upper = clopper_pearson_upper(hits, cfg.trials, CI_GAMMA);
    Ok(VerifyReport {
        event: *ev,
        exact: None,
        estimate: Some(hits as f64 / cfg.trials as f64),
        ci_upper: Some(ci_upper),
        trials: Some(cfg.trials),
        seed: Some(cfg.seed),
        bound,
        pass: super::within_bound(ci_upper, bound),
    })
}
