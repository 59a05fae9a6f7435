//! Named tail bounds: Cramér–Chernoff, Bentkus positive-part bounds of
//! orders 1, 2 and 5, their Freedman and Azuma specializations, quantile
//! functionals and truncation-based bounds for unbounded increments.

mod majorant;

pub use majorant::{log_concave_majorant, poisson_majorant, poisson_tail_knots, MajorantFn};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{check_order, Dist};
use crate::error::{Error, Result};
use crate::optim::{minimize_convex, minimize_unimodal, Domain, MinStatus, MinimizeSpec, Minimum};
use crate::special::{norm_ppf, norm_sf};

/// Relative agreement required between the λ-form and the t-form.
pub const FORM_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "chernoff")]
    Chernoff,
    #[serde(rename = "bentkus1")]
    Bentkus1,
    #[serde(rename = "bentkus2")]
    Bentkus2,
    #[serde(rename = "bentkus5")]
    Bentkus5,
    #[serde(rename = "fan")]
    Fan,
    #[serde(rename = "freedman-binom")]
    FreedmanBinom,
    #[serde(rename = "freedman-poisson")]
    FreedmanPoisson,
    #[serde(rename = "poisson-majorant")]
    PoissonMajorant,
    #[serde(rename = "azuma5")]
    AzumaGauss5,
    #[serde(rename = "winsorized")]
    Winsorized,
    #[serde(rename = "fuk-nagaev")]
    FukNagaev,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Chernoff,
        Method::Bentkus1,
        Method::Bentkus2,
        Method::Bentkus5,
        Method::Fan,
        Method::FreedmanBinom,
        Method::FreedmanPoisson,
        Method::PoissonMajorant,
        Method::AzumaGauss5,
        Method::Winsorized,
        Method::FukNagaev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Chernoff => "chernoff",
            Method::Bentkus1 => "bentkus1",
            Method::Bentkus2 => "bentkus2",
            Method::Bentkus5 => "bentkus5",
            Method::Fan => "fan",
            Method::FreedmanBinom => "freedman-binom",
            Method::FreedmanPoisson => "freedman-poisson",
            Method::PoissonMajorant => "poisson-majorant",
            Method::AzumaGauss5 => "azuma5",
            Method::Winsorized => "winsorized",
            Method::FukNagaev => "fuk-nagaev",
        }
    }

    fn for_order(alpha: f64) -> Method {
        match alpha as u32 {
            1 => Method::Bentkus1,
            5 => Method::Bentkus5,
            _ => Method::Bentkus2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Converged,
    /// The infimum is approached only as λ → ∞; the value is the limit.
    UnboundedDescent,
    MaxIter,
    /// The λ-form and the t-form disagree beyond [`FORM_RTOL`].
    FormMismatch,
    /// A cap that must hold for this bound is exceeded.
    CapViolated,
}

impl BoundStatus {
    /// Whether the value can be trusted as a bound.
    pub fn is_ok(self) -> bool {
        matches!(self, BoundStatus::Converged | BoundStatus::UnboundedDescent)
    }

    fn from_min(s: MinStatus) -> Self {
        match s {
            MinStatus::Converged => BoundStatus::Converged,
            MinStatus::UnboundedDescent => BoundStatus::UnboundedDescent,
            MinStatus::MaxIter => BoundStatus::MaxIter,
        }
    }

    fn worse(self, other: Self) -> Self {
        let rank = |s: Self| match s {
            BoundStatus::Converged => 0,
            BoundStatus::UnboundedDescent => 1,
            BoundStatus::MaxIter => 2,
            BoundStatus::FormMismatch => 3,
            BoundStatus::CapViolated => 4,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub method: Method,
    /// Unclamped infimum.
    pub raw: f64,
    /// `min(1, raw)`.
    pub bound: f64,
    /// `λ*` (or the minimizing threshold for quantile-type results).
    pub optimizer: f64,
    pub status: BoundStatus,
}

impl BoundResult {
    pub fn new(method: Method, raw: f64, optimizer: f64, status: BoundStatus) -> Self {
        BoundResult { method, raw, bound: raw.clamp(0.0, 1.0), optimizer, status }
    }

    fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

fn finite_x(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("x = {x} must be finite")))
    }
}

/// `inf_{λ≥0} E[exp(λ(X - x))]`.
pub fn chernoff(d: &Dist, x: f64) -> Result<BoundResult> {
    finite_x(x)?;
    // Fails when the MGF is infinite on every λ > 0.
    d.log_mgf(1e-8)?;
    let (_, var) = d.mean_var()?;
    let guess = if var > 0.0 { (x.abs() / var).max(1e-3) } else { 1.0 };
    let obj = |l: f64| match d.log_mgf(l) {
        Ok(v) => v - l * x,
        Err(_) => f64::INFINITY,
    };
    let m = minimize_convex(obj, &MinimizeSpec::new(Domain::LowerBounded(0.0)).guess(guess).step(guess))?;
    Ok(BoundResult::new(Method::Chernoff, m.value.exp(), m.arg, BoundStatus::from_min(m.status)))
}

/// `E[(1 + (λ/α)(X - x))_+^α]`.
fn lambda_objective(d: &Dist, x: f64, alpha: f64, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let c = lambda / alpha;
    match d.atoms() {
        Some(a) => a.bentkus_objective(x, c, alpha),
        None => {
            let t = x - 1.0 / c;
            match d.plus_moment(t, alpha).map(|p| c.powf(alpha) * p) {
                Ok(v) if v.is_finite() => v,
                // Overflow far left of the support; λ = 0 covers that limit.
                Ok(_) => f64::INFINITY,
                Err(_) => f64::NAN,
            }
        }
    }
}

/// `E[(X - t)_+^α] / (x - t)^α` at `t = x - e^u`.
fn t_objective(d: &Dist, x: f64, alpha: f64, u: f64) -> f64 {
    let gap = u.exp();
    let t = x - gap;
    if !(t < x) || !t.is_finite() || gap == 0.0 {
        return f64::INFINITY;
    }
    match d.plus_moment(t, alpha).map(|p| p / gap.powf(alpha)) {
        Ok(v) if v.is_finite() => v,
        Ok(_) => f64::INFINITY,
        Err(_) => f64::NAN,
    }
}

/// Both forms of the Bentkus bound with their minimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BentkusForms {
    pub lambda_form: Minimum,
    /// Minimum over `u = ln(x - t)`.
    pub t_form: Minimum,
}

pub fn bentkus_forms(d: &Dist, x: f64, alpha: f64) -> Result<BentkusForms> {
    let lam_guess = alpha / (x.abs() + 1.0);
    let lambda_form = minimize_convex(
        |l| lambda_objective(d, x, alpha, l),
        &MinimizeSpec::new(Domain::LowerBounded(0.0)).guess(lam_guess).step(lam_guess),
    )?;
    let t_form = minimize_unimodal(
        |u| t_objective(d, x, alpha, u),
        &MinimizeSpec::new(Domain::Real).guess((x.abs() + 1.0).ln()).step(1.0),
    )?;
    Ok(BentkusForms { lambda_form, t_form })
}

/// `inf_{λ≥0} E[(1 + (λ/α)(X - x))_+^α]`, cross-checked against
/// `inf_{t<x} E[(X - t)_+^α] / (x - t)^α`.
pub fn bentkus(d: &Dist, x: f64, alpha: f64) -> Result<BoundResult> {
    finite_x(x)?;
    check_order(alpha)?;
    if alpha < 1.0 {
        return Err(Error::UnsupportedOrder(alpha));
    }
    let method = Method::for_order(alpha);
    let (_, hi) = d.support();
    if x >= hi {
        // Only the atom at x (if any) survives as λ → ∞.
        let raw = if x == hi { d.mass_at(x) } else { 0.0 };
        return Ok(BoundResult::new(method, raw, f64::INFINITY, BoundStatus::UnboundedDescent));
    }
    let (mean, var) = d.mean_var()?;
    if mean >= x - 1e-12 * var.sqrt() {
        // λ = 0 is optimal: E[(1 + c(X - x))_+^α] >= (1 + c(E X - x))^α >= 1.
        // Within the slack the exact bound differs from 1 by O(1e-24).
        return Ok(BoundResult::new(method, 1.0, 0.0, BoundStatus::Converged));
    }
    let f = bentkus_forms(d, x, alpha)?;
    let (a, b) = (f.lambda_form.value, f.t_form.value);
    let mut status = BoundStatus::from_min(f.lambda_form.status);
    // The t-form approaches the λ = 0 value only as t → -∞.
    let lambda_at_zero = f.lambda_form.arg == 0.0;
    if !lambda_at_zero {
        status = status.worse(BoundStatus::from_min(f.t_form.status));
    }
    if (a - b).abs() > FORM_RTOL * a.abs().max(b.abs()) + 1e-300 {
        status = status.worse(BoundStatus::FormMismatch);
    }
    let raw = a.min(b);
    Ok(BoundResult::new(method, raw, f.lambda_form.arg, status))
}

/// Bentkus bound of order 2 for `Σ G_i` with `G_i` i.i.d. on
/// `{-v2/n, 1}` with mean zero.
pub fn freedman_bentkus_binom(n: u64, v2: f64, x: f64) -> Result<BoundResult> {
    let s = Dist::freedman_step(n, v2)?.convolve_iid(n)?;
    Ok(bentkus(&s, x, 2.0)?.with_method(Method::FreedmanBinom))
}

/// Bentkus bound of order 2 for the centered Poisson `Π̃_{v2}`.
pub fn freedman_bentkus_poisson(v2: f64, x: f64) -> Result<BoundResult> {
    let p = Dist::centered_poisson(v2, 1.0)?;
    Ok(bentkus(&p, x, 2.0)?.with_method(Method::FreedmanPoisson))
}

/// Cramér–Chernoff bound for `Σ G_i`.
pub fn fan_chernoff(n: u64, v2: f64, x: f64) -> Result<BoundResult> {
    let s = Dist::freedman_step(n, v2)?.convolve_iid(n)?;
    Ok(chernoff(&s, x)?.with_method(Method::Fan))
}

/// `e^α/α`, the largest possible ratio of the order-α bound to the tail.
pub fn optimality_factor(alpha: f64) -> f64 {
    alpha.exp() / alpha
}

/// `(e²/2) P°(Π̃_{v2} >= x)` with the least log-concave majorant `P°`.
pub fn poisson_majorant_bound(v2: f64, x: f64) -> Result<BoundResult> {
    finite_x(x)?;
    let m = poisson_majorant(v2)?;
    Ok(BoundResult::new(Method::PoissonMajorant, optimality_factor(2.0) * m.eval(x), f64::NAN, BoundStatus::Converged))
}

/// `5!(e/5)^5`.
pub fn gauss5_factor() -> f64 {
    120.0 * (std::f64::consts::E / 5.0).powi(5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AzumaResult {
    #[serde(flatten)]
    pub result: BoundResult,
    /// `5!(e/5)^5 P(vZ >= x)`
    pub cap_gauss: f64,
    /// `exp(-x²/(2v²))`
    pub cap_exp: f64,
}

/// Bentkus bound of order 5 for `vZ`, with both comparison caps.
pub fn azuma_bentkus5(v: f64, x: f64) -> Result<AzumaResult> {
    let g = Dist::gaussian(0.0, v)?;
    let mut result = bentkus(&g, x, 5.0)?.with_method(Method::AzumaGauss5);
    let cap_gauss = gauss5_factor() * norm_sf(x / v);
    let cap_exp = (-x * x / (2.0 * v * v)).exp();
    if x >= 0.0 && result.raw > cap_gauss.min(cap_exp) + 1e-9 {
        result.status = result.status.worse(BoundStatus::CapViolated);
    }
    Ok(AzumaResult { result, cap_gauss, cap_exp })
}

/// `Q_α(U; δ) = inf_t t + (E[(U - t)_+^α] / δ)^{1/α}`.
pub fn q_alpha(d: &Dist, delta: f64, alpha: f64) -> Result<f64> {
    Ok(q_alpha_min(d, delta, alpha)?.value)
}

pub fn q_alpha_min(d: &Dist, delta: f64, alpha: f64) -> Result<Minimum> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} not in (0, 1)")));
    }
    check_order(alpha)?;
    if alpha < 1.0 {
        return Err(Error::UnsupportedOrder(alpha));
    }
    let (_, var) = d.mean_var()?;
    let (lo, hi) = d.support();
    let step = if var > 0.0 { var.sqrt() } else { 1.0 };
    let guess = d.quantile(1.0 - delta);
    let scale = delta.powf(-1.0 / alpha);
    let obj = |t: f64| match d.plus_moment(t, alpha) {
        Ok(p) => t + p.powf(1.0 / alpha) * scale,
        Err(_) => f64::NAN,
    };
    // The objective is t for t >= sup X, so the minimum lies at or below it.
    let domain = if hi.is_finite() {
        Domain::Bounded(lo.min(hi - step) - step, hi)
    } else {
        Domain::Real
    };
    let spec = MinimizeSpec::new(domain).step(step);
    let spec = if hi.is_finite() { spec } else { spec.guess(guess) };
    Ok(minimize_convex(obj, &spec)?)
}

/// Bentkus bound of order 2 for `y Π̃` with variance `v2` and jumps `y`,
/// plus the exceedance probability `P(max X_i > y)`.
pub fn winsorized_freedman(v2: f64, x: f64, y: f64, p_exceed: f64) -> Result<BoundResult> {
    if !(0.0..=1.0).contains(&p_exceed) {
        return Err(Error::InvalidParameter(format!("p_exceed = {p_exceed} not in [0, 1]")));
    }
    let p = Dist::centered_poisson(v2, y)?;
    let b = bentkus(&p, x, 2.0)?;
    Ok(BoundResult::new(Method::Winsorized, b.raw + p_exceed, b.optimizer, b.status))
}

/// Conditional tail control `E[(X_i/σ̄_i - t)_+ | F_{i-1}] <= g(t)`.
pub enum TailSpec {
    /// `g ≡ 0`.
    Bounded,
    /// `P(X_i/σ̄_i > u) <= u^{-q}`, so `g(t) = t^{1-q}/(q-1)`.
    Power { q: f64 },
    Function(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TailSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailSpec::Bounded => write!(f, "Bounded"),
            TailSpec::Power { q } => write!(f, "Power {{ q: {q} }}"),
            TailSpec::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl TailSpec {
    /// `g(y)`, after checking `g` is non-negative and non-increasing on a
    /// grid over `(0, 4y]`.
    pub fn g_at(&self, y: f64) -> Result<f64> {
        match self {
            TailSpec::Bounded => Ok(0.0),
            TailSpec::Power { q } => {
                if !(*q > 1.0) {
                    return Err(Error::InvalidParameter(format!("power tail exponent q = {q} must exceed 1")));
                }
                Ok(y.powf(1.0 - q) / (q - 1.0))
            }
            TailSpec::Function(g) => {
                let mut prev = f64::INFINITY;
                for i in 1..=256 {
                    let t = 4.0 * y * i as f64 / 256.0;
                    let v = g(t);
                    if !(v >= 0.0) || v > prev * (1.0 + 1e-12) + 1e-300 {
                        return Err(Error::BadTail(t));
                    }
                    prev = v;
                }
                Ok(g(y))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FukNagaev {
    /// `v Q_5(Z; δ/2)`
    pub x1: f64,
    /// `4 v² g(y) / (y δ)`
    pub x2: f64,
}

impl FukNagaev {
    pub fn threshold(&self) -> f64 {
        self.x1 + self.x2
    }
}

/// Deviation level at which the truncation argument gives tail
/// probability at most `δ`.
pub fn fuk_nagaev_threshold(v: f64, delta: f64, y: f64, tail: &TailSpec) -> Result<FukNagaev> {
    if !(v > 0.0 && y > 0.0) {
        return Err(Error::InvalidParameter(format!("need v > 0 and y > 0, got v={v}, y={y}")));
    }
    let z = Dist::gaussian(0.0, 1.0)?;
    let x1 = v * q_alpha(&z, delta / 2.0, 5.0)?;
    let x2 = 4.0 * v * v * tail.g_at(y)? / (y * delta);
    Ok(FukNagaev { x1, x2 })
}

/// `min{sqrt(2 ln(2/δ)), Φ^{-1}(1 - δ/11.4)}`, the closed-form ceiling on
/// `Q_5(Z; δ/2)`.
pub fn q5_gauss_ceiling(delta: f64) -> f64 {
    (2.0 * (2.0 / delta).ln()).sqrt().min(norm_ppf(1.0 - delta / 11.4))
}

/// `bentkus(d, x, α) / P(d >= x)` for a support point `x`.
pub fn optimality_factor_check(d: &Dist, alpha: f64, x: f64) -> Result<f64> {
    let a = d.atoms().ok_or_else(|| Error::InvalidParameter("optimality check needs a lattice law".into()))?;
    if d.mass_at(x) <= 0.0 {
        return Err(Error::XNotInSupport(x));
    }
    let eps = 0.5 * a.min_gap().unwrap_or(1.0);
    let tail = d.survival(x - eps);
    Ok(bentkus(d, x, alpha)?.raw / tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chernoff_closed_forms() {
        let g = Dist::gaussian(0.0, 1.0).unwrap();
        assert_relative_eq!(chernoff(&g, 2.0).unwrap().bound, (-2.0f64).exp(), max_relative = 1e-12);
        let p = Dist::centered_poisson(1.0, 1.0).unwrap();
        let oracle = 1f64.exp() * 0.25;
        assert_relative_eq!(chernoff(&p, 1.0).unwrap().bound, oracle, max_relative = 1e-10);
        assert_relative_eq!(chernoff(&p, 0.0).unwrap().bound, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn chernoff_rejects_heavy_tails() {
        let w = Dist::weibull(0.5, 1.0).unwrap();
        assert!(matches!(chernoff(&w, 1.0), Err(Error::MgfDiverges(_))));
    }

    #[test]
    fn bentkus_is_one_at_zero() {
        for d in [
            Dist::gaussian(0.0, 1.3).unwrap(),
            Dist::centered_poisson(2.0, 1.0).unwrap(),
            Dist::two_point_mean_zero(-0.25, 1.0).unwrap(),
        ] {
            for &a in &[1.0, 2.0, 5.0] {
                let b = bentkus(&d, 0.0, a).unwrap();
                assert!((b.bound - 1.0).abs() <= 1e-12, "{d:?} {a}: {b:?}");
            }
        }
    }

    #[test]
    fn fan_fair_coin() {
        let r = fan_chernoff(1, 1.0, 1.0).unwrap();
        assert_relative_eq!(r.bound, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn binom_single_step_dominates_atom() {
        let r = freedman_bentkus_binom(1, 1.0, 1.0).unwrap();
        assert!(r.bound >= 0.5 - 1e-12);
    }

    #[test]
    fn gauss5_constant() {
        assert_relative_eq!(gauss5_factor(), 5.699, max_relative = 2e-4);
    }

    #[test]
    fn q_alpha_point_mass() {
        let d = Dist::point_mass(1.7).unwrap();
        for &delta in &[0.3, 0.01] {
            for &a in &[1.0, 2.0, 5.0] {
                assert_relative_eq!(q_alpha(&d, delta, a).unwrap(), 1.7, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn fuk_nagaev_power_tail() {
        let r = fuk_nagaev_threshold(1.0, 0.1, 10.0, &TailSpec::Power { q: 2.0 }).unwrap();
        assert_relative_eq!(r.x2, 0.4, max_relative = 1e-14);
        let b = fuk_nagaev_threshold(1.0, 0.1, 10.0, &TailSpec::Bounded).unwrap();
        assert_eq!(b.x2, 0.0);
        let d = fuk_nagaev_threshold(2.0, 0.1, 10.0, &TailSpec::Power { q: 2.0 }).unwrap();
        assert_relative_eq!(d.x1, 2.0 * r.x1, max_relative = 1e-9);
        assert_relative_eq!(d.x2, 4.0 * r.x2, max_relative = 1e-14);
        let bad = TailSpec::Function(Box::new(|t| t));
        assert!(matches!(fuk_nagaev_threshold(1.0, 0.1, 1.0, &bad), Err(Error::BadTail(_))));
    }

    #[test]
    fn optimality_single_atom() {
        let d = Dist::point_mass(0.0).unwrap();
        assert_relative_eq!(optimality_factor_check(&d, 2.0, 0.0).unwrap(), 1.0, max_relative = 1e-12);
        assert!(matches!(optimality_factor_check(&d, 2.0, 0.5), Err(Error::XNotInSupport(_))));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_value(m).unwrap(), serde_json::Value::String(m.name().into()));
        }
    }
}
