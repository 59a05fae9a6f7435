use crate::dist::{pow_alpha, Atoms, Dist};
use crate::error::{Error, Result};
use crate::optim::{find_root_monotone, RootSpec};
use crate::special::binomial_coef;

/// The law following `T` on quantile levels `[0, 1-q]` and `W` on
/// `(1-q, 1]`.
///
/// Its distribution function is `F_T` below `a_q = Q_T(1-q)`, flat at `1-q`
/// on `[a_q, b_q)` and `F_W` from `b_q = Q_W(1-q)` on.
#[derive(Debug, Clone)]
pub struct SpliceLaw {
    t: Dist,
    w: Dist,
    q: f64,
    a: f64,
    b: f64,
}

/// Absolute tolerance for the order-0 check `P(T > s) <= P(W > s)`.
const ORDER_TOL: f64 = 1e-12;

impl SpliceLaw {
    pub fn t(&self) -> &Dist {
        &self.t
    }

    pub fn w(&self) -> &Dist {
        &self.w
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn a_q(&self) -> f64 {
        self.a
    }

    pub fn b_q(&self) -> f64 {
        self.b
    }

    /// The splice as a [`Dist`]; an explicit lattice when both parts are
    /// discrete.
    pub fn to_dist(&self) -> Dist {
        if self.q == 0.0 {
            return self.t.clone();
        }
        if self.q == 1.0 {
            return self.w.clone();
        }
        if let (Some(ta), Some(wa)) = (self.t.atoms(), self.w.atoms()) {
            return Dist::from_atoms(splice_atoms(ta, wa, self.q));
        }
        Dist::from_splice(self.clone())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.a {
            self.t.cdf(x)
        } else if x < self.b {
            1.0 - self.q
        } else {
            self.w.cdf(x)
        }
    }

    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= self.a {
            self.t.cdf_left(x)
        } else if x <= self.b {
            1.0 - self.q
        } else {
            self.w.cdf_left(x)
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x < self.a {
            self.t.survival(x)
        } else if x < self.b {
            self.q
        } else {
            self.w.survival(x)
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 1.0 - self.q {
            self.t.quantile(p)
        } else {
            self.w.quantile(p)
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let lo = if self.q < 1.0 { self.t.support().0 } else { self.w.support().0 };
        let hi = if self.q > 0.0 { self.w.support().1 } else { self.t.support().1 };
        (lo, hi)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.t.breakpoints().into_iter().filter(|&x| x <= self.a).collect();
        v.extend(self.w.breakpoints().into_iter().filter(|&x| x >= self.b));
        v.extend([self.a, self.b].into_iter().filter(|x| x.is_finite()));
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn plus_moment(&self, t: f64, alpha: f64) -> Result<f64> {
        if self.q == 0.0 {
            return self.t.pm(t, alpha);
        }
        if self.q == 1.0 {
            return self.w.pm(t, alpha);
        }
        let f = |x: f64| if x > t { pow_alpha(x - t, alpha) } else { 0.0 };
        let (a, b, lvl) = (self.a, self.b, 1.0 - self.q);
        let t_part = self.t.pm(t, alpha)? - upper_plus(&self.t, a, t, alpha)? + (lvl - self.t.cdf(a)) * f(a);
        let w_part = upper_plus(&self.w, b, t, alpha)? + (self.w.cdf(b) - lvl) * f(b);
        Ok((t_part + w_part).max(0.0))
    }

    pub fn minus_moment(&self, t: f64, alpha: f64) -> Result<f64> {
        if self.q == 0.0 {
            return self.t.mm(t, alpha);
        }
        if self.q == 1.0 {
            return self.w.mm(t, alpha);
        }
        let g = |x: f64| if x < t { pow_alpha(t - x, alpha) } else { 0.0 };
        let (a, b, lvl) = (self.a, self.b, 1.0 - self.q);
        let t_part = lower_minus(&self.t, a, t, alpha)? + (lvl - self.t.cdf_left(a)) * g(a);
        let w_part = self.w.mm(t, alpha)? - lower_minus(&self.w, b, t, alpha)? + (self.w.cdf_left(b) - lvl) * g(b);
        Ok((t_part + w_part).max(0.0))
    }

    pub fn mean_var(&self) -> Result<(f64, f64)> {
        if self.q == 0.0 {
            return self.t.mean_var();
        }
        if self.q == 1.0 {
            return self.w.mean_var();
        }
        let (a, b, lvl) = (self.a, self.b, 1.0 - self.q);
        let (mt, vt) = self.t.mean_var()?;
        let u1 = |x: &Dist, c: f64| -> Result<f64> { Ok(x.pm(c, 1.0)? + c * x.survival(c)) };
        let u2 = |x: &Dist, c: f64| -> Result<f64> {
            Ok(x.pm(c, 2.0)? + 2.0 * c * x.pm(c, 1.0)? + c * c * x.survival(c))
        };
        let (ma, mb) = (lvl - self.t.cdf(a), self.w.cdf(b) - lvl);
        let mean = mt - u1(&self.t, a)? + ma * a + u1(&self.w, b)? + mb * b;
        let second = (vt + mt * mt) - u2(&self.t, a)? + ma * a * a + u2(&self.w, b)? + mb * b * b;
        Ok((mean, (second - mean * mean).max(0.0)))
    }
}

/// `E[(X - t)_+^alpha 1{X > c}]`
fn upper_plus(x: &Dist, c: f64, t: f64, alpha: f64) -> Result<f64> {
    if t >= c {
        return x.pm(t, alpha);
    }
    if alpha.fract() != 0.0 {
        return Err(Error::UnsupportedOrder(alpha));
    }
    let k = alpha as u32;
    let d = c - t;
    let mut s = 0.0;
    for j in 0..=k {
        let m = if j == 0 { x.survival(c) } else { x.pm(c, j as f64)? };
        s += binomial_coef(k, j) * d.powi((k - j) as i32) * m;
    }
    Ok(s)
}

/// `E[(t - X)_+^alpha 1{X < c}]`
fn lower_minus(x: &Dist, c: f64, t: f64, alpha: f64) -> Result<f64> {
    if t <= c {
        return x.mm(t, alpha);
    }
    if alpha.fract() != 0.0 {
        return Err(Error::UnsupportedOrder(alpha));
    }
    let k = alpha as u32;
    let d = t - c;
    let mut s = 0.0;
    for j in 0..=k {
        let m = if j == 0 { x.cdf_left(c) } else { x.mm(c, j as f64)? };
        s += binomial_coef(k, j) * d.powi((k - j) as i32) * m;
    }
    Ok(s)
}

fn splice_atoms(t: &Atoms, w: &Atoms, q: f64) -> Atoms {
    let lvl = 1.0 - q;
    let mut values = Vec::with_capacity(t.len() + w.len());
    let mut probs = Vec::with_capacity(t.len() + w.len());
    let mut prev = 0.0;
    for (&v, &p) in t.values().iter().zip(t.probs()) {
        let cur = prev + p;
        let m = cur.min(lvl) - prev.min(lvl);
        if m > 0.0 {
            values.push(v);
            probs.push(m);
        }
        prev = cur;
    }
    let mut prev = 0.0;
    for (&v, &p) in w.values().iter().zip(w.probs()) {
        let cur = prev + p;
        let m = cur.max(lvl) - prev.max(lvl);
        if m > 0.0 {
            values.push(v);
            probs.push(m);
        }
        prev = cur;
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(probs).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut vs: Vec<f64> = Vec::new();
    let mut ps: Vec<f64> = Vec::new();
    for (v, p) in pairs {
        if vs.last() == Some(&v) {
            *ps.last_mut().unwrap() += p;
        } else {
            vs.push(v);
            ps.push(p);
        }
    }
    Atoms::from_sorted(vs, ps)
}

/// Checks `P(T > s) <= P(W > s)` on the combined breakpoint grid and
/// returns the worst point when it fails.
pub fn check_order0(t: &Dist, w: &Dist) -> Result<()> {
    let grid = super::dominance_grid(t, w);
    let mut worst = (f64::NAN, f64::INFINITY);
    for &s in &grid {
        let margin = w.survival(s) - t.survival(s);
        if margin < worst.1 {
            worst = (s, margin);
        }
    }
    if worst.1 < -ORDER_TOL {
        return Err(Error::NotStochOrdered { t: worst.0, margin: worst.1 });
    }
    Ok(())
}

/// Builds `ξ_q` for `T ⪯₀ W`.
pub fn splice(t: &Dist, w: &Dist, q: f64) -> Result<SpliceLaw> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("q = {q} not in [0, 1]")));
    }
    check_order0(t, w)?;
    Ok(splice_unchecked(t, w, q))
}

fn splice_unchecked(t: &Dist, w: &Dist, q: f64) -> SpliceLaw {
    let lvl = 1.0 - q;
    let a = t.quantile(lvl);
    let b = w.quantile(lvl);
    SpliceLaw { t: t.clone(), w: w.clone(), q, a, b: b.max(a) }
}

/// `E[ξ_q] = ∫_0^{1-q} Q_T + ∫_{1-q}^1 Q_W`, evaluated through plus-moments.
pub fn splice_mean(t: &Dist, w: &Dist, q: f64) -> Result<f64> {
    Ok(splice(t, w, q)?.mean_var()?.0)
}

/// Absolute tolerance on the mean of `ξ_{T,W}`.
pub const ZERO_MEAN_TOL: f64 = 1e-13;

/// `ξ_{T,W}`: the splice at the largest `q₀` with mean zero.
pub fn xi_zero_mean(t: &Dist, w: &Dist) -> Result<SpliceLaw> {
    let mt = t.mean()?;
    let mw = w.mean()?;
    if !(mt <= ZERO_MEAN_TOL && mw >= -ZERO_MEAN_TOL) {
        return Err(Error::MeanSignError { mean_t: mt, mean_w: mw });
    }
    check_order0(t, w)?;
    let f = |q: f64| splice_unchecked(t, w, q).mean_var().map(|m| m.0).unwrap_or(f64::NAN);
    let q0 = find_root_monotone(f, &RootSpec { lo: 0.0, hi: 1.0, abs_tol: ZERO_MEAN_TOL })?;
    Ok(splice_unchecked(t, w, q0))
}
