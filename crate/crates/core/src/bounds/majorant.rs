use crate::error::{Error, Result};
use crate::special::KahanSum;

/// Least log-concave majorant of a non-increasing tail function given at
/// knots, stored as the upper concave hull of `(x, ln s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantFn {
    knots: Vec<(f64, f64)>,
    hull: Vec<(f64, f64)>,
}

/// Hull of survival values at positions `0, 1, 2, ...`.
pub fn log_concave_majorant(survival: &[f64]) -> Result<MajorantFn> {
    let xs: Vec<f64> = (0..survival.len()).map(|k| k as f64).collect();
    MajorantFn::from_points(&xs, survival)
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

impl MajorantFn {
    /// `xs` increasing, `survival` positive.
    pub fn from_points(xs: &[f64], survival: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyInput);
        }
        if xs.len() != survival.len() {
            return Err(Error::InvalidParameter("knot and value counts differ".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("knots must be strictly increasing".into()));
        }
        if let Some(s) = survival.iter().find(|s| !(**s > 0.0 && **s <= 1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!("survival value {s} not in (0, 1]")));
        }
        let knots: Vec<(f64, f64)> = xs.iter().zip(survival).map(|(&x, &s)| (x, s.ln())).collect();
        // Monotone chain, upper hull: drop points that do not make a right turn.
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(knots.len());
        for &p in &knots {
            while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        Ok(MajorantFn { knots, hull })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Hull vertices in `(x, ln value)` coordinates.
    pub fn hull(&self) -> &[(f64, f64)] {
        &self.hull
    }

    /// Log of the majorant; flat left of the first knot, extended with the
    /// last hull slope right of the last knot.
    pub fn log_eval(&self, x: f64) -> f64 {
        let h = &self.hull;
        if x <= h[0].0 {
            return h[0].1;
        }
        if h.len() == 1 {
            return h[0].1;
        }
        let i = h.partition_point(|p| p.0 < x).min(h.len() - 1).max(1);
        let (a, b) = (h[i - 1], h[i]);
        let slope = (b.1 - a.1) / (b.0 - a.0);
        a.1 + slope * (x - a.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.log_eval(x).exp()
    }
}

/// Knots `(k - v2, P(Poisson(v2) >= k))` for `k = 0, 1, ...` until the tail
/// underflows; tails are summed from the top so they keep full relative
/// accuracy.
pub fn poisson_tail_knots(v2: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(v2 > 0.0 && v2.is_finite()) {
        return Err(Error::InvalidParameter(format!("v2 = {v2} must be positive")));
    }
    let lmu = v2.ln();
    let mut lp = -v2;
    let mut pmf = Vec::new();
    let mut k = 0u64;
    loop {
        let p = lp.exp();
        pmf.push(p);
        let past_mode = k as f64 > v2;
        if past_mode && p < 1e-300 {
            break;
        }
        k += 1;
        lp += lmu - (k as f64).ln();
    }
    let mut tails = vec![0.0; pmf.len()];
    let mut acc = KahanSum::new();
    for i in (0..pmf.len()).rev() {
        acc.add(pmf[i]);
        tails[i] = acc.value().min(1.0);
    }
    tails[0] = 1.0;
    let keep = tails.iter().take_while(|&&t| t > 0.0).count();
    let xs = (0..keep).map(|k| k as f64 - v2).collect();
    tails.truncate(keep);
    Ok((xs, tails))
}

/// `P°(Π̃_{v2} >= x)`: least log-concave majorant of the centered Poisson tail.
pub fn poisson_majorant(v2: f64) -> Result<MajorantFn> {
    let (xs, s) = poisson_tail_knots(v2)?;
    MajorantFn::from_points(&xs, &s)
}
