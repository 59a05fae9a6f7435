//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and half-infinite
//! intervals.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Subintervals processed before the remaining ones are accepted as is.
const MAX_INTERVALS: usize = 200_000;

/// `(integral, error estimate, integral of |f|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (l, r) = (f(c - dx), f(c + dx));
        kron += WGK[j] * (l + r);
        abs += WGK[j] * (l.abs() + r.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (l + r);
        }
    }
    (kron * h, ((kron - gauss) * h).abs(), abs * h.abs())
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, abs_tol, rel_tol);
    }
    let mut stack = vec![(a, b, 0u32)];
    let (whole, _, _) = gk15(&f, a, b);
    let mut total = crate::special::KahanSum::new();
    let tol_scale = whole.abs();
    let mut seen = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        seen += 1;
        let (val, err, abs) = gk15(&f, lo, hi);
        let width_frac = (hi - lo) / (b - a);
        let local_tol = (abs_tol.max(rel_tol * tol_scale)) * width_frac.max(1e-6);
        // Below this the estimate is rounding noise and bisecting cannot help.
        let noise = 50.0 * f64::EPSILON * abs;
        if err <= local_tol
            || err <= noise
            || depth >= 48
            || seen >= MAX_INTERVALS
            || hi - lo <= 1e-14 * (lo.abs() + hi.abs())
        {
            total.add(val);
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total.value()
}

/// Integrates `f` over `[a, ∞)` via the substitution `x = a + u / (1 - u)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        let x = a + u / w;
        let v = f(x) / (w * w);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, abs_tol, rel_tol)
}

/// Integrates `f` over `(-∞, b]`.
pub fn integrate_from_neg_inf<F: Fn(f64) -> f64>(f: F, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate_to_inf(|x| f(-x), -b, abs_tol, rel_tol)
}

/// Integrates over `[a, b]` split at the interior `breaks`.
pub fn integrate_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(f64::total_cmp);
    let mut s = crate::special::KahanSum::new();
    let mut lo = a;
    for &p in pts.iter().chain(std::iter::once(&b)) {
        s.add(integrate(&f, lo, p, tol, tol));
        lo = p;
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14);
        assert_relative_eq!(v, 10.5 - 9.0, max_relative = 1e-13);
    }

    #[test]
    fn gaussian_tail_integral() {
        let phi = crate::special::norm_pdf;
        let v = integrate_to_inf(phi, 2.0, 1e-16, 1e-13);
        assert_relative_eq!(v, crate::special::norm_sf(2.0), max_relative = 1e-11);
        let w = integrate_from_neg_inf(phi, -1.0, 1e-16, 1e-13);
        assert_relative_eq!(w, crate::special::norm_cdf(-1.0), max_relative = 1e-11);
    }

    #[test]
    fn kinked_integrand_with_breaks() {
        let v = integrate_split(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-14);
        assert_relative_eq!(v, 0.5 * 0.09 + 0.5 * 0.49, max_relative = 1e-13);
    }
}
