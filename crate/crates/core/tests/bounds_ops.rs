use approx::assert_relative_eq;
use cbound::bounds::{
    azuma_bentkus5, bentkus, bentkus_forms, chernoff, fan_chernoff, freedman_bentkus_binom, freedman_bentkus_poisson,
    fuk_nagaev_threshold, log_concave_majorant, optimality_factor, optimality_factor_check, q_alpha, winsorized_freedman,
    TailSpec,
};
use cbound::special::norm_sf;
use cbound::Dist;
use proptest::prelude::*;

/// Poisson(mu) pmf on 0..=kmax by the ratio recursion.
fn poisson_pmf(mu: f64, kmax: usize) -> Vec<f64> {
    let mut p = vec![(-mu).exp()];
    for k in 1..=kmax {
        let prev = p[k - 1];
        p.push(prev * mu / k as f64);
    }
    p
}

/// `E[(1 + (λ/2)(y(N - v2/y²) - x))_+²]` for `N ~ Poisson(v2/y²)`.
fn cp_objective(v2: f64, y: f64, x: f64, lambda: f64) -> f64 {
    let mu = v2 / (y * y);
    let pmf = poisson_pmf(mu, 400);
    pmf.iter()
        .enumerate()
        .map(|(k, p)| {
            let s = y * (k as f64 - mu);
            p * (1.0 + 0.5 * lambda * (s - x)).max(0.0).powi(2)
        })
        .sum()
}

/// Grid scan then ternary refinement of a convex function on `[0, hi]`.
fn grid_min(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let m = 20_000;
    let h = hi / m as f64;
    let i = (0..=m).min_by(|&a, &b| f(a as f64 * h).total_cmp(&f(b as f64 * h))).unwrap();
    let (mut lo, mut up) = ((i as f64 - 1.0).max(0.0) * h, (i as f64 + 1.0) * h);
    for _ in 0..200 {
        let (a, b) = (lo + (up - lo) / 3.0, up - (up - lo) / 3.0);
        if f(a) <= f(b) {
            up = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + up))
}

#[test]
fn chernoff_examples() {
    let g = Dist::gaussian(0.0, 1.0).unwrap();
    assert_relative_eq!(chernoff(&g, 2.0).unwrap().bound, 0.135_335_283_236_612_7, max_relative = 1e-12);
    for &(v2, x) in &[(1.0, 1.0), (0.5, 2.0), (4.0, 3.0), (2.0, 7.5)] {
        let p = Dist::centered_poisson(v2, 1.0).unwrap();
        let closed = x + (v2 + x) * (v2 / (v2 + x)).ln();
        assert_relative_eq!(chernoff(&p, x).unwrap().bound, closed.exp(), max_relative = 1e-10);
    }
    let r = fan_chernoff(1, 1.0, 1.0).unwrap();
    assert_relative_eq!(r.bound, 0.5, max_relative = 1e-9);
}

#[test]
fn bentkus_centered_poisson_pinned() {
    let oracle = grid_min(|l| cp_objective(1.0, 1.0, 3.0, l), 10.0);
    let b = bentkus(&Dist::centered_poisson(1.0, 1.0).unwrap(), 3.0, 2.0).unwrap();
    assert!(b.status.is_ok());
    assert_relative_eq!(b.bound, oracle, max_relative = 1e-9);
    assert_relative_eq!(b.bound, 0.032_052_989_514_810, max_relative = 1e-10);
    let p = freedman_bentkus_poisson(1.0, 3.0).unwrap();
    assert_eq!(p.bound, b.bound);
}

#[test]
fn winsorized_pinned() {
    let oracle = grid_min(|l| cp_objective(4.0, 2.0, 5.0, l), 10.0) + 0.01;
    let w = winsorized_freedman(4.0, 5.0, 2.0, 0.01).unwrap();
    assert_relative_eq!(w.bound, oracle, max_relative = 1e-9);
    assert_relative_eq!(w.bound, 0.081_352_532_655_839, max_relative = 1e-10);
    assert_eq!(winsorized_freedman(4.0, 0.0, 2.0, 0.0).unwrap().bound, 1.0);
}

#[test]
fn azuma5_pinned_and_capped() {
    let a = azuma_bentkus5(1.0, 3.0).unwrap();
    assert!(a.result.status.is_ok(), "{a:?}");
    assert_relative_eq!(a.result.bound, 0.006_479_974_236_622_3, max_relative = 1e-9);
    assert_relative_eq!(a.cap_gauss, 120.0 * (std::f64::consts::E / 5.0).powi(5) * norm_sf(3.0), max_relative = 1e-14);
    assert!(a.result.bound <= a.cap_gauss.min(a.cap_exp));
    assert!(a.cap_gauss <= 0.007_693_2);
}

#[test]
fn binomial_bound_sandwiched_by_exact_tail() {
    // Σ G_i = 1.08 K - 4 with K ~ Bin(50, 0.08/1.08).
    let (n, s2) = (50usize, 0.08f64);
    let p = s2 / (1.0 + s2);
    let pmf: Vec<f64> = (0..=n)
        .map(|k| {
            let lc = (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum::<f64>();
            (lc + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
        })
        .collect();
    let tail = |k0: usize| pmf[k0..].iter().sum::<f64>();
    let b = freedman_bentkus_binom(50, 4.0, 6.0).unwrap();
    assert!(b.status.is_ok());
    // 6 lies between the support points at K = 9 and K = 10.
    assert!(b.bound >= tail(10), "{} < {}", b.bound, tail(10));
    assert!(b.bound <= optimality_factor(2.0) * tail(9), "{} > {}", b.bound, tail(9));
    assert_eq!(freedman_bentkus_binom(50, 4.0, 0.0).unwrap().bound, 1.0);
}

#[test]
fn majorant_chord_example() {
    let m = log_concave_majorant(&[1.0, 0.1, 0.09, 0.001]).unwrap();
    // ln s = (0, -2.303, -2.408, -6.908): the point at 1 sits below the
    // chord from 0 to 2 and is lifted to sqrt(1 * 0.09).
    assert_relative_eq!(m.eval(1.0), 0.3, max_relative = 1e-12);
    assert_relative_eq!(m.eval(2.0), 0.09, max_relative = 1e-12);
    assert_relative_eq!(m.eval(1.5), (0.3f64 * 0.09).sqrt(), max_relative = 1e-12);
    for (k, s) in [1.0, 0.5, 0.2, 0.05].iter().enumerate() {
        let c = log_concave_majorant(&[1.0, 0.5, 0.2, 0.05]).unwrap();
        assert_relative_eq!(c.eval(k as f64), *s, max_relative = 1e-12);
    }
}

#[test]
fn fuk_nagaev_examples() {
    let f = fuk_nagaev_threshold(1.0, 0.1, 10.0, &TailSpec::Power { q: 2.0 }).unwrap();
    assert_relative_eq!(f.x2, 0.4, max_relative = 1e-12);
    let g = fuk_nagaev_threshold(1.0, 0.1, 10.0, &TailSpec::Bounded).unwrap();
    assert_eq!(g.x2, 0.0);
    assert_relative_eq!(g.x1, q_alpha(&Dist::gaussian(0.0, 1.0).unwrap(), 0.05, 5.0).unwrap(), max_relative = 1e-12);
}

#[test]
fn q_alpha_point_mass_and_factor_check() {
    let d = Dist::point_mass(1.7).unwrap();
    for &a in &[1.0, 2.0, 5.0] {
        for &delta in &[0.5, 0.1, 0.001] {
            assert_relative_eq!(q_alpha(&d, delta, a).unwrap(), 1.7, max_relative = 1e-9);
        }
    }
    let z = Dist::point_mass(0.0).unwrap();
    assert_eq!(optimality_factor_check(&z, 2.0, 0.0).unwrap(), 1.0);
}

fn laws() -> Vec<Dist> {
    vec![
        Dist::two_point_mean_zero(-0.25, 1.0).unwrap(),
        Dist::centered_poisson(2.0, 1.0).unwrap(),
        Dist::gaussian(0.0, 1.3).unwrap(),
        Dist::binom_sum(12, -0.2, 1.0, 0.2 / 1.2).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_of_bounds(x in 0.0f64..5.0) {
        for d in laws() {
            let b1 = bentkus(&d, x, 1.0).unwrap().bound;
            let b2 = bentkus(&d, x, 2.0).unwrap().bound;
            let c = chernoff(&d, x).unwrap().bound;
            let tail = 1.0 - d.cdf_left(x);
            prop_assert!(tail <= b1 + 1e-12, "{:?} x={}: {} > {}", d, x, tail, b1);
            prop_assert!(b1 <= b2 * (1.0 + 1e-8) + 1e-15, "{:?} x={}: {} {}", d, x, b1, b2);
            prop_assert!(b2 <= c * (1.0 + 1e-8) + 1e-15, "{:?} x={}: {} {}", d, x, b2, c);
        }
    }

    #[test]
    fn bounds_are_monotone_in_x(x in 0.0f64..5.0, dx in 0.0f64..2.0) {
        for d in laws() {
            let a = bentkus(&d, x, 2.0).unwrap().bound;
            let b = bentkus(&d, x + dx, 2.0).unwrap().bound;
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b <= a * (1.0 + 1e-8) + 1e-15);
        }
    }

    #[test]
    fn forms_agree(x in 0.05f64..4.0, alpha in prop::sample::select(vec![1.5, 2.0, 3.0, 5.0])) {
        for d in laws() {
            let (_, hi) = d.support();
            if x >= hi {
                continue;
            }
            let f = bentkus_forms(&d, x, alpha).unwrap();
            let (a, b) = (f.lambda_form.value, f.t_form.value);
            prop_assert!((a - b).abs() <= 1e-8 * a.max(b), "{:?} x={} α={}: {} {}", d, x, alpha, a, b);
        }
    }

    #[test]
    fn q_alpha_is_homogeneous(c in 0.1f64..10.0, delta in 0.001f64..0.5) {
        let z = q_alpha(&Dist::gaussian(0.0, 1.0).unwrap(), delta, 5.0).unwrap();
        let cz = q_alpha(&Dist::gaussian(0.0, c).unwrap(), delta, 5.0).unwrap();
        prop_assert!((cz - c * z).abs() <= 1e-9 * c * z.abs().max(1.0));
    }
}
