mod common;

use approx::assert_relative_eq;
use cbound::dominance::{
    check_dominance, convolve_independent, corollary_bound, corollary_bound_lower, dominance_grid, splice, splice_mean,
    xi_zero_mean,
};
use cbound::{Dist, Error};
use common::envelope_triple;
use proptest::prelude::*;

fn binom_pmf(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; row.len() + 1];
        for (k, c) in row.iter().enumerate() {
            next[k] += 0.5 * c;
            next[k + 1] += 0.5 * c;
        }
        row = next;
    }
    row
}

#[test]
fn splice_endpoints_on_triples() {
    for seed in 0..20 {
        let (_, t, w) = envelope_triple(seed);
        let s0 = splice(&t, &w, 0.0).unwrap();
        let s1 = splice(&t, &w, 1.0).unwrap();
        for x in dominance_grid(&t, &w) {
            assert!((s0.cdf(x) - t.cdf(x)).abs() <= 1e-12, "seed {seed} x={x}");
            assert!((s1.cdf(x) - w.cdf(x)).abs() <= 1e-12, "seed {seed} x={x}");
        }
    }
}

#[test]
fn triples_satisfy_first_order_dominance() {
    for seed in 0..20 {
        let (x, t, w) = envelope_triple(seed);
        let xi = xi_zero_mean(&t, &w).unwrap();
        let d = xi.to_dist();
        assert!(d.mean().unwrap().abs() <= 1e-10, "seed {seed}");
        let v = check_dominance(&x, &d, 1.0).unwrap();
        assert!(v.holds, "seed {seed}: {v:?}");
        // The envelopes themselves bracket X.
        assert!(check_dominance(&x, &w, 1.0).unwrap().holds);
        assert!(check_dominance(&x.negate(), &t.negate(), 1.0).unwrap().holds);
    }
}

#[test]
fn splice_of_points() {
    let (t, w) = (Dist::point_mass(-1.0).unwrap(), Dist::point_mass(1.0).unwrap());
    let s = splice(&t, &w, 0.3).unwrap().to_dist();
    assert_relative_eq!(s.mass_at(1.0), 0.3, max_relative = 1e-14);
    assert_relative_eq!(s.mass_at(-1.0), 0.7, max_relative = 1e-14);
    assert_relative_eq!(splice_mean(&t, &w, 0.0).unwrap(), -1.0);
    assert_relative_eq!(splice_mean(&t, &w, 1.0).unwrap(), 1.0);
    let xi = xi_zero_mean(&t, &w).unwrap();
    assert!((xi.q() - 0.5).abs() <= 1e-12);
}

#[test]
fn unordered_envelopes_are_rejected() {
    let t = Dist::point_mass(1.0).unwrap();
    let w = Dist::point_mass(-1.0).unwrap();
    assert!(splice(&t, &w, 0.5).is_err());
    let t2 = Dist::point_mass(0.5).unwrap();
    assert!(matches!(xi_zero_mean(&t2, &Dist::point_mass(1.0).unwrap()), Err(Error::MeanSignError { .. })));
}

#[test]
fn convolution_examples() {
    let coin = Dist::two_point(-1.0, 1.0, 0.5).unwrap();
    let n = 9;
    let s = convolve_independent(&vec![coin; n], Some(1.0)).unwrap();
    for (k, p) in binom_pmf(n).iter().enumerate() {
        let v = 2.0 * k as f64 - n as f64;
        assert_relative_eq!(s.mass_at(v), *p, max_relative = 1e-12);
    }
    let g = Dist::gaussian(0.0, 1.0).unwrap();
    let (_, var) = convolve_independent(&[g.clone(), g], Some(0.01)).unwrap().mean_var().unwrap();
    assert!((var - 2.0).abs() <= 2e-3, "{var}");
}

#[test]
fn corollary_bound_dominates_exact_coin_tail() {
    let coin = Dist::two_point(-1.0, 1.0, 0.5).unwrap();
    let n = 12;
    let laws = vec![coin; n];
    let pmf = binom_pmf(n);
    assert_eq!(corollary_bound(&laws, 0.0, Some(1.0)).unwrap().bound, 1.0);
    for x in [2.0, 4.0, 6.0, 8.0] {
        let exact: f64 = pmf.iter().enumerate().filter(|(k, _)| 2.0 * *k as f64 - n as f64 >= x).map(|(_, p)| p).sum();
        let b = corollary_bound(&laws, x, Some(1.0)).unwrap();
        assert!(b.bound >= exact, "x={x}: {} < {exact}", b.bound);
        assert!(b.bound <= std::f64::consts::E * exact, "x={x}");
    }
    let pairs = vec![(Dist::point_mass(-1.0).unwrap(), Dist::point_mass(1.0).unwrap()); n];
    let lower = corollary_bound_lower(&pairs, 4.0, Some(1.0)).unwrap();
    assert!(lower.lattice_caveat);
    assert_relative_eq!(lower.result.bound, corollary_bound(&laws, 4.0, Some(1.0)).unwrap().bound, max_relative = 1e-10);
}

#[test]
fn corollary_bound_requires_centered_laws() {
    let d = Dist::two_point(-1.0, 1.0, 0.6).unwrap();
    assert!(corollary_bound(&[d], 1.0, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn splice_mean_is_monotone(seed in 0u64..1000, q1 in 0.0f64..1.0, dq in 0.0f64..1.0) {
        let (_, t, w) = envelope_triple(seed);
        let q2 = (q1 + dq).min(1.0);
        let (m1, m2) = (splice_mean(&t, &w, q1).unwrap(), splice_mean(&t, &w, q2).unwrap());
        prop_assert!(m1 <= m2 + 1e-12, "{} {}", m1, m2);
        prop_assert!(t.mean().unwrap() <= m1 + 1e-12 && m2 <= w.mean().unwrap() + 1e-12);
    }

    #[test]
    fn right_shift_dominates(seed in 0u64..1000, s in 0.0f64..1.0) {
        let (x, _, _) = envelope_triple(seed);
        let shifted = Dist::affine(x.clone(), 1.0, s).unwrap();
        for a in [0.0, 1.0, 2.0] {
            prop_assert!(check_dominance(&x, &x, a).unwrap().holds);
            prop_assert!(check_dominance(&x, &shifted, a).unwrap().holds);
        }
    }
}
