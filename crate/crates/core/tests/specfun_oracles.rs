//! Independent oracles for the hypergeometric evaluator.

use dskg_core::specfun::{
    gamma_real, gauss_2f1, gauss_2f1_at_one, gauss_2f1_diff, HypParams, Z_SWITCH,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

const TOL: f64 = 1e-13;

/// Complete elliptic integral K(k) by the trapezoid rule on [0, π/2]
/// (the integrand is smooth and even-periodic, so the rule converges
/// geometrically).
fn elliptic_k_quadrature(k2: f64) -> f64 {
    let n = 400;
    let h = 0.5 * PI / n as f64;
    let g = |th: f64| 1.0 / (1.0 - k2 * th.sin().powi(2)).sqrt();
    let mut s = 0.5 * (g(0.0) + g(0.5 * PI));
    for i in 1..n {
        s += g(i as f64 * h);
    }
    s * h
}

/// Brute-force Maclaurin sum with a fixed, generous number of terms.
fn brute_series(a: Complex64, b: Complex64, c: Complex64, z: f64, terms: usize) -> Complex64 {
    let mut t = Complex64::new(1.0, 0.0);
    let mut s = t;
    for k in 0..terms {
        let k = k as f64;
        t *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        s += t;
    }
    s
}

fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn elliptic_identity_at_half() {
    let oracle = 2.0 / PI * elliptic_k_quadrature(0.5);
    assert!((oracle - 1.180_340_599_016_096).abs() < 1e-12);
    let v = gauss_2f1(&HypParams::real(0.5, 0.5, 1.0, 0.5), TOL).unwrap();
    assert!((v.re - oracle).abs() < 1e-13);
    assert_eq!(v.im, 0.0);
}

#[test]
fn elliptic_identity_across_both_branches() {
    // c − a − b = 0: logarithmic branch above the switch.
    for &k2 in &[0.1, 0.6, 0.69, 0.71, 0.85, 0.95, 0.99] {
        let oracle = 2.0 / PI * elliptic_k_quadrature(k2);
        let v = gauss_2f1(&HypParams::real(0.5, 0.5, 1.0, k2), TOL).unwrap().re;
        assert!((v - oracle).abs() < 1e-12 * oracle, "k2 = {k2}: {v} vs {oracle}");
    }
}

#[test]
fn gauss_summation_against_statrs_gamma() {
    let m = 1.0;
    let a = 0.5 - m;
    let v = gauss_2f1_at_one(a.into(), a.into(), 1.0.into()).unwrap().re;
    let oracle = statrs::function::gamma::gamma(2.0) / statrs::function::gamma::gamma(1.5).powi(2);
    assert!((v - oracle).abs() < 1e-13);
    assert!((v - 4.0 / PI).abs() < 1e-13);
    // truncated series close to the endpoint approaches the Gauss value
    let near = gauss_2f1(&HypParams::real(a, a, 1.0, 0.9999), TOL).unwrap().re;
    assert!((near - v).abs() < 1e-3);
    // own gamma against statrs on a spread of real arguments
    for &x in &[0.1, 0.7, 1.3, 2.5, 4.2, -0.3, -1.7] {
        let g = statrs::function::gamma::gamma(x);
        assert!((gamma_real(x) - g).abs() < 1e-13 * g.abs(), "x = {x}");
    }
}

#[test]
fn connection_matches_brute_series_for_complex_parameters() {
    let cases = [
        (cplx(0.5, 0.66), cplx(0.5, 0.66), cplx(1.0, 0.0)),
        (cplx(-0.5, 1.32), cplx(0.5, 1.32), cplx(1.0, 0.0)),
        (cplx(0.5, -1.0), cplx(0.5, -1.0), cplx(1.0, 0.0)),
        (cplx(-0.618, 0.0), cplx(-0.618, 0.0), cplx(1.0, 0.0)),
        (cplx(-0.5, 0.0), cplx(-0.5, 0.0), cplx(1.0, 0.0)),
        (cplx(-1.5, 0.0), cplx(-0.5, 0.0), cplx(1.0, 0.0)),
        (cplx(0.5, 0.0), cplx(0.5, 0.0), cplx(1.0, 0.0)),
        (cplx(-0.5, 0.0), cplx(0.5, 0.0), cplx(1.0, 0.0)),
    ];
    for (a, b, c) in cases {
        for &z in &[0.75, 0.85, 0.9] {
            let oracle = brute_series(a, b, c, z, 4000);
            let v = gauss_2f1(&HypParams::new(a, b, c, z), TOL).unwrap();
            assert!(
                (v - oracle).norm() < 1e-11 * (1.0 + oracle.norm()),
                "a={a} b={b} z={z}: {v} vs {oracle}"
            );
        }
    }
}

#[test]
fn branches_agree_on_overlap_band() {
    let params = [
        (cplx(0.5, 0.0), cplx(0.5, 0.0)),
        (cplx(-0.618, 0.0), cplx(-0.618, 0.0)),
        (cplx(0.5, 0.66), cplx(0.5, 0.66)),
        (cplx(-0.5, 1.32), cplx(0.5, 1.32)),
        (cplx(-1.5, 0.0), cplx(-0.5, 0.0)),
    ];
    let one = cplx(1.0, 0.0);
    for (a, b) in params {
        for i in 0..=10 {
            let z = Z_SWITCH - 0.05 + 0.01 * i as f64;
            let direct = brute_series(a, b, one, z, 3000);
            let v = gauss_2f1(&HypParams::new(a, b, one, z), TOL).unwrap();
            assert!((v - direct).norm() <= 10.0 * TOL * (1.0 + v.norm()), "a={a} z={z}");
        }
    }
}

#[test]
fn diff_matches_independent_values() {
    let p1 = HypParams::real(0.5, 0.5, 1.0, 0.3);
    let p2 = HypParams::real(-1.0, -1.0, 1.0, 0.3);
    let oracle = 2.0 / PI * elliptic_k_quadrature(0.3) - 1.3;
    let d = gauss_2f1_diff(&p1, &p2, TOL).unwrap();
    assert!((d.re - oracle).abs() < 1e-12);
}

#[test]
fn diff_leading_coefficient_high_precision_check() {
    // Second-order expansion: F1 − F2 = (a1b1 − a2b2) w + ((a1)_2(b1)_2 − (a2)_2(b2)_2)/4 w² + …
    let m = 1.0;
    let (a1, b1, a2, b2) = (0.5 - m, 0.5 - m, -0.5 - m, 0.5 - m);
    let w = 1e-8;
    let c1 = a1 * b1 - a2 * b2;
    let c2 = (a1 * (a1 + 1.0) * b1 * (b1 + 1.0) - a2 * (a2 + 1.0) * b2 * (b2 + 1.0)) / 4.0;
    let oracle = c1 * w + c2 * w * w;
    let d = gauss_2f1_diff(&HypParams::real(a1, b1, 1.0, w), &HypParams::real(a2, b2, 1.0, w), TOL)
        .unwrap()
        .re;
    assert!((d - oracle).abs() < 1e-22, "{d} vs {oracle}");
    assert!((d + 0.5e-8).abs() < 1e-15);
}

proptest! {
    #[test]
    fn conjugation_symmetry(re_a in -1.5f64..1.5, im_a in -2.0f64..2.0, re_b in -1.5f64..1.5, im_b in -2.0f64..2.0, z in 0.0f64..0.97) {
        let p = HypParams::new(cplx(re_a, im_a), cplx(re_b, im_b), cplx(1.0, 0.0), z);
        let q = HypParams::new(p.a.conj(), p.b.conj(), p.c, z);
        let f = gauss_2f1(&p, TOL).unwrap();
        let g = gauss_2f1(&q, TOL).unwrap();
        prop_assert!((f.conj() - g).norm() <= 10.0 * TOL * (1.0 + f.norm()));
    }

    #[test]
    fn real_parameters_give_real_monotone_values(a in 0.05f64..2.0, b in 0.05f64..2.0, z in 0.0f64..0.95, dz in 0.0f64..0.04) {
        let f1 = gauss_2f1(&HypParams::real(a, b, 1.0, z), TOL).unwrap();
        let f2 = gauss_2f1(&HypParams::real(a, b, 1.0, z + dz), TOL).unwrap();
        prop_assert!(f1.im.abs() < 1e-12 * (1.0 + f1.re.abs()));
        prop_assert!(f2.re >= f1.re * (1.0 - 1e-12));
    }

    #[test]
    fn diff_agrees_with_naive_difference_when_well_conditioned(
        m1 in -1.2f64..1.2, m2 in -1.2f64..1.2, z in 0.05f64..0.95
    ) {
        let p1 = HypParams::real(0.5 - m1, 0.5 - m1, 1.0, z);
        let p2 = HypParams::real(-0.5 - m2, 0.5 - m2, 1.0, z);
        let (f1, f2) = (gauss_2f1(&p1, TOL).unwrap(), gauss_2f1(&p2, TOL).unwrap());
        let naive = f1 - f2;
        prop_assume!(naive.norm() > 1e-3);
        let d = gauss_2f1_diff(&p1, &p2, TOL).unwrap();
        prop_assert!((d - naive).norm() <= 10.0 * TOL * (1.0 + f1.norm() + f2.norm()));
    }

    #[test]
    fn terminating_cases_are_polynomials(k in 0u32..6, z in 0.0f64..0.999) {
        let a = -(k as f64);
        let v = gauss_2f1(&HypParams::real(a, a, 1.0, z), TOL).unwrap().re;
        // F(−k, −k; 1; z) = Σ C(k, j)² z^j
        let mut binom = 1.0;
        let mut poly = 0.0;
        for j in 0..=k {
            poly += binom * binom * z.powi(j as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        prop_assert!((v - poly).abs() <= 4.0 * f64::EPSILON * poly * (k as f64 + 1.0));
    }
}
