mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use pssmp::value::v_bm_closed_form;
use pssmp::{preset, Direction, LevyModel, PredictionProblem, ValueFunction};

fn vf(name: &str) -> ValueFunction {
    ValueFunction::new(&preset(name).unwrap()).unwrap()
}

/// `V_k(0)` for bm-max and bessel3 at `K = c K*`, from an independent
/// scipy computation.
const BM_MAX_REFERENCE: [(f64, f64); 7] = [
    (0.7, -0.085624),
    (0.8, -0.114650),
    (0.9, -0.130293),
    (1.0, -0.134978),
    (1.1, -0.131057),
    (1.2, -0.120738),
    (1.3, -0.106042),
];
const BESSEL3_SWEEP_REFERENCE: [(f64, f64); 7] = [
    (2.0, -0.16667),
    (2.2, -0.18783),
    (2.4, -0.20103),
    (2.6, -0.20598),
    (2.8, -0.2025),
    (3.0, -0.19048),
    (3.2, -0.16982),
];

#[test]
fn reference_values() {
    let v = vf("bm-max");
    let big = v.solution().big_k;
    for (c, want) in BM_MAX_REFERENCE {
        let got = v.v_k_1d(-(c * big).ln(), 0.0).unwrap();
        assert!((got - want).abs() < 5e-6, "c {c}: {got} vs {want}");
    }
    let v = vf("bessel3");
    for (big, want) in BESSEL3_SWEEP_REFERENCE {
        let got = v.v_k_1d(f64::ln(big), 0.0).unwrap();
        assert!((got - want).abs() < 5e-5, "K {big}: {got} vs {want}");
    }
}

#[test]
fn stopping_boundary_is_zero() {
    let v = vf("bm-max");
    let big = v.solution().big_k;
    assert!(v.v_max(big * 2.0, 2.0).unwrap().abs() < 1e-14);
    assert_eq!(v.v_star_1d(v.k_star()).unwrap(), 0.0);
    assert_eq!(v.v_star_1d(v.k_star() * (1.0 + 1e-12)).unwrap(), 0.0);
    let p = preset("bm-max").unwrap();
    assert!(v_bm_closed_form(&p, big * 2.0, 2.0).unwrap().abs() < 1e-14);
    let v = vf("bessel3");
    let big = v.solution().big_k;
    assert!(v.v_min(big * 0.5, 0.5).unwrap().abs() < 1e-14);
}

#[test]
fn value_is_negative_before_stopping() {
    for name in ["bm-max", "bessel3", "bessel5", "cramer"] {
        let v = vf(name);
        let ks = v.k_star();
        for i in 0..50 {
            let y = ks * i as f64 / 50.0;
            assert!(v.v_star_1d(y).unwrap() <= 0.0, "{name} y {y}");
        }
        let k0 = v.solution().k0;
        assert!(v.v_star_1d(k0).unwrap() < 0.0);
        let mut prev = v.v_star_1d(k0).unwrap();
        for i in 1..=40 {
            let y = k0 + (ks - k0) * i as f64 / 40.0;
            let now = v.v_star_1d(y).unwrap();
            assert!(now >= prev - 1e-12, "{name}: not nondecreasing at {y}");
            prev = now;
        }
    }
    let p = preset("bm-max").unwrap();
    assert!(v_bm_closed_form(&p, 1.0, 1.0).unwrap() < 0.0);
    let p = preset("bessel3").unwrap();
    assert!(v_bm_closed_form(&p, 1.0, 1.0).unwrap() < 0.0);
}

#[test]
fn brownian_smooth_fit() {
    for name in ["bm-max", "bessel3", "bessel5"] {
        let v = vf(name);
        let ks = v.k_star();
        let h = 1e-7;
        let one_sided = (v.v_star_1d(ks).unwrap() - v.v_star_1d(ks - h).unwrap()) / h;
        assert!(one_sided.abs() < 1e-6, "{name}: {one_sided}");
        assert!(v.v_k_1d_derivative(ks, ks - 1e-9).unwrap().abs() < 1e-6);
    }
}

#[test]
fn cramer_continuous_fit() {
    let v = vf("cramer");
    let ks = v.k_star();
    assert!(v.v_star_1d(ks * (1.0 - 1e-12)).unwrap().abs() < 1e-8);
    let r = v.reduced();
    let integral = common::simpson(|z| r.f(z) * r.tilted_w_prime(z), 0.0, ks, 400_000);
    assert!((integral - r.w0()).abs() < 1e-8, "{integral} vs {}", r.w0());
}

#[test]
fn fixed_threshold_is_never_better() {
    let v = vf("bm-max");
    let k0 = v.solution().k0;
    let star = v.v_star_1d(0.0).unwrap();
    assert_relative_eq!(v.v_k_1d(v.k_star(), 0.0).unwrap(), star, max_relative = 1e-9);
    for k in [k0, 0.5 * v.k_star(), 1.5 * v.k_star()] {
        assert!(v.v_k_1d(k, 0.0).unwrap() >= star);
    }
}

#[test]
fn closed_form_matches_quadrature() {
    let v = vf("bm-max");
    let p = preset("bm-max").unwrap();
    assert_relative_eq!(
        v.v_max(1.0, 1.2).unwrap(),
        v_bm_closed_form(&p, 1.0, 1.2).unwrap(),
        max_relative = 1e-9
    );
    let v = vf("bessel3");
    let p = preset("bessel3").unwrap();
    assert_relative_eq!(
        v.v_min(1.0, 0.9).unwrap(),
        v_bm_closed_form(&p, 1.0, 0.9).unwrap(),
        max_relative = 1e-9
    );
    // logarithmic branch of the minimum
    let p = PredictionProblem::new(LevyModel::brownian(1.0, 0.5, 0.0).unwrap(), 1.0, Direction::Min).unwrap();
    let v = ValueFunction::new(&p).unwrap();
    for i in [1.0, 0.8, 0.5] {
        assert_relative_eq!(
            v.v_min(1.0, i).unwrap(),
            v_bm_closed_form(&p, 1.0, i).unwrap(),
            max_relative = 1e-9
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn homogeneity(p in common::admissible_problem(), x in 0.2f64..5.0, u in 0.0f64..1.0) {
        let v = ValueFunction::new(&p).unwrap();
        let y = u * v.k_star();
        let e = match p.direction { Direction::Max => x * y.exp(), Direction::Min => x * (-y).exp() };
        let base = match p.direction { Direction::Max => v.v_max(x, e), Direction::Min => v.v_min(x, e) }.unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled = match p.direction {
                Direction::Max => v.v_max(c * x, c * e),
                Direction::Min => v.v_min(c * x, c * e),
            }.unwrap();
            let want = c.powf(p.alpha) * base;
            prop_assert!((scaled - want).abs() <= 1e-10 * want.abs().max(1e-300), "{scaled} vs {want}");
        }
    }

    #[test]
    fn two_dimensional_form_is_the_one_dimensional_one(p in common::admissible_problem(), x in 0.2f64..5.0, u in 0.0f64..1.2) {
        let v = ValueFunction::new(&p).unwrap();
        let y = u * v.k_star();
        let (routed, direct) = match p.direction {
            Direction::Max => (v.v_max(x, x * y.exp()).unwrap(), v.v_max_direct(x, x * y.exp()).unwrap()),
            Direction::Min => (v.v_min(x, x * (-y).exp()).unwrap(), v.v_min_direct(x, x * (-y).exp()).unwrap()),
        };
        let one_d = x.powf(p.alpha) * v.v_star_1d(y).unwrap();
        prop_assert!((routed - one_d).abs() <= 1e-9 * one_d.abs().max(1e-12));
        prop_assert!((direct - routed).abs() <= 1e-9 * routed.abs().max(1e-9), "{direct} vs {routed}");
    }
}
