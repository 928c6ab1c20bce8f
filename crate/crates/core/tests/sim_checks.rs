use pssmp::sim::{
    lamperti_build, mc_vk, mc_vk_with, objective_estimate, path_rng, simulate_xi, sweep_k, Payoff, XiPath,
};
use pssmp::{preset, Direction, Error, LevyModel, PathConfig, PredictionProblem, ValueFunction};

fn config(n: usize, dt: f64, seed: u64) -> PathConfig {
    PathConfig {
        dt,
        n_paths: n,
        seed,
        ..PathConfig::default()
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn brownian_paths_have_the_right_drift() {
    let m = LevyModel::brownian(1.0, 1.0, 0.0).unwrap();
    let cfg = PathConfig {
        horizon: Some(2.0),
        ..config(10_000, 0.01, 1)
    };
    let ends: Vec<f64> = (0..10_000)
        .map(|i| {
            let p = simulate_xi(&m, &cfg, &mut path_rng(1, i));
            assert!(!p.is_killed());
            p.values.last().unwrap() / p.end_time()
        })
        .collect();
    let (mean, se) = mean_se(&ends);
    assert!((mean + 1.0).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn cramer_paths_have_the_right_mean() {
    let m = LevyModel::cramer_lundberg(2.0, 1.0, 1.0, 0.0).unwrap();
    let cfg = PathConfig {
        horizon: Some(1.0),
        ..config(10_000, 0.01, 2)
    };
    let ends: Vec<f64> = (0..10_000)
        .map(|i| *simulate_xi(&m, &cfg, &mut path_rng(2, i)).values.last().unwrap())
        .collect();
    let (mean, se) = mean_se(&ends);
    let want = m.exponent_derivative(0.0).unwrap();
    assert!((mean - want).abs() < 3.0 * se, "{mean} ± {se} vs {want}");
}

#[test]
fn drift_only_clock_matches_closed_form() {
    let (mu, alpha) = (1.0, 1.0);
    let times: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
    let values = times.iter().map(|t| -mu * t).collect();
    let p = XiPath::from_points(times.clone(), values).unwrap();
    let l = lamperti_build(&p, alpha, 1.0).unwrap();
    for (t, u) in times.iter().zip(&l.u) {
        let want = (1.0 - (-alpha * mu * t).exp()) / (alpha * mu);
        assert!((u - want).abs() < 1e-6);
    }
}

#[test]
fn reports_are_reproducible_and_thread_independent() {
    let p = preset("bm-max").unwrap();
    let grid = [0.35, 0.47, 0.6];
    let run = |threads| {
        let cfg = PathConfig {
            threads: Some(threads),
            ..config(1500, 1e-3, 42)
        };
        sweep_k(&p, &grid, &cfg).unwrap()
    };
    let a = run(1);
    let b = run(1);
    let c = run(2);
    assert_eq!(a, b);
    assert_eq!(a.rows, c.rows);
    assert_eq!(a.losses, c.losses);
}

#[test]
fn singleton_sweep_is_the_objective() {
    let p = preset("bessel3").unwrap();
    let cfg = config(1000, 1e-3, 5);
    let r = sweep_k(&p, &[2.6], &cfg).unwrap();
    let e = objective_estimate(&p, 2.6, &cfg).unwrap();
    assert_eq!(r.estimate(0), e);
}

#[test]
fn immediate_stopping_costs_nothing() {
    let p = preset("bm-max").unwrap();
    let e = objective_estimate(&p, 1.0, &config(2000, 1e-3, 3)).unwrap();
    assert_eq!(e.mean, 0.0);
}

#[test]
fn bessel3_sweep_is_minimised_near_the_threshold() {
    let p = preset("bessel3").unwrap();
    let grid: Vec<f64> = (0..7).map(|i| 2.0 + 0.2 * i as f64).collect();
    let r = sweep_k(&p, &grid, &config(20_000, 1e-3, 7)).unwrap();
    let best = grid[r.argmin()];
    assert!((2.4..=2.8).contains(&best), "argmin {best}");
    assert!(r.truncation_rate < 0.01);
    // decreasing up to the minimum and increasing after it, within 2 sigma
    let m = r.argmin();
    for i in 0..m {
        let c = r.contrast(i, i + 1);
        assert!(c.mean > -2.0 * c.stderr, "rows {i}, {}", i + 1);
    }
    for i in m..grid.len() - 1 {
        let c = r.contrast(i + 1, i);
        assert!(c.mean > -2.0 * c.stderr, "rows {}, {i}", i + 1);
    }
}

#[test]
fn killed_paths_cap_the_rules() {
    let p = preset("cramer").unwrap();
    let r = sweep_k(&p, &[0.2, 0.5], &config(4000, 1e-3, 9)).unwrap();
    assert!(r.capped > 0);
    assert!(r.truncation_rate < 0.01);
}

#[test]
fn gate_bypass_is_labelled() {
    let p = PredictionProblem::new(LevyModel::brownian(1.0, 1.0, 0.0).unwrap(), 2.5, Direction::Max).unwrap();
    let cfg = PathConfig {
        horizon: Some(20.0),
        ..config(500, 1e-2, 1)
    };
    assert!(matches!(sweep_k(&p, &[0.5], &cfg), Err(Error::Gate(_))));
    let open = PathConfig { ungated: true, ..cfg };
    let r = sweep_k(&p, &[0.5], &open).unwrap();
    assert!(!r.gated);
    assert_eq!(r.label.as_deref(), Some("ungated, biased"));
}

#[test]
fn reduced_estimate_matches_the_value_function() {
    let p = preset("bm-max").unwrap();
    let v = ValueFunction::new(&p).unwrap();
    let k = v.k_star();
    let mc = mc_vk(&p, k, 0.2, &config(20_000, 1e-3, 13)).unwrap();
    let want = v.v_star_1d(0.2).unwrap();
    assert!(want < 0.0);
    let e = mc.estimate;
    assert!((e.mean - want).abs() < 3.0 * e.stderr, "{} ± {} vs {want}", e.mean, e.stderr);
    assert_eq!(mc_vk(&p, k, k, &config(10, 1e-3, 1)).unwrap().estimate.mean, 0.0);
}

#[test]
fn constant_payoff_is_bounded_by_the_discount() {
    let p = preset("bm-max").unwrap();
    let r = mc_vk_with(&p, 0.8, 0.0, Payoff::Constant(1.0), &config(5000, 1e-3, 4)).unwrap();
    assert!(r.discount > 0.0);
    assert!(r.estimate.mean <= 1.0 / r.discount);
}

#[test]
fn reduced_estimate_is_stable_under_longer_horizons() {
    let p = preset("bm-max").unwrap();
    let short = config(5000, 1e-3, 21);
    let h = short.horizon_for(&p.model);
    let long = PathConfig {
        horizon: Some(2.0 * h),
        ..short
    };
    let a = mc_vk(&p, 0.75, 0.0, &short).unwrap();
    let b = mc_vk(&p, 0.75, 0.0, &long).unwrap();
    assert!(-a.discount < -0.1);
    assert!((a.estimate.mean - b.estimate.mean).abs() < a.estimate.stderr);
}

#[test]
fn extremum_time_is_stable_under_longer_horizons() {
    let p = preset("bm-max").unwrap();
    let short = PathConfig {
        resolve_theta: true,
        ..config(10_000, 1e-3, 8)
    };
    let h = short.horizon_for(&p.model);
    let long = PathConfig {
        horizon: Some(2.0 * h),
        ..short
    };
    let a = sweep_k(&p, &[0.47], &short).unwrap().theta.unwrap();
    let b = sweep_k(&p, &[0.47], &long).unwrap().theta.unwrap();
    assert!(a.mean.is_finite() && a.mean > 0.0);
    assert!((a.mean - b.mean).abs() < 2.0 * a.combined_stderr(&b), "{a:?} {b:?}");
}
