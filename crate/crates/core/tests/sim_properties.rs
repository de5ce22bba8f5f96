use hiersparse_core::em::fit_map;
use hiersparse_core::em::FitProblem;
use hiersparse_core::linalg;
use hiersparse_core::model::{NoiseModel, PriorSpec};
use hiersparse_core::sim::{
    gen_correlated_design, gen_gaussian_samples, gen_linear_responses, gen_logistic_responses, paper_precision_truth,
    penalty_contour, preset, rep_stream, run_replications, run_replications_serial, support_metrics, threshold_curve,
    CurvePrior, ExperimentConfig, Method, PAPER_BETA,
};
use hiersparse_core::solvers::{soft_threshold, Dataset, SolverOptions};
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;

fn row(name: &str, index: usize, reps: usize, seed: u64) -> ExperimentConfig {
    preset(name, Some(reps), seed).unwrap().swap_remove(index)
}

#[test]
fn single_column_design_has_unit_variance() {
    let x: Array2<f64> = gen_correlated_design(100_000, 1, 0.5, &mut rep_stream(1, 1)).unwrap();
    let col = x.column(0);
    let var = col.dot(&col) / col.len() as f64;
    assert!((var - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn adjacent_columns_have_the_requested_correlation() {
    let n = 100_000;
    let x: Array2<f64> = gen_correlated_design(n, 8, 0.5, &mut rep_stream(2, 1)).unwrap();
    for j in 0..7 {
        let (u, v) = (x.column(j), x.column(j + 1));
        let corr = u.dot(&v) / (u.dot(&u) * v.dot(&v)).sqrt();
        assert!((corr - 0.5).abs() < 0.02, "columns {j},{}: {corr}", j + 1);
    }
    // and ρ² two apart
    let (u, v) = (x.column(0), x.column(2));
    let corr = u.dot(&v) / (u.dot(&u) * v.dot(&v)).sqrt();
    assert!((corr - 0.25).abs() < 0.02);
}

#[test]
fn strong_logistic_signal_gives_positive_labels() {
    let n = 100_000;
    let x = Array2::from_elem((n, 1), 1.0);
    let y = gen_logistic_responses(x.view(), array![10.0].view(), &mut rep_stream(3, 1)).unwrap();
    let rate = y.iter().filter(|&&v| v == 1.0).count() as f64 / n as f64;
    assert!(rate >= 0.999, "rate {rate}");
    assert!(y.iter().all(|&v| v == 1.0 || v == -1.0));
}

#[test]
fn identity_precision_samples_look_white() {
    let (_, s) = gen_gaussian_samples(Array2::<f64>::eye(5).view(), 10_000, &mut rep_stream(4, 1)).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((s[[i, j]] - want).abs() < 0.05, "S[{i},{j}] = {}", s[[i, j]]);
        }
    }
}

#[test]
fn sample_covariance_inverts_to_the_precision() {
    let omega = paper_precision_truth();
    let (_, s) = gen_gaussian_samples(omega.view(), 1_000_000, &mut rep_stream(5, 1)).unwrap();
    let inv = linalg::inverse_spd(s.view()).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            if omega[[i, j]].abs() >= 0.2 {
                let rel = (inv[[i, j]] - omega[[i, j]]).abs() / omega[[i, j]].abs();
                assert!(rel < 0.05, "({i},{j}): {} vs {}", inv[[i, j]], omega[[i, j]]);
            }
        }
    }
}

#[test]
fn generators_are_deterministic_per_stream() {
    let draw = |seed, rep| {
        let mut r = rep_stream(seed, rep);
        let x: Array2<f64> = gen_correlated_design(30, 4, 0.5, &mut r).unwrap();
        let y = gen_linear_responses(x.view(), array![1.0, 0.0, -2.0, 0.5].view(), 1.0, &mut r).unwrap();
        (x, y)
    };
    assert_eq!(draw(9, 2), draw(9, 2));
    assert_ne!(draw(9, 2), draw(9, 3));
    assert_ne!(draw(9, 2), draw(10, 2));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 30, ..ProptestConfig::default() })]

    #[test]
    fn zero_noise_responses_are_exactly_linear(seed in any::<u64>(), n in 1usize..30, p in 1usize..6) {
        let mut r = rep_stream(seed, 1);
        let x: Array2<f64> = gen_correlated_design(n, p, 0.3, &mut r).unwrap();
        let beta = Array1::from_shape_fn(p, |j| j as f64 - 1.5);
        let y = gen_linear_responses(x.view(), beta.view(), 0.0, &mut r).unwrap();
        prop_assert_eq!(y, x.dot(&beta));
    }
}

#[test]
fn parallel_and_serial_runs_agree() {
    for (name, index) in [("hal-linear-delta1", 0), ("lasso-logistic", 0), ("hal-ggm", 1), ("ghal-delta3", 0)] {
        let cfg = row(name, index, 12, 21);
        let par = run_replications(&cfg).unwrap();
        let ser = run_replications_serial(&cfg).unwrap();
        assert_eq!(par, ser, "{name}");
    }
}

#[test]
fn fewer_replications_are_a_prefix() {
    let long = run_replications(&row("hal-linear-delta3", 1, 60, 4)).unwrap();
    let short = run_replications(&row("hal-linear-delta3", 1, 25, 4)).unwrap();
    assert_eq!(short.outcomes[..], long.outcomes[..25]);
}

#[test]
fn summary_metrics_are_in_range() {
    for name in ["lasso-linear-delta1", "hal-linear-random-noise", "group-lasso-delta3", "hal-logistic", "lasso-ggm"] {
        for cfg in preset(name, Some(15), 8).unwrap() {
            let s = run_replications(&cfg).unwrap();
            let (zeros, nonzeros) = match &cfg.omega {
                Some(o) => {
                    let p = o.len();
                    let off: Vec<f64> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).map(|(i, j)| o[i][j]).collect();
                    (off.iter().filter(|&&v| v == 0.0).count(), off.iter().filter(|&&v| v != 0.0).count())
                }
                None => {
                    let b = cfg.beta.as_ref().unwrap();
                    (b.iter().filter(|&&v| v == 0.0).count(), b.iter().filter(|&&v| v != 0.0).count())
                }
            };
            assert_eq!(s.reps, 15);
            assert!((0.0..=100.0).contains(&s.pct_correct));
            assert!(s.avg_error >= 0.0 && s.avg_error.is_finite());
            assert!(s.avg_false_positives >= 0.0 && s.avg_false_positives <= zeros as f64);
            assert!(s.avg_false_negatives >= 0.0 && s.avg_false_negatives <= nonzeros as f64);
            assert!(s.nonconverged <= s.reps);
            for o in &s.outcomes {
                assert_eq!(o.correct, o.false_positives == 0 && o.false_negatives == 0);
            }
            let correct = s.outcomes.iter().filter(|o| o.correct).count() as f64;
            assert!((s.pct_correct - 100.0 * correct / 15.0).abs() < 1e-12);
        }
    }
}

#[test]
fn one_replication_matches_a_hand_run_fit() {
    // the zero-initialized setting, rebuilt by hand from the replication stream
    let mut cfg = row("hal-linear-delta1", 1, 1, 31);
    cfg.init = Default::default();
    let s = run_replications(&cfg).unwrap();

    let mut r = rep_stream(31, 1);
    let x = gen_correlated_design(40, 8, 0.5, &mut r).unwrap();
    let beta = Array1::from(PAPER_BETA.to_vec());
    let y = gen_linear_responses(x.view(), beta.view(), 1.0, &mut r).unwrap();
    let prior = PriorSpec::per_coordinate(vec![2.0; 8], vec![0.1; 8], 1.0).unwrap();
    let problem = FitProblem::linear(Dataset::centered(x, y).unwrap(), prior, NoiseModel::fixed(1.0).unwrap()).unwrap();
    let fit = fit_map(&problem, &SolverOptions::default(), None).unwrap();
    let score = support_metrics(fit.estimate.coefficients().unwrap().view(), beta.view()).unwrap();
    let o = s.outcomes[0];
    assert_eq!(o.error, score.error);
    assert_eq!((o.false_positives, o.false_negatives), (score.false_positives, score.false_negatives));
    assert_eq!(s.avg_error, score.error);
}

#[test]
fn hierarchical_with_huge_scale_reproduces_the_lasso_baseline() {
    let tau = 0.1;
    let b = 1e9;
    let lasso = row("lasso-linear-delta1", 1, 10, 17);
    assert!(matches!(lasso.method, Method::Lasso { tau: t, .. } if t == tau));
    let mut hier = lasso.clone();
    hier.method = Method::Hierarchical { a: b / tau - 1.0, b, q: 1.0, overrides: Default::default(), schedule: None };
    let (l, h) = (run_replications(&lasso).unwrap(), run_replications(&hier).unwrap());
    assert!((l.avg_error - h.avg_error).abs() < 1e-6, "{} vs {}", l.avg_error, h.avg_error);
    assert_eq!(l.pct_correct, h.pct_correct);
    assert_eq!(l.avg_false_positives, h.avg_false_positives);
    assert_eq!(l.avg_false_negatives, h.avg_false_negatives);
}

#[test]
fn lasso_threshold_is_the_soft_threshold() {
    let z: Vec<f64> = (0..=400).map(|k| -10.0 + 0.05 * k as f64).collect();
    for w in [0.0, 0.3, 1.0, 4.5] {
        for (zi, b) in threshold_curve(&CurvePrior::Lasso { weight: w }, &z).unwrap() {
            assert!((b - soft_threshold(zi, w)).abs() <= 1e-10);
        }
    }
}

#[test]
fn hal_threshold_is_stationary_and_its_bias_vanishes() {
    for (a, b) in [(1.0, 0.1), (2.0, 0.5), (3.0, 2.0)] {
        let z: Vec<f64> = (0..=300).map(|k| -15.0 + 0.1 * k as f64).chain([40.0, 100.0]).collect();
        let curve = threshold_curve(&CurvePrior::Hal { a, b }, &z).unwrap();
        for &(zi, bh) in &curve {
            assert!(bh == 0.0 || bh.signum() == zi.signum());
            assert!(bh.abs() <= zi.abs());
            if bh != 0.0 {
                let bias = zi.abs() - bh.abs();
                let r = bias - (a + 1.0) / (b + bh.abs());
                assert!(r.abs() < 1e-6, "({a},{b}) z = {zi}: residual {r}");
                // the shrinkage never exceeds the lasso's at the zero weight
                assert!(bias <= (a + 1.0) / b + 1e-12);
            }
        }
        let (zi, bh) = *curve.last().unwrap();
        assert!(zi - bh < (a + 1.0) / (zi - (a + 1.0) / b), "bias at z = {zi}: {}", zi - bh);
    }
}

#[test]
fn contour_values() {
    for (a, b) in [(1.0, 0.1), (2.0, 0.5)] {
        let prior = CurvePrior::Hal { a, b };
        let origin = penalty_contour(&prior, &[0.0], &[0.0]).unwrap()[0].2;
        assert!((origin + 2.0 * (a / (2.0 * b)).ln()).abs() < 1e-12);
        let grid = [-2.0, -0.3, 0.0, 0.7, 1.9];
        let at = |x: f64, y: f64| penalty_contour(&prior, &[x], &[y]).unwrap()[0].2;
        for &(x, y, f) in &penalty_contour(&prior, &grid, &grid).unwrap() {
            for (u, v) in [(-x, y), (x, -y), (y, x)] {
                assert!((at(u, v) - f).abs() < 1e-12);
            }
        }
    }
    // the lasso contour rises with slope 1/τ along either axis
    let tau = 0.25;
    let prior = CurvePrior::Lasso { weight: 1.0 / tau };
    let line = penalty_contour(&prior, &[0.0, 0.5, 1.0, 1.5], &[0.0]).unwrap();
    for pair in line.windows(2) {
        let slope = (pair[1].2 - pair[0].2) / (pair[1].0 - pair[0].0);
        assert!((slope - 1.0 / tau).abs() < 1e-12);
    }
    let origin = line[0].2;
    assert!((origin + 2.0 * (1.0 / (2.0 * tau)).ln()).abs() < 1e-12);
}
