#![allow(dead_code)]

use hiersparse_core::em::FitProblem;
use hiersparse_core::model::{GroupStructure, NoiseModel, PriorSpec};
use hiersparse_core::sim::{gen_correlated_design, gen_gaussian_samples, gen_linear_responses, gen_logistic_responses};
use hiersparse_core::solvers::Dataset;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Sparse coefficients: roughly half the entries nonzero with magnitude in [0.5, 3].
pub fn sparse_beta(p: usize, rng: &mut ChaCha20Rng) -> Array1<f64> {
    let mut beta = Array1::from_shape_fn(p, |_| {
        if rng.random::<f64>() < 0.5 {
            let m = rng.random_range(0.5..3.0);
            if rng.random::<bool>() { m } else { -m }
        } else {
            0.0
        }
    });
    if beta.iter().all(|&b| b == 0.0) {
        beta[0] = 1.5;
    }
    beta
}

pub fn linear_data(n: usize, p: usize, delta: f64, rng: &mut ChaCha20Rng) -> (Dataset<f64>, Array1<f64>) {
    let x = gen_correlated_design(n, p, 0.5, rng).unwrap();
    let beta = sparse_beta(p, rng);
    let y = gen_linear_responses(x.view(), beta.view(), delta, rng).unwrap();
    (Dataset::centered(x, y).unwrap(), beta)
}

pub fn logistic_data(n: usize, p: usize, rng: &mut ChaCha20Rng) -> (Dataset<f64>, Array1<f64>) {
    let x = gen_correlated_design(n, p, 0.3, rng).unwrap();
    let beta = sparse_beta(p, rng) * 0.7;
    let y = gen_logistic_responses(x.view(), beta.view(), rng).unwrap();
    (Dataset::logistic(x, y).unwrap(), beta)
}

pub fn random_hyper(p: usize, rng: &mut ChaCha20Rng) -> (Vec<f64>, Vec<f64>) {
    let a = (0..p).map(|_| rng.random_range(0.5..4.0)).collect();
    let b = (0..p).map(|_| rng.random_range(0.05..2.0)).collect();
    (a, b)
}

/// Random sparse symmetric diagonally dominant precision matrix.
pub fn random_precision(p: usize, rng: &mut ChaCha20Rng) -> Array2<f64> {
    let mut omega = Array2::<f64>::zeros((p, p));
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.random::<f64>() < 0.4 {
                let v = rng.random_range(-0.4..0.4);
                omega[[i, j]] = v;
                omega[[j, i]] = v;
            }
        }
    }
    for i in 0..p {
        let off: f64 = (0..p).filter(|&j| j != i).map(|j| omega[[i, j]].abs()).sum();
        omega[[i, i]] = off + rng.random_range(0.5..1.5);
    }
    omega
}

/// One random problem of every model class, selected by `kind` in 0..6.
pub fn random_problem(kind: usize, seed: u64) -> FitProblem<f64> {
    let mut r = rng(seed);
    match kind {
        0 | 1 => {
            let n = r.random_range(15..40);
            let p = r.random_range(2..9);
            let delta = r.random_range(0.3..2.0);
            let (data, _) = linear_data(n, p, delta, &mut r);
            let (a, b) = random_hyper(p, &mut r);
            let q = if r.random::<f64>() < 0.8 { 1.0 } else { 2.0 };
            let prior = PriorSpec::per_coordinate(a, b, q).unwrap();
            let noise = if kind == 0 {
                NoiseModel::fixed(delta * delta).unwrap()
            } else {
                NoiseModel::inverse_gamma(r.random_range(0.5..4.0), r.random_range(0.5..5.0)).unwrap()
            };
            FitProblem::linear(data, prior, noise).unwrap()
        }
        2 => {
            let n = r.random_range(40..80);
            let p = r.random_range(2..6);
            let (data, _) = logistic_data(n, p, &mut r);
            let (a, b) = random_hyper(p, &mut r);
            let jeffreys = r.random::<bool>();
            FitProblem::logistic(data, PriorSpec::per_coordinate(a, b, 1.0).unwrap(), jeffreys).unwrap()
        }
        3 | 4 => {
            let size = r.random_range(1..4);
            let k = r.random_range(2..5);
            let p = size * k;
            let n = r.random_range(p + 5..p + 30);
            let delta = r.random_range(0.3..2.0);
            let (data, _) = linear_data(n, p, delta, &mut r);
            let groups = GroupStructure::contiguous(p, size).unwrap();
            let (a, b) = random_hyper(k, &mut r);
            let noise = NoiseModel::fixed(delta * delta).unwrap();
            if kind == 3 {
                FitProblem::group_linear(data, PriorSpec::grouped(a, b, groups).unwrap(), noise).unwrap()
            } else {
                let q = if r.random::<bool>() { 1.0 } else { 2.0 };
                FitProblem::shared_linear(data, PriorSpec::shared_groups(a, b, q, groups).unwrap(), noise).unwrap()
            }
        }
        _ => {
            let p = r.random_range(2..6);
            let n = r.random_range(p + 5..p + 40);
            let omega = random_precision(p, &mut r);
            let (_, s) = gen_gaussian_samples(omega.view(), n, &mut r).unwrap();
            let a = r.random_range(0.5..3.0);
            let b = r.random_range(0.05..1.0);
            FitProblem::precision(s, n, PriorSpec::matrix_uniform(p, a, b).unwrap()).unwrap()
        }
    }
}

pub const MODEL_CLASSES: [&str; 6] = ["linear-fixed", "linear-random", "logistic", "group", "shared", "precision"];

/// Minimizer of `f` over a box by exhaustive grid search with successive
/// refinement: a full grid at the coarse spacing, then full grids of
/// shrinking spacing around the incumbent.
pub fn grid_minimize<F: Fn(&[f64]) -> f64>(f: F, lo: &[f64], hi: &[f64], points: usize, final_step: f64) -> Vec<f64> {
    let d = lo.len();
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    let mut best = lo.clone();
    let mut best_val = f64::INFINITY;
    loop {
        let steps: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / (points - 1) as f64).collect();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        loop {
            for k in 0..d {
                x[k] = lo[k] + steps[k] * idx[k] as f64;
            }
            let v = f(&x);
            if v < best_val {
                best_val = v;
                best.copy_from_slice(&x);
            }
            let mut k = 0;
            while k < d {
                idx[k] += 1;
                if idx[k] < points {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
        if steps.iter().all(|&s| s <= final_step) {
            return best;
        }
        for k in 0..d {
            lo[k] = best[k] - 2.0 * steps[k];
            hi[k] = best[k] + 2.0 * steps[k];
        }
    }
}
