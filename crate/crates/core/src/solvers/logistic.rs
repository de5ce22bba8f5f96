use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::prox::soft_threshold;
use super::{Dataset, InnerSolution, SolverOptions};
use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::model::WeightSet;
use crate::Scalar;

// Iterates beyond this magnitude are treated as divergent (no finite optimum).
const DIVERGENCE_BOUND: f64 = 1e8;
// Cap on the trial step relative to `initial_step`.
const MAX_STEP_GROWTH: f64 = 1e6;

/// Penalty applied coordinate-wise in the logistic M-step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogisticPenalty {
    /// `Σ w_j |β_j|`
    L1,
    /// `Σ w_j β_j²`
    SquaredL2,
}

#[inline]
fn softplus<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Negative log-likelihood `Σ log(1 + exp(−y_i xᵢᵀβ))`.
pub fn logistic_nll<T: Scalar>(x: ArrayView2<'_, T>, y: ArrayView1<'_, T>, beta: ArrayView1<'_, T>) -> T {
    let eta = x.dot(&beta);
    eta.iter().zip(y.iter()).map(|(&e, &yi)| softplus(-yi * e)).sum()
}

pub fn logistic_nll_gradient<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    beta: ArrayView1<'_, T>,
) -> Array1<T> {
    let eta = x.dot(&beta);
    let coef = Array1::from_shape_fn(y.len(), |i| -y[i] * sigmoid(-y[i] * eta[i]));
    x.t().dot(&coef)
}

fn fisher_information<T: Scalar>(x: ArrayView2<'_, T>, eta: &Array1<T>) -> Array2<T> {
    let p = x.ncols();
    let mut m = Array2::<T>::zeros((p, p));
    for (i, row) in x.rows().into_iter().enumerate() {
        let vi = sigmoid(eta[i]) * sigmoid(-eta[i]);
        for a in 0..p {
            let ra = row[a] * vi;
            for b in a..p {
                m[[a, b]] += ra * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            m[[a, b]] = m[[b, a]];
        }
    }
    m
}

/// `½ log det(XᵀVX)` with `v_ii = e^{−ηᵢ}/(1 + e^{−ηᵢ})²`, `ηᵢ = xᵢᵀβ`.
pub fn logistic_jeffreys_logdet<T: Scalar>(x: ArrayView2<'_, T>, beta: ArrayView1<'_, T>) -> Result<T> {
    check_len(x.ncols(), beta.len())?;
    let eta = x.dot(&beta);
    let m = fisher_information(x, &eta);
    linalg::log_det_spd(m.view())
        .map(|ld| ld * T::lit(0.5))
        .map_err(|_| Error::RankDeficient)
}

/// Gradient of [`logistic_jeffreys_logdet`] with respect to `β`.
pub fn logistic_jeffreys_gradient<T: Scalar>(
    x: ArrayView2<'_, T>,
    beta: ArrayView1<'_, T>,
) -> Result<Array1<T>> {
    check_len(x.ncols(), beta.len())?;
    let eta = x.dot(&beta);
    let m = fisher_information(x, &eta);
    let l = linalg::cholesky(m.view()).map_err(|_| Error::RankDeficient)?;
    let half = T::lit(0.5);
    let mut coef = Array1::<T>::zeros(x.nrows());
    for (i, row) in x.rows().into_iter().enumerate() {
        // hᵢ = xᵢᵀ M⁻¹ xᵢ, dv/dη = v (1 − 2σ(η)) with 1 − σ(η) = σ(−η)
        let h = row.dot(&linalg::cholesky_solve(l.view(), row));
        let (s, sc) = (sigmoid(eta[i]), sigmoid(-eta[i]));
        coef[i] = half * h * s * sc * (sc - s);
    }
    Ok(x.t().dot(&coef))
}

fn smooth_value<T: Scalar>(data: &Dataset<T>, jeffreys: bool, beta: ArrayView1<'_, T>) -> T {
    let nll = logistic_nll(data.x().view(), data.y().view(), beta);
    if jeffreys {
        match logistic_jeffreys_logdet(data.x().view(), beta) {
            Ok(ld) => nll + ld,
            Err(_) => T::infinity(),
        }
    } else {
        nll
    }
}

fn smooth_gradient<T: Scalar>(
    data: &Dataset<T>,
    jeffreys: bool,
    beta: ArrayView1<'_, T>,
) -> Result<Array1<T>> {
    let g = logistic_nll_gradient(data.x().view(), data.y().view(), beta);
    if jeffreys {
        Ok(g + logistic_jeffreys_gradient(data.x().view(), beta)?)
    } else {
        Ok(g)
    }
}

fn penalty_value<T: Scalar>(kind: LogisticPenalty, w: &Array1<T>, beta: ArrayView1<'_, T>) -> T {
    match kind {
        LogisticPenalty::L1 => w.iter().zip(beta.iter()).map(|(w, b)| *w * b.abs()).sum(),
        LogisticPenalty::SquaredL2 => w.iter().zip(beta.iter()).map(|(w, b)| *w * *b * *b).sum(),
    }
}

/// Penalized logistic objective `Σ log(1 + e^{−yᵢxᵢᵀβ}) [+ ½ log|XᵀVX|] + penalty`.
pub fn logistic_objective<T: Scalar>(
    data: &Dataset<T>,
    w: ArrayView1<'_, T>,
    penalty: LogisticPenalty,
    jeffreys: bool,
    beta: ArrayView1<'_, T>,
) -> T {
    smooth_value(data, jeffreys, beta) + penalty_value(penalty, &w.to_owned(), beta)
}

pub fn weighted_l1_logistic<T: Scalar>(
    data: &Dataset<T>,
    w: &WeightSet<T>,
    jeffreys: bool,
    opts: &SolverOptions<T>,
) -> Result<InnerSolution<T>> {
    weighted_l1_logistic_from(data, w, jeffreys, opts, None)
}

pub fn weighted_l1_logistic_from<T: Scalar>(
    data: &Dataset<T>,
    w: &WeightSet<T>,
    jeffreys: bool,
    opts: &SolverOptions<T>,
    init: Option<ArrayView1<'_, T>>,
) -> Result<InnerSolution<T>> {
    weighted_logistic_from(data, w, LogisticPenalty::L1, jeffreys, opts, init)
}

/// Penalized logistic regression by proximal gradient with halving backtracking.
///
/// Without the Jeffreys term and with `w > 0` the problem is convex and the
/// result is its minimizer; with the Jeffreys term the smooth part is not
/// convex and the result is a stationary point. Each iteration starts its
/// line search one expansion above the previously accepted step (the first
/// from `opts.initial_step`). Stops when the last step moved no coordinate by
/// more than `tol` and the KKT residual is at most `tol`; if some weights are
/// zero and the likelihood has lost its curvature along those coordinates at
/// that point, the solve is reported as not converged.
pub fn weighted_logistic_from<T: Scalar>(
    data: &Dataset<T>,
    w: &WeightSet<T>,
    penalty: LogisticPenalty,
    jeffreys: bool,
    opts: &SolverOptions<T>,
    init: Option<ArrayView1<'_, T>>,
) -> Result<InnerSolution<T>> {
    opts.validate()?;
    let p = data.p();
    let w = match w {
        WeightSet::PerCoordinate(w) => {
            check_len(p, w.len())?;
            w.clone()
        }
        _ => return Err(Error::Config("expected per-coordinate weights".into())),
    };
    if w.iter().any(|x| !(*x >= T::zero()) || !x.is_finite()) {
        return Err(Error::Domain("weights must be finite and non-negative".into()));
    }
    let mut beta = match init {
        Some(b) => {
            check_len(p, b.len())?;
            b.to_owned()
        }
        None => Array1::zeros(p),
    };
    let prox = |z: &Array1<T>, t: T| -> Array1<T> {
        match penalty {
            LogisticPenalty::L1 => Array1::from_shape_fn(p, |j| soft_threshold(z[j], t * w[j])),
            LogisticPenalty::SquaredL2 => {
                Array1::from_shape_fn(p, |j| z[j] / (T::one() + T::lit(2.0) * t * w[j]))
            }
        }
    };

    let mut f = smooth_value(data, jeffreys, beta.view());
    if !f.is_finite() {
        return Err(Error::RankDeficient);
    }
    let mut trace = vec![f + penalty_value(penalty, &w, beta.view())];
    let mut t = opts.initial_step;
    let mut last_change = T::infinity();
    let mut residual = T::infinity();
    let bound = T::lit(DIVERGENCE_BOUND);

    for iter in 0..opts.max_iter {
        let grad = smooth_gradient(data, jeffreys, beta.view())?;
        residual = stationarity(penalty, &grad, &w, &beta);
        if last_change < opts.tol && residual <= opts.tol {
            let finite = !unpenalized_curvature_vanished(data.x().view(), &w, beta.view());
            return Ok(InnerSolution {
                coef: beta,
                iterations: iter,
                converged: finite,
                residual,
                objective_trace: trace,
            });
        }
        if iter > 0 {
            t = (t / opts.step_shrink).min(opts.initial_step * T::lit(MAX_STEP_GROWTH));
        }
        let ulp = T::epsilon() * f.abs().max(T::one());
        // below this predicted decrease, value comparisons are rounding noise
        let noise = T::lit(64.0) * ulp;
        let (next, f_next) = loop {
            let z = &beta - &(&grad * t);
            let cand = prox(&z, t);
            let d = &cand - &beta;
            let f_cand = smooth_value(data, jeffreys, cand.view());
            let model = f + grad.dot(&d) + d.dot(&d) / (T::lit(2.0) * t);
            if f_cand.is_finite() {
                if f_cand <= model + ulp {
                    break (cand, f_cand);
                }
                if f - model <= noise && f_cand <= f + noise {
                    // local Lipschitz test on the gradient instead
                    if let Ok(g_cand) = smooth_gradient(data, jeffreys, cand.view()) {
                        let dg = &g_cand - &grad;
                        if dg.dot(&dg).sqrt() * t <= d.dot(&d).sqrt() {
                            break (cand, f_cand);
                        }
                    }
                }
            }
            t *= opts.step_shrink;
            if t < T::min_positive_value().sqrt() {
                return Ok(InnerSolution {
                    coef: beta,
                    iterations: iter,
                    converged: false,
                    residual,
                    objective_trace: trace,
                });
            }
        };
        last_change = linalg::sup_norm_diff(next.view(), beta.view());
        beta = next;
        f = f_next;
        trace.push(f + penalty_value(penalty, &w, beta.view()));
        if beta.iter().any(|b| b.abs() > bound) {
            break;
        }
    }
    Ok(InnerSolution {
        coef: beta,
        iterations: opts.max_iter,
        converged: false,
        residual,
        objective_trace: trace,
    })
}

/// True when the log-likelihood is flat along the unpenalized coordinates at
/// `beta`, meaning the iterate is drifting toward an optimum at infinity
/// (separation) rather than sitting at a finite one.
fn unpenalized_curvature_vanished<T: Scalar>(x: ArrayView2<'_, T>, w: &Array1<T>, beta: ArrayView1<'_, T>) -> bool {
    let free: Vec<usize> = (0..w.len()).filter(|&j| w[j] == T::zero()).collect();
    if free.is_empty() {
        return false;
    }
    let eta = x.dot(&beta);
    let info = fisher_information(x, &eta);
    let block = Array2::from_shape_fn((free.len(), free.len()), |(a, b)| info[[free[a], free[b]]]);
    // V ≤ 1/4, so the block is bounded by a quarter of the Gram block.
    let scale = free.iter().map(|&j| x.column(j).dot(&x.column(j))).sum::<T>() * T::lit(0.25);
    linalg::min_eigenvalue(block.view()) <= T::epsilon().sqrt() * scale
}

fn stationarity<T: Scalar>(
    penalty: LogisticPenalty,
    grad: &Array1<T>,
    w: &Array1<T>,
    beta: &Array1<T>,
) -> T {
    let mut worst = T::zero();
    for j in 0..beta.len() {
        let viol = match penalty {
            LogisticPenalty::L1 if beta[j] == T::zero() => (grad[j].abs() - w[j]).max(T::zero()),
            LogisticPenalty::L1 => (grad[j] + w[j] * beta[j].signum()).abs(),
            LogisticPenalty::SquaredL2 => (grad[j] + T::lit(2.0) * w[j] * beta[j]).abs(),
        };
        worst = worst.max(viol);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn small() -> Dataset<f64> {
        let x = array![
            [1.0, 0.5],
            [-0.4, 1.2],
            [0.3, -0.8],
            [-1.1, -0.2],
            [0.7, 0.9],
            [-0.6, 0.4],
            [1.5, -0.3],
            [-0.2, -1.0]
        ];
        let y = array![1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        Dataset::logistic(x, y).unwrap()
    }

    #[test]
    fn large_weights_give_zero() {
        let d = small();
        let xty = d.x().t().dot(d.y());
        let cutoff = 0.5 * xty.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let w = WeightSet::PerCoordinate(array![cutoff, cutoff]);
        let s = weighted_l1_logistic(&d, &w, false, &SolverOptions::default()).unwrap();
        assert!(s.converged);
        assert!(s.coef.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn separable_data_without_penalty_does_not_converge() {
        let x = array![[1.0], [2.0], [-1.0], [-3.0]];
        let y = array![1.0, 1.0, -1.0, -1.0];
        let d = Dataset::logistic(x, y).unwrap();
        let w = WeightSet::PerCoordinate(array![0.0]);
        let s = weighted_l1_logistic(&d, &w, false, &SolverOptions::default()).unwrap();
        assert!(!s.converged);
        assert!(s.coef[0] > 3.0);
    }

    #[test]
    fn jeffreys_logdet_at_zero() {
        let x = array![[1.0, 0.2], [0.3, 1.0], [-0.5, 0.4]];
        let got = logistic_jeffreys_logdet(x.view(), array![0.0, 0.0].view()).unwrap();
        let xtx = x.t().dot(&x);
        let want = 0.5 * linalg::log_det_spd(xtx.view()).unwrap() - 4.0_f64.ln();
        assert!((got - want).abs() < 1e-12);

        let eye = Array2::<f64>::eye(3);
        let got = logistic_jeffreys_logdet(eye.view(), Array1::zeros(3).view()).unwrap();
        assert!((got + 3.0 * 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_information() {
        let x = array![[1.0, 2.0], [2.0, 4.0]];
        assert_eq!(
            logistic_jeffreys_logdet(x.view(), array![0.0, 0.0].view()),
            Err(Error::RankDeficient)
        );
    }

    #[test]
    fn objective_descends_with_jeffreys() {
        let d = small();
        let w = WeightSet::PerCoordinate(array![0.2, 0.2]);
        let s = weighted_l1_logistic(&d, &w, true, &SolverOptions::default()).unwrap();
        assert!(s.converged);
        for pair in s.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-10);
        }
    }

    #[test]
    fn squared_penalty_matches_stationarity() {
        let d = small();
        let w = array![0.3, 0.7];
        let s = weighted_logistic_from(
            &d,
            &WeightSet::PerCoordinate(w.clone()),
            LogisticPenalty::SquaredL2,
            false,
            &SolverOptions::default(),
            None,
        )
        .unwrap();
        let g = logistic_nll_gradient(d.x().view(), d.y().view(), s.coef.view());
        for j in 0..2 {
            assert!((g[j] + 2.0 * w[j] * s.coef[j]).abs() < 1e-7);
        }
    }
}
