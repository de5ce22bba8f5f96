use ndarray::{Array2, ArrayView2};

use super::prox::soft_threshold;
use super::SolverOptions;
use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::model::WeightSet;
use crate::Scalar;

/// Symmetric positive-definite precision matrix and solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionEstimate<T> {
    pub omega: Array2<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Stationarity residual of the rescaled problem at `omega`.
    pub residual: T,
}

/// `c log|Ω| − (n/2) tr(SΩ) − Σ_{i≤j} W_ij |Ω_ij|` with `c = (n − p − 1)/2`.
///
/// Returns a domain error when `Ω` is not positive definite.
pub fn glasso_objective<T: Scalar>(
    s: ArrayView2<'_, T>,
    n: usize,
    w: ArrayView2<'_, T>,
    omega: ArrayView2<'_, T>,
) -> Result<T> {
    let p = s.nrows();
    let c = log_det_coefficient::<T>(n, p)?;
    let logdet = linalg::log_det_spd(omega)
        .map_err(|_| Error::Domain("precision matrix is not positive definite".into()))?;
    let half_n = T::from_usize_lossy(n) * T::lit(0.5);
    let mut tr = T::zero();
    let mut pen = T::zero();
    for i in 0..p {
        for j in 0..p {
            tr += s[[i, j]] * omega[[j, i]];
        }
        for j in i..p {
            pen += w[[i, j]] * omega[[i, j]].abs();
        }
    }
    Ok(c * logdet - half_n * tr - pen)
}

fn log_det_coefficient<T: Scalar>(n: usize, p: usize) -> Result<T> {
    if n <= p + 1 {
        return Err(Error::Infeasible(format!(
            "need n > p + 1 for a concave objective (n = {n}, p = {p})"
        )));
    }
    Ok(T::from_usize_lossy(n - p - 1) * T::lit(0.5))
}

/// Rescaled inputs: effective covariance `n/(n−p−1)·S` and full-sum penalty
/// matrix `Λ` (`W_ii/c` on the diagonal, `W_ij/(2c)` off it).
pub(crate) fn rescale<T: Scalar>(
    s: ArrayView2<'_, T>,
    n: usize,
    w: ArrayView2<'_, T>,
) -> Result<(Array2<T>, Array2<T>)> {
    let p = s.nrows();
    let c = log_det_coefficient::<T>(n, p)?;
    let s_eff = s.mapv(|v| v * T::from_usize_lossy(n) / (T::lit(2.0) * c));
    let lambda = Array2::from_shape_fn((p, p), |(i, j)| {
        if i == j {
            w[[i, j]] / c
        } else {
            w[[i, j]] / (T::lit(2.0) * c)
        }
    });
    Ok((s_eff, lambda))
}

pub fn weighted_glasso<T: Scalar>(
    s: ArrayView2<'_, T>,
    n: usize,
    w: &WeightSet<T>,
    opts: &SolverOptions<T>,
) -> Result<PrecisionEstimate<T>> {
    weighted_glasso_from(s, n, w, opts)
}

/// Maximizes `c log|Ω| − (n/2) tr(SΩ) − Σ_{i≤j} W_ij |Ω_ij|`, `c = (n−p−1)/2`.
///
/// Dividing by `c` gives a standard weighted graphical lasso, solved by block
/// coordinate descent over columns of the covariance estimate, each column a
/// lasso solved by coordinate descent. Passing a larger `n` than the sample
/// size changes only the log-det coefficient.
pub fn weighted_glasso_from<T: Scalar>(
    s: ArrayView2<'_, T>,
    n: usize,
    w: &WeightSet<T>,
    opts: &SolverOptions<T>,
) -> Result<PrecisionEstimate<T>> {
    opts.validate()?;
    let p = s.nrows();
    check_len(p, s.ncols())?;
    let w = match w {
        WeightSet::Matrix(m) => {
            check_len(p, m.nrows())?;
            check_len(p, m.ncols())?;
            m
        }
        _ => return Err(Error::Config("expected matrix weights".into())),
    };
    if s.iter().chain(w.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite covariance or weights".into()));
    }
    if !linalg::is_symmetric(s, T::lit(1e-10)) || !linalg::is_symmetric(w.view(), T::lit(1e-10))
    {
        return Err(Error::Domain("covariance and weights must be symmetric".into()));
    }
    if w.iter().any(|v| *v < T::zero()) {
        return Err(Error::Domain("weights must be non-negative".into()));
    }
    let (s_eff, lambda) = rescale(s, n, w.view())?;
    if p == 1 {
        let d = s_eff[[0, 0]] + lambda[[0, 0]];
        if !(d > T::zero()) {
            return Err(Error::Domain("covariance estimate is singular".into()));
        }
        return Ok(PrecisionEstimate {
            omega: Array2::from_elem((1, 1), d.recip()),
            iterations: 0,
            converged: true,
            residual: T::zero(),
        });
    }

    let mut cov = s_eff.clone();
    for i in 0..p {
        cov[[i, i]] += lambda[[i, i]];
    }
    if linalg::cholesky(cov.view()).is_err() {
        return Err(Error::Domain(
            "covariance plus diagonal penalty is not positive definite".into(),
        ));
    }
    // coef[[k, j]]: regression coefficient of variable k in column j's lasso
    let mut coef = Array2::<T>::zeros((p, p));
    let inner_tol = opts.tol * T::lit(0.01);
    let mut residual = T::infinity();
    let mut last = None;

    for sweep in 1..=opts.max_iter {
        let mut max_change = T::zero();
        for j in 0..p {
            column_lasso(&cov, &s_eff, &lambda, &mut coef, j, inner_tol, opts.max_iter);
            for k in 0..p {
                if k == j {
                    continue;
                }
                let mut w12 = T::zero();
                for l in 0..p {
                    if l != j {
                        w12 += cov[[k, l]] * coef[[l, j]];
                    }
                }
                max_change = max_change.max((cov[[k, j]] - w12).abs());
                cov[[k, j]] = w12;
                cov[[j, k]] = w12;
            }
        }
        if max_change < opts.tol {
            let omega = precision_from(&cov, &coef)?;
            residual = stationarity(&s_eff, &lambda, &omega)?;
            if residual <= opts.tol {
                return Ok(PrecisionEstimate { omega, iterations: sweep, converged: true, residual });
            }
            last = Some(omega);
        }
    }
    let omega = match last {
        Some(o) => o,
        None => precision_from(&cov, &coef)?,
    };
    if residual.is_infinite() {
        residual = stationarity(&s_eff, &lambda, &omega)?;
    }
    Ok(PrecisionEstimate { omega, iterations: opts.max_iter, converged: false, residual })
}

fn column_lasso<T: Scalar>(
    cov: &Array2<T>,
    s_eff: &Array2<T>,
    lambda: &Array2<T>,
    coef: &mut Array2<T>,
    j: usize,
    tol: T,
    max_iter: usize,
) {
    let p = cov.nrows();
    for _ in 0..max_iter {
        let mut max_change = T::zero();
        for k in 0..p {
            if k == j {
                continue;
            }
            let mut partial = s_eff[[k, j]];
            for l in 0..p {
                if l != j && l != k {
                    partial -= cov[[k, l]] * coef[[l, j]];
                }
            }
            let new = soft_threshold(partial, lambda[[k, j]]) / cov[[k, k]];
            max_change = max_change.max((new - coef[[k, j]]).abs());
            coef[[k, j]] = new;
        }
        if max_change < tol {
            break;
        }
    }
}

fn precision_from<T: Scalar>(cov: &Array2<T>, coef: &Array2<T>) -> Result<Array2<T>> {
    let p = cov.nrows();
    let mut omega = Array2::<T>::zeros((p, p));
    for j in 0..p {
        let mut w12b = T::zero();
        for k in 0..p {
            if k != j {
                w12b += cov[[k, j]] * coef[[k, j]];
            }
        }
        let denom = cov[[j, j]] - w12b;
        if !(denom > T::zero()) {
            return Err(Error::Internal("lost positive definiteness".into()));
        }
        let ojj = denom.recip();
        omega[[j, j]] = ojj;
        for k in 0..p {
            if k != j {
                omega[[k, j]] = -coef[[k, j]] * ojj;
            }
        }
    }
    // exact zeros from either column regression are kept as zeros
    for i in 0..p {
        for j in (i + 1)..p {
            let (a, b) = (omega[[i, j]], omega[[j, i]]);
            let m = if a == T::zero() || b == T::zero() {
                T::zero()
            } else {
                (a + b) * T::lit(0.5)
            };
            omega[[i, j]] = m;
            omega[[j, i]] = m;
        }
    }
    if linalg::cholesky(omega.view()).is_err() {
        return Err(Error::Internal("lost positive definiteness".into()));
    }
    Ok(omega)
}

/// KKT residual of `log|Ω| − tr(S'Ω) − Σ_{ij} Λ_ij|Ω_ij|`.
fn stationarity<T: Scalar>(s_eff: &Array2<T>, lambda: &Array2<T>, omega: &Array2<T>) -> Result<T> {
    let sigma = linalg::inverse_spd(omega.view())
        .map_err(|_| Error::Internal("lost positive definiteness".into()))?;
    let p = omega.nrows();
    let mut worst = T::zero();
    for i in 0..p {
        for j in 0..p {
            let g = sigma[[i, j]] - s_eff[[i, j]];
            let viol = if omega[[i, j]] == T::zero() {
                (g.abs() - lambda[[i, j]]).max(T::zero())
            } else {
                (g - lambda[[i, j]] * omega[[i, j]].signum()).abs()
            };
            worst = worst.max(viol);
        }
    }
    Ok(worst)
}
