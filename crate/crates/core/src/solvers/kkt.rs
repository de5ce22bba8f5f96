//! Independent first-order optimality checks.
//!
//! These recompute residuals and gradients from scratch and share no state
//! with the solvers, so they can certify a returned solution.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::Dataset;
use crate::error::{Error, Result};
use crate::model::GroupStructure;
use crate::Scalar;

fn subgradient_violation<T: Scalar>(grad: T, weight: T, coef: T) -> T {
    if coef == T::zero() {
        (grad.abs() - weight).max(T::zero())
    } else {
        (grad + weight * coef.signum()).abs()
    }
}

/// Worst KKT violation of `(v/2)‖y − Xβ‖² + Σ w_j|β_j|`.
pub fn lasso_linear<T: Scalar>(
    data: &Dataset<T>,
    w: ArrayView1<'_, T>,
    v: T,
    beta: ArrayView1<'_, T>,
) -> T {
    let (n, p) = data.x().dim();
    let mut worst = T::zero();
    for j in 0..p {
        // ∂/∂β_j of the smooth part: −v Σ_i x_ij (y_i − x_iᵀβ)
        let mut g = T::zero();
        for i in 0..n {
            let mut fit = T::zero();
            for k in 0..p {
                fit += data.x()[[i, k]] * beta[k];
            }
            g -= data.x()[[i, j]] * (data.y()[i] - fit);
        }
        worst = worst.max(subgradient_violation(v * g, w[j], beta[j]));
    }
    worst
}

/// Worst block-KKT violation of `(v/2)‖y − Xβ‖² + Σ w_i‖β_{G_i}‖₂`.
pub fn group_linear<T: Scalar>(
    data: &Dataset<T>,
    groups: &GroupStructure,
    w: ArrayView1<'_, T>,
    v: T,
    beta: ArrayView1<'_, T>,
) -> T {
    let resid: Array1<T> = data.y() - &data.x().dot(&beta);
    let grad: Array1<T> = data.x().t().dot(&resid) * (-v);
    let mut worst = T::zero();
    for g in 0..groups.num_groups() {
        let idx = groups.members(g);
        let norm = idx.iter().map(|&j| beta[j] * beta[j]).sum::<T>().sqrt();
        let viol = if norm == T::zero() {
            (idx.iter().map(|&j| grad[j] * grad[j]).sum::<T>().sqrt() - w[g]).max(T::zero())
        } else {
            idx.iter()
                .map(|&j| {
                    let d = grad[j] + w[g] * beta[j] / norm;
                    d * d
                })
                .sum::<T>()
                .sqrt()
        };
        worst = worst.max(viol);
    }
    worst
}

fn logistic_grad<T: Scalar>(data: &Dataset<T>, jeffreys: bool, beta: ArrayView1<'_, T>) -> Result<Array1<T>> {
    let (n, p) = data.x().dim();
    let mut grad = Array1::<T>::zeros(p);
    let mut probs = Vec::with_capacity(n);
    for i in 0..n {
        let row = data.x().row(i);
        let eta = row.dot(&beta);
        // d/dη log(1 + e^{−yη}) = −y / (1 + e^{yη})
        let yi = data.y()[i];
        let d = -yi / (T::one() + (yi * eta).exp());
        grad.scaled_add(d, &row);
        probs.push((T::one() / (T::one() + (-eta).exp()), T::one() / (T::one() + eta.exp())));
    }
    if jeffreys {
        let mut m = Array2::<T>::zeros((p, p));
        for i in 0..n {
            let row = data.x().row(i);
            let v = probs[i].0 * probs[i].1;
            for a in 0..p {
                for b in 0..p {
                    m[[a, b]] += v * row[a] * row[b];
                }
            }
        }
        let minv = crate::linalg::inverse_spd(m.view()).map_err(|_| Error::RankDeficient)?;
        for i in 0..n {
            let row = data.x().row(i);
            let h = row.dot(&minv.dot(&row));
            let v = probs[i].0 * probs[i].1;
            let dv = v * (probs[i].1 - probs[i].0);
            grad.scaled_add(T::lit(0.5) * h * dv, &row);
        }
    }
    Ok(grad)
}

/// Worst KKT violation of the ℓ1-penalized logistic objective.
pub fn logistic<T: Scalar>(
    data: &Dataset<T>,
    w: ArrayView1<'_, T>,
    jeffreys: bool,
    beta: ArrayView1<'_, T>,
) -> Result<T> {
    let grad = logistic_grad(data, jeffreys, beta)?;
    Ok((0..beta.len())
        .map(|j| subgradient_violation(grad[j], w[j], beta[j]))
        .fold(T::zero(), T::max))
}

/// Worst KKT violation of `c log|Ω| − (n/2)tr(SΩ) − Σ_{i≤j} W_ij|Ω_ij|`,
/// measured after dividing through by `c` (the scale the solver works in).
pub fn glasso<T: Scalar>(
    s: ArrayView2<'_, T>,
    n: usize,
    w: ArrayView2<'_, T>,
    omega: ArrayView2<'_, T>,
) -> Result<T> {
    let p = s.nrows();
    if n <= p + 1 {
        return Err(Error::Infeasible(format!("need n > p + 1 (n = {n}, p = {p})")));
    }
    let c = T::from_usize_lossy(n - p - 1) * T::lit(0.5);
    let half_n = T::from_usize_lossy(n) * T::lit(0.5);
    let sigma = crate::linalg::inverse_spd(omega)
        .map_err(|_| Error::Domain("precision matrix is not positive definite".into()))?;
    let mut worst = T::zero();
    for i in 0..p {
        for j in i..p {
            // gradient with respect to the free parameter Ω_ij (= Ω_ji)
            let mult = if i == j { T::one() } else { T::lit(2.0) };
            let g = mult * (c * sigma[[i, j]] - half_n * s[[i, j]]);
            let viol = subgradient_violation(-g, w[[i, j]], omega[[i, j]]);
            worst = worst.max(viol / (mult * c));
        }
    }
    Ok(worst)
}
