use ndarray::{Array1, Array2, ArrayView1};

use super::{Dataset, InnerSolution, SolverOptions};
use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::model::{GroupStructure, WeightSet};
use crate::Scalar;

// Newton iterations for the block radius.
const RADIUS_MAX_ITER: usize = 200;

/// `(v/2)‖y − Xβ‖² + Σ_i w_i ‖β_{G_i}‖₂`.
pub fn group_linear_objective<T: Scalar>(
    data: &Dataset<T>,
    groups: &GroupStructure,
    w: ArrayView1<'_, T>,
    v: T,
    beta: ArrayView1<'_, T>,
) -> T {
    let r = data.y() - &data.x().dot(&beta);
    v * T::lit(0.5) * r.dot(&r) + penalty(groups, w, beta)
}

fn penalty<T: Scalar>(groups: &GroupStructure, w: ArrayView1<'_, T>, beta: ArrayView1<'_, T>) -> T {
    (0..groups.num_groups())
        .map(|g| w[g] * groups.members(g).iter().map(|&j| beta[j] * beta[j]).sum::<T>().sqrt())
        .sum()
}

pub fn weighted_group_linear<T: Scalar>(
    data: &Dataset<T>,
    groups: &GroupStructure,
    w: &WeightSet<T>,
    v: T,
    opts: &SolverOptions<T>,
) -> Result<InnerSolution<T>> {
    weighted_group_linear_from(data, groups, w, v, opts, None)
}

/// Weighted group lasso, `(v/2)‖y − Xβ‖² + Σ_i w_i ‖β_{G_i}‖₂`.
///
/// Block coordinate descent with exact block minimization: groups are
/// visited cyclically and each block subproblem is solved in the eigenbasis
/// of its Gram matrix, where the block solution is `(vG + λI)⁻¹c` with
/// `λ = w/‖β_G‖` and the radius comes from a monotone Newton iteration.
/// Each visit minimizes the objective over its block, so the objective never
/// increases.
pub fn weighted_group_linear_from<T: Scalar>(
    data: &Dataset<T>,
    groups: &GroupStructure,
    w: &WeightSet<T>,
    v: T,
    opts: &SolverOptions<T>,
    init: Option<ArrayView1<'_, T>>,
) -> Result<InnerSolution<T>> {
    opts.validate()?;
    let p = data.p();
    check_len(groups.num_coords(), p)?;
    let w = match w {
        WeightSet::PerGroup(w) => {
            check_len(groups.num_groups(), w.len())?;
            w.clone()
        }
        _ => return Err(Error::Config("expected per-group weights".into())),
    };
    if w.iter().any(|x| !(*x >= T::zero()) || !x.is_finite()) {
        return Err(Error::Domain("weights must be finite and non-negative".into()));
    }
    if !(v > T::zero()) || !v.is_finite() {
        return Err(Error::Domain(format!("likelihood weight v must be positive, got {v}")));
    }
    let x = data.x();
    let mut beta = match init {
        Some(b) => {
            check_len(p, b.len())?;
            b.to_owned()
        }
        None => Array1::zeros(p),
    };
    let blocks: Vec<Array2<T>> = (0..groups.num_groups())
        .map(|g| {
            let cols = groups.members(g);
            Array2::from_shape_fn((data.n(), cols.len()), |(i, k)| x[[i, cols[k]]])
        })
        .collect();
    let eigen: Vec<(Array1<T>, Array2<T>)> = blocks
        .iter()
        .map(|xg| {
            let (mu, q) = linalg::symmetric_eigen(xg.t().dot(xg).view());
            (mu.mapv(|m| (m * v).max(T::zero())), q)
        })
        .collect();
    let half = T::lit(0.5);
    let mut r = data.y() - &x.dot(&beta);
    let mut trace = vec![v * half * r.dot(&r) + penalty(groups, w.view(), beta.view())];
    let mut residual = T::infinity();

    for sweep in 1..=opts.max_iter {
        let mut max_change = T::zero();
        for (g, xg) in blocks.iter().enumerate() {
            let idx = groups.members(g);
            let bg = Array1::from_shape_fn(idx.len(), |k| beta[idx[k]]);
            // gradient of the block fit at zero, holding the other blocks fixed
            let c = (xg.t().dot(&r) + xg.t().dot(&xg.dot(&bg))) * v;
            let new = block_minimizer(&eigen[g].0, &eigen[g].1, &c, w[g]);
            let d = &new - &bg;
            let change = d.iter().fold(T::zero(), |m, e| m.max(e.abs()));
            if change > T::zero() {
                r = &r - &xg.dot(&d);
                for (k, &j) in idx.iter().enumerate() {
                    beta[j] = new[k];
                }
            }
            max_change = max_change.max(change);
        }
        trace.push(v * half * r.dot(&r) + penalty(groups, w.view(), beta.view()));
        if max_change < opts.tol {
            // refresh the residual to shed accumulated rounding before certifying
            r = data.y() - &x.dot(&beta);
            residual = block_stationarity(&blocks, groups, &r, &w, v, &beta);
            if residual <= opts.tol {
                return Ok(InnerSolution {
                    coef: beta,
                    iterations: sweep,
                    converged: true,
                    residual,
                    objective_trace: trace,
                });
            }
        }
    }
    if residual.is_infinite() {
        residual = block_stationarity(&blocks, groups, &r, &w, v, &beta);
    }
    Ok(InnerSolution {
        coef: beta,
        iterations: opts.max_iter,
        converged: false,
        residual,
        objective_trace: trace,
    })
}

/// Minimizer of `½bᵀGb − cᵀb + w‖b‖` with `G = Q diag(μ) Qᵀ`.
fn block_minimizer<T: Scalar>(mu: &Array1<T>, q: &Array2<T>, c: &Array1<T>, w: T) -> Array1<T> {
    let cnorm = c.dot(c).sqrt();
    if cnorm <= w {
        return Array1::zeros(c.len());
    }
    let ct = q.t().dot(c);
    let mu_max = mu.iter().copied().fold(T::zero(), T::max);
    if w == T::zero() {
        // least squares on the block, pseudo-inverse on a rank-deficient Gram
        let cut = mu_max * T::epsilon() * T::from_usize(mu.len()).unwrap_or(T::one());
        let coef = Array1::from_shape_fn(mu.len(), |k| if mu[k] > cut { ct[k] / mu[k] } else { T::zero() });
        return q.dot(&coef);
    }
    // ‖b‖ = s solves h(s) = Σ c̃²/(μs + w)² − 1 = 0; h is convex and
    // decreasing, so Newton from s = 0 increases monotonically to the root.
    let mut s = T::zero();
    for _ in 0..RADIUS_MAX_ITER {
        let mut h = -T::one();
        let mut dh = T::zero();
        for k in 0..mu.len() {
            let den = mu[k] * s + w;
            let c2 = ct[k] * ct[k];
            h += c2 / (den * den);
            dh -= T::lit(2.0) * c2 * mu[k] / (den * den * den);
        }
        if !(h > T::zero()) || !(dh < T::zero()) {
            break;
        }
        let next = s - h / dh;
        if !(next > s) || !next.is_finite() {
            break;
        }
        let done = next - s <= T::epsilon() * next;
        s = next;
        if done {
            break;
        }
    }
    let coef = Array1::from_shape_fn(mu.len(), |k| ct[k] * s / (mu[k] * s + w));
    q.dot(&coef)
}

fn block_stationarity<T: Scalar>(
    blocks: &[Array2<T>],
    groups: &GroupStructure,
    r: &Array1<T>,
    w: &Array1<T>,
    v: T,
    beta: &Array1<T>,
) -> T {
    let mut worst = T::zero();
    for (g, xg) in blocks.iter().enumerate() {
        let idx = groups.members(g);
        let bg = Array1::from_shape_fn(idx.len(), |k| beta[idx[k]]);
        let corr = xg.t().dot(r) * v;
        let norm = bg.dot(&bg).sqrt();
        let viol = if norm == T::zero() {
            (corr.dot(&corr).sqrt() - w[g]).max(T::zero())
        } else {
            let d = &corr - &(&bg * (w[g] / norm));
            d.dot(&d).sqrt()
        };
        worst = worst.max(viol);
    }
    worst
}
