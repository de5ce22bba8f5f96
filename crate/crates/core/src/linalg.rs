//! Small dense linear algebra on `ndarray` matrices.
//!
//! Problem sizes here are tens of variables, so plain O(p³) routines are
//! used throughout.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::Scalar;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
pub fn cholesky<T: Scalar>(a: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension { expected: n, found: a.ncols() });
    }
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l[[j, j]] = djj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve<T: Scalar>(l: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> Array1<T> {
    let n = l.nrows();
    let mut y = b.to_owned();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// Solves the symmetric positive-definite system `A x = b`.
pub fn solve_spd<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> Result<Array1<T>> {
    let l = cholesky(a)?;
    Ok(cholesky_solve(l.view(), b))
}

/// Inverse of a symmetric positive-definite matrix (symmetrized output).
pub fn inverse_spd<T: Scalar>(a: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = a.nrows();
    let l = cholesky(a)?;
    let mut inv = Array2::<T>::zeros((n, n));
    let mut e = Array1::<T>::zeros(n);
    for j in 0..n {
        e.fill(T::zero());
        e[j] = T::one();
        let col = cholesky_solve(l.view(), e.view());
        inv.column_mut(j).assign(&col);
    }
    symmetrize_in_place(&mut inv);
    Ok(inv)
}

/// `log det A` for symmetric positive-definite `A`.
pub fn log_det_spd<T: Scalar>(a: ArrayView2<'_, T>) -> Result<T> {
    let l = cholesky(a)?;
    Ok(l.diag().iter().map(|d| d.ln()).sum::<T>() * T::lit(2.0))
}

pub fn is_symmetric<T: Scalar>(a: ArrayView2<'_, T>, tol: T) -> bool {
    let n = a.nrows();
    if a.ncols() != n {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[[i, j]] - a[[j, i]]).abs() > tol {
                return false;
            }
        }
    }
    true
}

pub fn symmetrize_in_place<T: Scalar>(a: &mut Array2<T>) {
    let n = a.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let m = (a[[i, j]] + a[[j, i]]) * half;
            a[[i, j]] = m;
            a[[j, i]] = m;
        }
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Scalar>(a: ArrayView2<'_, T>) -> Array1<T> {
    let mut ev = jacobi(a, false).0.to_vec();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Array1::from(ev)
}

/// Eigen-decomposition `a = Q diag(λ) Qᵀ` of a symmetric matrix. Columns of
/// the returned matrix are the eigenvectors; eigenvalues are unsorted.
pub fn symmetric_eigen<T: Scalar>(a: ArrayView2<'_, T>) -> (Array1<T>, Array2<T>) {
    let (ev, q) = jacobi(a, true);
    (ev, q.expect("eigenvectors requested"))
}

fn jacobi<T: Scalar>(a: ArrayView2<'_, T>, vectors: bool) -> (Array1<T>, Option<Array2<T>>) {
    let n = a.nrows();
    let mut m = a.to_owned();
    let mut q = vectors.then(|| Array2::<T>::eye(n));
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut scale = T::zero();
        for i in 0..n {
            scale += m[[i, i]] * m[[i, i]];
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off <= eps * eps * (scale + off) {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = m[[p, r]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[[r, r]] - m[[p, p]]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, r]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, r]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[r, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[r, k]] = s * mpk + c * mqk;
                }
                if let Some(q) = q.as_mut() {
                    for k in 0..n {
                        let qkp = q[[k, p]];
                        let qkq = q[[k, r]];
                        q[[k, p]] = c * qkp - s * qkq;
                        q[[k, r]] = s * qkp + c * qkq;
                    }
                }
            }
        }
    }
    (Array1::from_shape_fn(n, |i| m[[i, i]]), q)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<T: Scalar>(a: ArrayView2<'_, T>) -> T {
    symmetric_eigenvalues(a)
        .iter()
        .copied()
        .fold(T::infinity(), T::min)
}

pub fn sup_norm_diff<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).abs())
        .fold(T::zero(), T::max)
}
