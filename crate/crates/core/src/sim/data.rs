use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::Scalar;

fn normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// `n` rows drawn i.i.d. from `N(0, Σ)` with `Σ_ij = ρ^{|i−j|}`, as `L z` for
/// the Cholesky factor `L` of `Σ` and standard normal `z`.
pub fn gen_correlated_design<T: Scalar, R: Rng + ?Sized>(n: usize, p: usize, rho: T, rng: &mut R) -> Result<Array2<T>> {
    if !(rho > -T::one() && rho < T::one()) {
        return Err(Error::Config(format!("correlation must lie in (-1, 1), got {rho}")));
    }
    let sigma = Array2::from_shape_fn((p, p), |(i, j)| rho.powi(i.abs_diff(j) as i32));
    let l = linalg::cholesky(sigma.view()).map_err(|e| Error::Internal(format!("design covariance: {e}")))?;
    let mut x = Array2::zeros((n, p));
    let mut z = Array1::<T>::zeros(p);
    for i in 0..n {
        z.iter_mut().for_each(|v| *v = normal(rng));
        x.row_mut(i).assign(&l.dot(&z));
    }
    Ok(x)
}

/// `y = Xβ + δε` with `ε` standard normal.
pub fn gen_linear_responses<T: Scalar, R: Rng + ?Sized>(
    x: ArrayView2<'_, T>,
    beta: ArrayView1<'_, T>,
    delta: T,
    rng: &mut R,
) -> Result<Array1<T>> {
    check_len(x.ncols(), beta.len())?;
    let mut y = x.dot(&beta);
    y.iter_mut().for_each(|v| *v += delta * normal(rng));
    Ok(y)
}

/// Labels `+1` with probability `1/(1 + exp(−xᵢᵀβ))`, else `−1`.
pub fn gen_logistic_responses<T: Scalar, R: Rng + ?Sized>(
    x: ArrayView2<'_, T>,
    beta: ArrayView1<'_, T>,
    rng: &mut R,
) -> Result<Array1<T>> {
    check_len(x.ncols(), beta.len())?;
    let eta = x.dot(&beta);
    Ok(eta.mapv(|e| {
        let p = T::one() / (T::one() + (-e).exp());
        if T::lit(rng.random::<f64>()) < p {
            T::one()
        } else {
            -T::one()
        }
    }))
}

/// `n` draws from `N(0, Ω⁻¹)` and their sample covariance `S = (1/n) Σ xᵢxᵢᵀ`.
pub fn gen_gaussian_samples<T: Scalar, R: Rng + ?Sized>(
    omega: ArrayView2<'_, T>,
    n: usize,
    rng: &mut R,
) -> Result<(Array2<T>, Array2<T>)> {
    let p = omega.nrows();
    check_len(p, omega.ncols())?;
    if !linalg::is_symmetric(omega, T::lit(1e-12)) {
        return Err(Error::Domain("precision matrix is not symmetric".into()));
    }
    // Ω = L Lᵀ, so x = L⁻ᵀ z has covariance Ω⁻¹.
    let l = linalg::cholesky(omega)
        .map_err(|_| Error::Domain("precision matrix is not positive definite".into()))?;
    let mut samples = Array2::zeros((n, p));
    let mut z = Array1::<T>::zeros(p);
    for i in 0..n {
        z.iter_mut().for_each(|v| *v = normal(rng));
        let mut x = Array1::<T>::zeros(p);
        for k in (0..p).rev() {
            let mut acc = z[k];
            for m in k + 1..p {
                acc -= l[[m, k]] * x[m];
            }
            x[k] = acc / l[[k, k]];
        }
        samples.row_mut(i).assign(&x);
    }
    let s = samples.t().dot(&samples) / T::from_usize_lossy(n.max(1));
    Ok((samples, s))
}
