use crate::error::{Error, Result};
use crate::special::ln_gamma;
use crate::Scalar;

/// `E[|β|^t]` under the marginal HAL prior with hyperparameters `(a, b)`.
///
/// With `ν = a + 1` this is `bᵗ Γ(ν−1−t) Γ(t+1) / Γ(ν−1)`. Only `q = 1` is
/// supported; other exponents return a configuration error.
pub fn prior_moment<T: Scalar>(a: T, b: T, q: T, t: T) -> Result<T> {
    if !(a > T::zero() && b > T::zero() && q > T::zero() && t > T::zero()) {
        return Err(Error::Domain(format!(
            "moment arguments must be positive, got a={a}, b={b}, q={q}, t={t}"
        )));
    }
    if q != T::one() {
        return Err(Error::Config(format!("moments are only available for q = 1, got q = {q}")));
    }
    let nu = a + T::one();
    if !(nu - T::one() - t > T::zero()) {
        return Err(Error::MomentUndefined { order: t.to_f64_lossy(), shape: a.to_f64_lossy() });
    }
    let log_m = t * b.ln() + ln_gamma(nu - T::one() - t) + ln_gamma(t + T::one())
        - ln_gamma(nu - T::one());
    Ok(log_m.exp())
}

/// Inverts mean and variance of `|β|` into HAL hyperparameters `(a, b)`.
pub fn hyperparams_from_mean_var<T: Scalar>(mean: T, var: T) -> Result<(T, T)> {
    if !(mean > T::zero() && var > T::zero()) {
        return Err(Error::Domain(format!(
            "mean and variance must be positive, got ({mean}, {var})"
        )));
    }
    let mean_sq = mean * mean;
    if !(var > mean_sq) {
        return Err(Error::InfeasibleMoments {
            var: var.to_f64_lossy(),
            mean_sq: mean_sq.to_f64_lossy(),
        });
    }
    let a = T::lit(2.0) * var / (var - mean_sq);
    Ok((a, mean * (a - T::one())))
}
