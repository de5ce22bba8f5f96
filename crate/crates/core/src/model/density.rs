use ndarray::{ArrayView1, ArrayView2};

use super::prior::{tri_index, PriorSpec, PriorVariant};
use crate::error::{check_len, Error, Result};
use crate::special::ln_gamma;
use crate::Scalar;

/// Argument of [`log_marginal_prior`].
#[derive(Debug, Clone, Copy)]
pub enum PriorPoint<'a, T> {
    Coefficients(ArrayView1<'a, T>),
    Precision(ArrayView2<'a, T>),
}

/// Log marginal prior density with all normalizing constants, the latent
/// scales integrated out.
pub fn log_marginal_prior<T: Scalar>(point: PriorPoint<'_, T>, prior: &PriorSpec<T>) -> Result<T> {
    match (prior.variant(), point) {
        (PriorVariant::PerCoordinate, PriorPoint::Coefficients(beta)) => {
            check_len(prior.dim(), beta.len())?;
            Ok(beta
                .iter()
                .enumerate()
                .map(|(j, &x)| log_exp_power(x, prior.a()[j], prior.b()[j], prior.q()))
                .sum())
        }
        (PriorVariant::Grouped, PriorPoint::Coefficients(beta)) => {
            let groups = prior.groups().ok_or_else(|| Error::Config("missing groups".into()))?;
            check_len(groups.num_coords(), beta.len())?;
            let ln_pi = T::PI().ln();
            let half = T::lit(0.5);
            let mut total = T::zero();
            for g in 0..groups.num_groups() {
                let (a, b) = (prior.a()[g], prior.b()[g]);
                let n = T::from_usize_lossy(groups.size(g));
                let norm = groups.members(g).iter().map(|&j| beta[j] * beta[j]).sum::<T>().sqrt();
                total += -n * (T::lit(2.0) * b).ln() - (n - T::one()) * half * ln_pi
                    + ln_gamma(n + a)
                    - ln_gamma((n + T::one()) * half)
                    - ln_gamma(a)
                    - (a + n) * (norm / b).ln_1p();
            }
            Ok(total)
        }
        (PriorVariant::SharedGroups, PriorPoint::Coefficients(beta)) => {
            let groups = prior.groups().ok_or_else(|| Error::Config("missing groups".into()))?;
            check_len(groups.num_coords(), beta.len())?;
            let q = prior.q();
            let inv_q = q.recip();
            let mut total = T::zero();
            for g in 0..groups.num_groups() {
                let (a, b) = (prior.a()[g], prior.b()[g]);
                let n = T::from_usize_lossy(groups.size(g));
                let s = groups.members(g).iter().map(|&j| beta[j].abs().powf(q)).sum::<T>();
                total += ln_gamma(a + n * inv_q)
                    - n * T::LN_2()
                    - ln_gamma(a)
                    - n * ln_gamma(T::one() + inv_q)
                    - n * inv_q * b.ln()
                    - (a + n * inv_q) * (s / b).ln_1p();
            }
            Ok(total)
        }
        (PriorVariant::Matrix, PriorPoint::Precision(omega)) => {
            let p = prior.dim();
            check_len(p, omega.nrows())?;
            check_len(p, omega.ncols())?;
            let mut total = T::zero();
            for i in 0..p {
                for j in i..p {
                    let k = tri_index(p, i, j);
                    total += log_exp_power(omega[[i, j]], prior.a()[k], prior.b()[k], T::one());
                }
            }
            Ok(total)
        }
        (variant, _) => Err(Error::Config(format!(
            "point type does not match the {variant:?} prior"
        ))),
    }
}

/// Scalar exponential-power marginal, `q = 1` being the generalized t of HAL.
fn log_exp_power<T: Scalar>(x: T, a: T, b: T, q: T) -> T {
    let inv_q = q.recip();
    if q == T::one() {
        (a / (T::lit(2.0) * b)).ln() - (a + T::one()) * (x.abs() / b).ln_1p()
    } else {
        ln_gamma(a + inv_q) - T::LN_2() - ln_gamma(a) - ln_gamma(T::one() + inv_q) - inv_q * b.ln()
            - (a + inv_q) * (x.abs().powf(q) / b).ln_1p()
    }
}
