use ndarray::{Array1, ArrayView1};

use super::problem::{FitProblem, ModelKind, ProblemData};
use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::model::{log_marginal_prior, NoiseModel, PriorPoint};
use crate::solvers::{logistic_jeffreys_gradient, logistic_jeffreys_logdet, logistic_nll, logistic_nll_gradient, Dataset};
use crate::special::ln_gamma;
use crate::Scalar;

fn rss<T: Scalar>(data: &Dataset<T>, beta: ArrayView1<'_, T>) -> T {
    let r = data.y() - &data.x().dot(&beta);
    r.dot(&r)
}

/// Gaussian log-likelihood of centered data; for inverse-gamma noise the
/// variance is integrated out.
fn linear_loglik<T: Scalar>(n: usize, rss: T, noise: &NoiseModel<T>) -> T {
    let half = T::lit(0.5);
    let df = T::from_usize_lossy(n - 1) * half;
    let nf = T::from_usize_lossy(n);
    let two_pi = T::lit(2.0) * T::PI();
    match *noise {
        NoiseModel::FixedVariance(d2) => {
            -df * (two_pi * d2).ln() - half * nf.ln() - rss / (T::lit(2.0) * d2)
        }
        NoiseModel::InverseGammaVariance { a, b } => {
            -df * two_pi.ln() - half * nf.ln() + a * b.ln() - ln_gamma(a) + ln_gamma(a + df)
                - (a + df) * (b + rss * half).ln()
        }
    }
}

fn coefficients<'a, T: Scalar>(problem: &FitProblem<T>, point: PriorPoint<'a, T>) -> Result<ArrayView1<'a, T>> {
    match point {
        PriorPoint::Coefficients(beta) => {
            check_len(problem.dim(), beta.len())?;
            Ok(beta)
        }
        PriorPoint::Precision(_) => Err(Error::Config("expected a coefficient vector".into())),
    }
}

/// Exact log-likelihood at `point`. Logistic fits with the Jeffreys flag
/// subtract `½ log|XᵀVX|`; precision fits use the `(n − p − 1)/2` log-det
/// coefficient of the reparametrization-invariant form.
pub fn log_likelihood<T: Scalar>(problem: &FitProblem<T>, point: PriorPoint<'_, T>) -> Result<T> {
    match problem.data() {
        ProblemData::Regression(data) => {
            let beta = coefficients(problem, point)?;
            if problem.model() == ModelKind::Logistic {
                let mut ll = -logistic_nll(data.x().view(), data.y().view(), beta);
                if problem.jeffreys() {
                    ll -= logistic_jeffreys_logdet(data.x().view(), beta)?;
                }
                Ok(ll)
            } else {
                let noise = problem.noise().ok_or_else(|| Error::Internal("missing noise model".into()))?;
                Ok(linear_loglik(data.n(), rss(data, beta), noise))
            }
        }
        ProblemData::Covariance { s, n } => {
            let PriorPoint::Precision(omega) = point else {
                return Err(Error::Config("expected a precision matrix".into()));
            };
            let p = s.nrows();
            check_len(p, omega.nrows())?;
            check_len(p, omega.ncols())?;
            if !linalg::is_symmetric(omega, T::lit(1e-10)) {
                return Err(Error::Domain("precision matrix is not symmetric".into()));
            }
            let logdet = linalg::log_det_spd(omega)
                .map_err(|_| Error::Domain("precision matrix is not positive definite".into()))?;
            let half = T::lit(0.5);
            let nf = T::from_usize_lossy(*n);
            let tr: T = (0..p).map(|i| s.row(i).dot(&omega.column(i))).sum();
            Ok(T::from_usize_lossy(n - p - 1) * half * logdet
                - nf * half * tr
                - nf * T::from_usize_lossy(p) * half * (T::lit(2.0) * T::PI()).ln())
        }
    }
}

/// Marginal log-posterior (log-likelihood plus log marginal prior), the
/// quantity whose values make up a fit's objective trace.
pub fn penalized_objective<T: Scalar>(problem: &FitProblem<T>, point: PriorPoint<'_, T>) -> Result<T> {
    Ok(log_likelihood(problem, point)? + log_marginal_prior(point, problem.prior())?)
}

/// Gradient of [`log_likelihood`] with respect to the coefficients.
pub fn log_likelihood_gradient<T: Scalar>(problem: &FitProblem<T>, beta: ArrayView1<'_, T>) -> Result<Array1<T>> {
    let data = problem
        .dataset()
        .ok_or_else(|| Error::Config("gradient is defined for coefficient models only".into()))?;
    check_len(problem.dim(), beta.len())?;
    if problem.model() == ModelKind::Logistic {
        let mut g = -logistic_nll_gradient(data.x().view(), data.y().view(), beta);
        if problem.jeffreys() {
            g = g - logistic_jeffreys_gradient(data.x().view(), beta)?;
        }
        return Ok(g);
    }
    let r = data.y() - &data.x().dot(&beta);
    let scale = match *problem.noise().ok_or_else(|| Error::Internal("missing noise model".into()))? {
        NoiseModel::FixedVariance(d2) => d2.recip(),
        NoiseModel::InverseGammaVariance { a, b } => {
            let df = T::from_usize_lossy(data.n() - 1) * T::lit(0.5);
            (a + df) / (b + r.dot(&r) * T::lit(0.5))
        }
    };
    Ok(data.x().t().dot(&r) * scale)
}
