use ndarray::{Array1, Array2, ArrayView1};

use super::objective::penalized_objective;
use super::problem::{FitProblem, ModelKind, ProblemData};
use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::model::{
    coordinate_weights, group_weights, noise_weight, precision_weights, shared_group_weights,
    NoiseModel, PriorPoint, WeightSet,
};
use crate::solvers::{
    glasso_objective, weighted_glasso, weighted_group_linear_from, weighted_l1_linear_from,
    weighted_l2_linear, weighted_logistic_from, Dataset, LogisticPenalty, PrecisionEstimate,
    SolverOptions,
};
use crate::Scalar;

// Ridge added to zero sample variances when building the default precision start.
const DIAG_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Estimate<T> {
    Coefficients(Array1<T>),
    Precision(PrecisionEstimate<T>),
}

impl<T: Scalar> Estimate<T> {
    pub fn point(&self) -> PriorPoint<'_, T> {
        match self {
            Estimate::Coefficients(b) => PriorPoint::Coefficients(b.view()),
            Estimate::Precision(p) => PriorPoint::Precision(p.omega.view()),
        }
    }

    pub fn coefficients(&self) -> Option<&Array1<T>> {
        match self {
            Estimate::Coefficients(b) => Some(b),
            Estimate::Precision(_) => None,
        }
    }

    pub fn precision(&self) -> Option<&Array2<T>> {
        match self {
            Estimate::Precision(p) => Some(&p.omega),
            Estimate::Coefficients(_) => None,
        }
    }
}

/// Exact nonzeros of an estimate: coefficient indices, or off-diagonal
/// precision entries `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Support {
    Coefficients(Vec<usize>),
    Edges(Vec<(usize, usize)>),
}

impl Support {
    pub fn of<T: Scalar>(estimate: &Estimate<T>) -> Self {
        match estimate {
            Estimate::Coefficients(b) => {
                Support::Coefficients((0..b.len()).filter(|&j| b[j] != T::zero()).collect())
            }
            Estimate::Precision(p) => {
                let n = p.omega.nrows();
                Support::Edges(
                    (0..n)
                        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                        .filter(|&(i, j)| p.omega[[i, j]] != T::zero())
                        .collect(),
                )
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Support::Coefficients(v) => v.len(),
            Support::Edges(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An M-step whose inner solver stopped at its iteration cap.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerFailure<T> {
    /// 1-based outer iteration.
    pub outer_iteration: usize,
    pub inner_iterations: usize,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub estimate: Estimate<T>,
    pub support: Support,
    /// Marginal log-posterior at the start and after every outer iteration.
    pub objective_trace: Vec<T>,
    pub outer_iterations: usize,
    /// Outer loop met its tolerance and the last inner solve converged.
    pub converged: bool,
    /// E-step weights evaluated at the final estimate.
    pub weights_final: WeightSet<T>,
    /// Noise precision weight at the final estimate (random-noise models).
    pub noise_weight_final: Option<T>,
    pub inner_failures: Vec<InnerFailure<T>>,
    /// Objective traces of earlier stages of a tempered fit.
    pub stage_traces: Vec<Vec<T>>,
}

struct MStep<T> {
    estimate: Estimate<T>,
    iterations: usize,
    converged: bool,
    residual: T,
    trace: Vec<T>,
}

fn fixed_precision<T: Scalar>(noise: Option<&NoiseModel<T>>) -> Option<T> {
    match noise {
        Some(NoiseModel::FixedVariance(d2)) => Some(d2.recip()),
        _ => None,
    }
}

fn rss<T: Scalar>(data: &Dataset<T>, beta: ArrayView1<'_, T>) -> T {
    let r = data.y() - &data.x().dot(&beta);
    r.dot(&r)
}

/// E-step: penalty weights and, for linear models, the noise precision.
fn e_step<T: Scalar>(problem: &FitProblem<T>, current: &Estimate<T>) -> Result<(WeightSet<T>, Option<T>)> {
    let prior = problem.prior();
    match current {
        Estimate::Precision(p) => Ok((precision_weights(p.omega.view(), prior)?, None)),
        Estimate::Coefficients(beta) => {
            let w = match problem.model() {
                ModelKind::GroupLinear => group_weights(beta.view(), prior)?,
                ModelKind::SharedLinear => shared_group_weights(beta.view(), prior)?,
                _ => coordinate_weights(beta.view(), prior)?,
            };
            let v = match (problem.model(), problem.noise()) {
                (ModelKind::Logistic, _) => None,
                (_, Some(noise @ NoiseModel::InverseGammaVariance { .. })) => {
                    let data = problem.dataset().ok_or_else(|| Error::Internal("missing data".into()))?;
                    Some(noise_weight(rss(data, beta.view()), data.n(), noise)?)
                }
                (_, noise) => fixed_precision(noise),
            };
            Ok((w, v))
        }
    }
}

fn m_step<T: Scalar>(
    problem: &FitProblem<T>,
    weights: &WeightSet<T>,
    v: Option<T>,
    warm: Option<ArrayView1<'_, T>>,
    opts: &SolverOptions<T>,
) -> Result<MStep<T>> {
    let from_inner = |sol: crate::solvers::InnerSolution<T>| MStep {
        estimate: Estimate::Coefficients(sol.coef),
        iterations: sol.iterations,
        converged: sol.converged,
        residual: sol.residual,
        trace: sol.objective_trace,
    };
    let q2 = problem.prior().q() == T::lit(2.0);
    match problem.data() {
        ProblemData::Covariance { s, n } => {
            let est = weighted_glasso(s.view(), *n, weights, opts)?;
            let value = match weights {
                WeightSet::Matrix(w) => glasso_objective(s.view(), *n, w.view(), est.omega.view())?,
                _ => return Err(Error::Internal("expected matrix weights".into())),
            };
            Ok(MStep {
                iterations: est.iterations,
                converged: est.converged,
                residual: est.residual,
                trace: vec![-value],
                estimate: Estimate::Precision(est),
            })
        }
        ProblemData::Regression(data) => match problem.model() {
            ModelKind::Logistic => {
                let penalty = if q2 { LogisticPenalty::SquaredL2 } else { LogisticPenalty::L1 };
                let sol = weighted_logistic_from(data, weights, penalty, problem.jeffreys(), opts, warm)?;
                Ok(from_inner(sol))
            }
            model => {
                let v = v.ok_or_else(|| Error::Internal("missing noise precision".into()))?;
                if model == ModelKind::GroupLinear {
                    let groups = problem.prior().groups().ok_or_else(|| Error::Internal("missing groups".into()))?;
                    return Ok(from_inner(weighted_group_linear_from(data, groups, weights, v, opts, warm)?));
                }
                let w = WeightSet::PerCoordinate(weights.coordinate_weights(problem.prior().groups())?);
                if q2 {
                    let coef = weighted_l2_linear(data, &w, v)?;
                    Ok(MStep {
                        estimate: Estimate::Coefficients(coef),
                        iterations: 1,
                        converged: true,
                        residual: T::zero(),
                        trace: Vec::new(),
                    })
                } else {
                    Ok(from_inner(weighted_l1_linear_from(data, &w, v, opts, warm)?))
                }
            }
        },
    }
}

fn initial_estimate<T: Scalar>(problem: &FitProblem<T>, init: Option<PriorPoint<'_, T>>) -> Result<Estimate<T>> {
    match (problem.data(), init) {
        (ProblemData::Regression(_), None) => Ok(Estimate::Coefficients(Array1::zeros(problem.dim()))),
        (ProblemData::Regression(_), Some(PriorPoint::Coefficients(b))) => {
            check_len(problem.dim(), b.len())?;
            if b.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain("initial coefficients must be finite".into()));
            }
            Ok(Estimate::Coefficients(b.to_owned()))
        }
        (ProblemData::Covariance { s, .. }, None) => {
            let ridge = if s.diag().iter().any(|&d| d == T::zero()) { T::lit(DIAG_RIDGE) } else { T::zero() };
            let p = s.nrows();
            let mut omega = Array2::zeros((p, p));
            for k in 0..p {
                let d = s[[k, k]] + ridge;
                if !(d > T::zero()) {
                    return Err(Error::Domain(format!("sample variance {k} is not positive")));
                }
                omega[[k, k]] = d.recip();
            }
            Ok(Estimate::Precision(PrecisionEstimate { omega, iterations: 0, converged: true, residual: T::zero() }))
        }
        (ProblemData::Covariance { s, .. }, Some(PriorPoint::Precision(o))) => {
            check_len(s.nrows(), o.nrows())?;
            check_len(s.nrows(), o.ncols())?;
            if !linalg::is_symmetric(o, T::lit(1e-10)) || linalg::cholesky(o).is_err() {
                return Err(Error::Domain("initial precision must be symmetric positive definite".into()));
            }
            Ok(Estimate::Precision(PrecisionEstimate {
                omega: o.to_owned(),
                iterations: 0,
                converged: true,
                residual: T::zero(),
            }))
        }
        _ => Err(Error::Config("initial point does not match the model".into())),
    }
}

fn change<T: Scalar>(a: &Estimate<T>, b: &Estimate<T>) -> T {
    match (a, b) {
        (Estimate::Coefficients(x), Estimate::Coefficients(y)) => linalg::sup_norm_diff(x.view(), y.view()),
        (Estimate::Precision(x), Estimate::Precision(y)) => x
            .omega
            .iter()
            .zip(y.omega.iter())
            .fold(T::zero(), |m, (p, q)| m.max((*p - *q).abs())),
        _ => T::infinity(),
    }
}

fn warm_view<T>(e: &Estimate<T>) -> Option<ArrayView1<'_, T>> {
    match e {
        Estimate::Coefficients(b) => Some(b.view()),
        Estimate::Precision(_) => None,
    }
}

/// Posterior mode by EM.
///
/// Each outer iteration refreshes the penalty weights (and the noise
/// precision for random-noise models) at the current iterate, then solves the
/// weighted penalized problem warm-started at that iterate. Starts from zero
/// coefficients, or from `diag(1/S_kk)` for precision models, unless `init`
/// is given. Stops once an outer iteration moves no entry by `opts.tol` or
/// more, or after `opts.outer_max_iter` iterations. Inner solves that hit
/// their cap are recorded in `inner_failures`.
pub fn fit_map<T: Scalar>(
    problem: &FitProblem<T>,
    opts: &SolverOptions<T>,
    init: Option<PriorPoint<'_, T>>,
) -> Result<FitResult<T>> {
    opts.validate()?;
    let mut current = initial_estimate(problem, init)?;
    let mut trace = vec![penalized_objective(problem, current.point())?];
    let mut failures = Vec::new();
    let mut outer = 0;
    let mut converged = false;
    let mut last_inner_ok = true;
    while outer < opts.outer_max_iter {
        outer += 1;
        let (w, v) = e_step(problem, &current)?;
        let step = m_step(problem, &w, v, warm_view(&current), opts)?;
        last_inner_ok = step.converged;
        if !step.converged {
            failures.push(InnerFailure {
                outer_iteration: outer,
                inner_iterations: step.iterations,
                residual: step.residual,
            });
        }
        let delta = change(&current, &step.estimate);
        current = step.estimate;
        trace.push(penalized_objective(problem, current.point())?);
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    let (weights_final, noise_weight_final) = e_step(problem, &current)?;
    Ok(FitResult {
        support: Support::of(&current),
        estimate: current,
        objective_trace: trace,
        outer_iterations: outer,
        converged: converged && last_inner_ok,
        weights_final,
        noise_weight_final: noise_weight_final.filter(|_| {
            matches!(problem.noise(), Some(NoiseModel::InverseGammaVariance { .. }))
        }),
        inner_failures: failures,
        stage_traces: Vec::new(),
    })
}

/// One weighted penalized solve with the given constant weights, from zero
/// (or `diag(1/S_kk)`), as used for lasso-type baselines.
///
/// The trace holds the negated inner objective, so it is non-decreasing like
/// an EM trace. Random-noise models are rejected since the penalized problem
/// needs a fixed noise precision.
pub fn fit_fixed_penalty<T: Scalar>(
    problem: &FitProblem<T>,
    weights: &WeightSet<T>,
    opts: &SolverOptions<T>,
) -> Result<FitResult<T>> {
    opts.validate()?;
    if matches!(problem.noise(), Some(NoiseModel::InverseGammaVariance { .. })) {
        return Err(Error::Config("fixed-penalty fits need a fixed noise variance".into()));
    }
    if !weights.values().iter().all(|w| w.is_finite() && *w >= T::zero()) {
        return Err(Error::Domain("weights must be finite and non-negative".into()));
    }
    let v = fixed_precision(problem.noise());
    let start = initial_estimate(problem, None)?;
    let step = m_step(problem, weights, v, warm_view(&start), opts)?;
    let failures = if step.converged {
        Vec::new()
    } else {
        vec![InnerFailure { outer_iteration: 1, inner_iterations: step.iterations, residual: step.residual }]
    };
    Ok(FitResult {
        support: Support::of(&step.estimate),
        estimate: step.estimate,
        objective_trace: step.trace.iter().map(|&f| -f).collect(),
        outer_iterations: 1,
        converged: step.converged,
        weights_final: weights.clone(),
        noise_weight_final: None,
        inner_failures: failures,
        stage_traces: Vec::new(),
    })
}
