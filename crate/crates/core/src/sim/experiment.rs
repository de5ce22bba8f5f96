use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{gen_correlated_design, gen_gaussian_samples, gen_linear_responses, gen_logistic_responses};
use super::metrics::{precision_support_metrics, support_metrics, SupportScore};
use super::{rep_stream, GENERATOR};
use crate::em::{fit_fixed_penalty, fit_map, tempered_fit, Estimate, FitProblem, FitResult, PriorPoint, TemperSchedule};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{tri_index, tri_len, GroupStructure, Hyper, NoiseModel, PriorSpec, WeightSet};
use crate::solvers::{Dataset, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentModel {
    Linear,
    Logistic,
    Grouped,
    Precision,
}

/// Observation noise of simulated linear data. With `inverse_gamma` each
/// replication draws its own `δ²` and the fit integrates `δ²` out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Fixed { delta: f64 },
    InverseGamma { a: f64, b: f64 },
}

/// Estimation method. Override keys are 1-based coefficient indices, group
/// indices for grouped models, or packed upper-triangle positions for
/// precision models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// EM under the hierarchical prior.
    Hierarchical {
        a: f64,
        b: f64,
        #[serde(default = "default_q")]
        q: f64,
        #[serde(default)]
        overrides: BTreeMap<usize, (f64, f64)>,
        /// Optional tempering stages `(a_scale, b_scale)`, ending at `(1, 1)`.
        #[serde(default)]
        schedule: Option<Vec<(f64, f64)>>,
    },
    /// One penalized solve with constant weights `1/τ`.
    Lasso {
        tau: f64,
        #[serde(default)]
        overrides: BTreeMap<usize, f64>,
    },
}

fn default_q() -> f64 {
    1.0
}

fn default_rho() -> f64 {
    0.5
}

/// Starting point of the EM iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    /// Zero coefficients (or `diag(1/S_kk)` for precision models).
    #[default]
    Zero,
    /// Ordinary least squares, for linear and grouped models with `n > p`.
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub outer_max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverOptions::<f64>::default();
        Self { tol: d.tol, max_iter: d.max_iter, outer_max_iter: d.outer_max_iter }
    }
}

impl SolverSettings {
    pub fn options(&self) -> SolverOptions<f64> {
        SolverOptions { tol: self.tol, max_iter: self.max_iter, outer_max_iter: self.outer_max_iter, ..SolverOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Row label in summaries, e.g. `"(2,0.05)"`.
    #[serde(default)]
    pub label: String,
    pub model: ExperimentModel,
    pub n: usize,
    /// True coefficients (linear, logistic, grouped).
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    /// True precision matrix (precision model).
    #[serde(default)]
    pub omega: Option<Vec<Vec<f64>>>,
    /// Design correlation, `Σ_ij = ρ^{|i−j|}`.
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    pub method: Method,
    /// Partition of `1..=p` for grouped models.
    #[serde(default)]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub jeffreys: bool,
    #[serde(default)]
    pub init: InitPolicy,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Replications; 0 (the serde default) fails validation unless replaced.
    #[serde(default)]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Score of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub rep: u64,
    pub error: f64,
    pub correct: bool,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub converged: bool,
    pub outer_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub label: String,
    pub n: usize,
    /// Mean over replications of the ℓ2 distance to the truth (Frobenius
    /// over the upper triangle for precision models).
    pub avg_error: f64,
    pub pct_correct: f64,
    pub avg_false_positives: f64,
    pub avg_false_negatives: f64,
    pub nonconverged: usize,
    pub reps: usize,
    pub seed: u64,
    pub generator: String,
    pub config: ExperimentConfig,
    pub outcomes: Vec<RepOutcome>,
}

impl MetricsSummary {
    pub fn nonconvergence_rate(&self) -> f64 {
        self.nonconverged as f64 / self.reps as f64
    }
}

/// Everything a replication needs that does not depend on the random draws.
struct Plan {
    p: usize,
    beta: Option<Array1<f64>>,
    omega: Option<Array2<f64>>,
    groups: Option<GroupStructure>,
    prior: PriorSpec<f64>,
    lasso_weights: Option<WeightSet<f64>>,
    schedule: Option<TemperSchedule<f64>>,
    opts: SolverOptions<f64>,
}

impl ExperimentConfig {
    pub fn dim(&self) -> usize {
        match self.model {
            ExperimentModel::Precision => self.omega.as_ref().map_or(0, |o| o.len()),
            _ => self.beta.as_ref().map_or(0, |b| b.len()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plan().map(|_| ())
    }

    fn plan(&self) -> Result<Plan> {
        let cfg = |m: &str| Error::Config(m.to_string());
        if self.reps == 0 {
            return Err(cfg("reps must be at least 1"));
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(cfg("rho must lie in (-1, 1)"));
        }
        let opts = self.solver.options();
        opts.validate()?;
        let mut plan = Plan {
            p: 0,
            beta: None,
            omega: None,
            groups: None,
            prior: PriorSpec::per_coordinate(vec![1.0], vec![1.0], 1.0)?,
            lasso_weights: None,
            schedule: None,
            opts,
        };
        match self.model {
            ExperimentModel::Precision => {
                let rows = self.omega.as_ref().ok_or_else(|| cfg("precision experiments need `omega`"))?;
                let p = rows.len();
                if p == 0 || rows.iter().any(|r| r.len() != p) {
                    return Err(cfg("`omega` must be a non-empty square matrix"));
                }
                let omega = Array2::from_shape_fn((p, p), |(i, j)| rows[i][j]);
                if !linalg::is_symmetric(omega.view(), 1e-12) || linalg::cholesky(omega.view()).is_err() {
                    return Err(Error::Domain("`omega` must be symmetric positive definite".into()));
                }
                if self.n <= p + 1 {
                    return Err(Error::Infeasible(format!("need n > p + 1 (n = {}, p = {p})", self.n)));
                }
                plan.p = p;
                plan.omega = Some(omega);
            }
            model => {
                let beta = self.beta.as_ref().ok_or_else(|| cfg("experiment needs `beta`"))?;
                if beta.is_empty() || beta.iter().any(|b| !b.is_finite()) {
                    return Err(cfg("`beta` must be non-empty and finite"));
                }
                plan.p = beta.len();
                plan.beta = Some(Array1::from_vec(beta.clone()));
                if self.n < 2 {
                    return Err(cfg("need n >= 2"));
                }
                if model != ExperimentModel::Logistic {
                    match self.noise {
                        None => return Err(cfg("linear experiments need `noise`")),
                        Some(NoiseSpec::Fixed { delta }) if !(delta >= 0.0 && delta.is_finite()) => {
                            return Err(cfg("noise delta must be finite and non-negative"))
                        }
                        Some(NoiseSpec::InverseGamma { a, b }) if !(a > 0.0 && b > 0.0) => {
                            return Err(cfg("inverse-gamma noise parameters must be positive"))
                        }
                        _ => {}
                    }
                }
                if model == ExperimentModel::Grouped {
                    let g = self.groups.as_ref().ok_or_else(|| cfg("grouped experiments need `groups`"))?;
                    let zero_based: Vec<Vec<usize>> = g
                        .iter()
                        .map(|grp| grp.iter().map(|&j| j.checked_sub(1).ok_or_else(|| cfg("group indices are 1-based"))).collect())
                        .collect::<Result<_>>()?;
                    plan.groups = Some(GroupStructure::from_partition(&zero_based, plan.p)?);
                }
            }
        }
        let p = plan.p;
        match &self.method {
            Method::Hierarchical { a, b, q, overrides, schedule } => {
                let hyper = Hyper { a: *a, b: *b, overrides: overrides.clone() };
                plan.prior = match self.model {
                    ExperimentModel::Linear | ExperimentModel::Logistic => {
                        let (a, b) = hyper.expand(p)?;
                        PriorSpec::per_coordinate(a, b, *q)?
                    }
                    ExperimentModel::Grouped => {
                        let groups = plan.groups.clone().expect("checked above");
                        let (a, b) = hyper.expand(groups.num_groups())?;
                        PriorSpec::grouped(a, b, groups)?
                    }
                    ExperimentModel::Precision => {
                        let (a, b) = hyper.expand(tri_len(p))?;
                        PriorSpec::matrix(p, a, b)?
                    }
                };
                if let Some(stages) = schedule {
                    plan.schedule = Some(TemperSchedule::new(stages.clone())?);
                }
            }
            Method::Lasso { tau, overrides } => {
                if matches!(self.noise, Some(NoiseSpec::InverseGamma { .. })) {
                    return Err(cfg("the lasso baseline needs fixed noise"));
                }
                let len = match self.model {
                    ExperimentModel::Grouped => plan.groups.as_ref().expect("checked above").num_groups(),
                    ExperimentModel::Precision => tri_len(p),
                    _ => p,
                };
                let mut taus = vec![*tau; len];
                for (&k, &t) in overrides {
                    if k == 0 || k > len {
                        return Err(cfg(&format!("override index {k} outside 1..={len}")));
                    }
                    taus[k - 1] = t;
                }
                if taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                    return Err(cfg("tau must be positive"));
                }
                let w: Vec<f64> = taus.iter().map(|t| 1.0 / t).collect();
                plan.lasso_weights = Some(match self.model {
                    ExperimentModel::Grouped => {
                        let groups = plan.groups.clone().expect("checked above");
                        plan.prior = PriorSpec::grouped(vec![1.0; len], vec![1.0; len], groups)?;
                        WeightSet::PerGroup(Array1::from_vec(w))
                    }
                    ExperimentModel::Precision => {
                        plan.prior = PriorSpec::matrix_uniform(p, 1.0, 1.0)?;
                        WeightSet::Matrix(Array2::from_shape_fn((p, p), |(i, j)| w[tri_index(p, i, j)]))
                    }
                    _ => {
                        plan.prior = PriorSpec::per_coordinate(vec![1.0; p], vec![1.0; p], 1.0)?;
                        WeightSet::PerCoordinate(Array1::from_vec(w))
                    }
                });
            }
        }
        if self.init == InitPolicy::LeastSquares {
            if !matches!(self.model, ExperimentModel::Linear | ExperimentModel::Grouped) {
                return Err(cfg("least-squares initialization applies to linear models only"));
            }
            if self.n <= p {
                return Err(cfg("least-squares initialization needs n > p"));
            }
        }
        Ok(plan)
    }

    fn run_one(&self, plan: &Plan, rep: u64) -> Result<RepOutcome> {
        let mut rng = rep_stream(self.seed, rep);
        let (problem, init) = match self.model {
            ExperimentModel::Precision => {
                let omega = plan.omega.as_ref().expect("planned");
                let (_, s) = gen_gaussian_samples(omega.view(), self.n, &mut rng)?;
                (FitProblem::precision(s, self.n, plan.prior.clone())?, None)
            }
            ExperimentModel::Logistic => {
                let beta = plan.beta.as_ref().expect("planned");
                let x = gen_correlated_design(self.n, plan.p, self.rho, &mut rng)?;
                let y = gen_logistic_responses(x.view(), beta.view(), &mut rng)?;
                (FitProblem::logistic(Dataset::logistic(x, y)?, plan.prior.clone(), self.jeffreys)?, None)
            }
            ExperimentModel::Linear | ExperimentModel::Grouped => {
                let beta = plan.beta.as_ref().expect("planned");
                let x = gen_correlated_design(self.n, plan.p, self.rho, &mut rng)?;
                let (delta, noise) = match self.noise.expect("validated") {
                    NoiseSpec::Fixed { delta } => (delta, NoiseModel::FixedVariance(delta * delta)),
                    NoiseSpec::InverseGamma { a, b } => {
                        let g = Gamma::new(a, 1.0 / b).map_err(|e| Error::Config(e.to_string()))?;
                        (1.0 / g.sample(&mut rng).sqrt(), NoiseModel::InverseGammaVariance { a, b })
                    }
                };
                let noise = match noise {
                    // a noiseless design still needs a positive working variance
                    NoiseModel::FixedVariance(v) if v == 0.0 => NoiseModel::FixedVariance(f64::MIN_POSITIVE.sqrt()),
                    other => other,
                };
                let y = gen_linear_responses(x.view(), beta.view(), delta, &mut rng)?;
                let data = Dataset::centered(x, y)?;
                let init = match self.init {
                    InitPolicy::Zero => None,
                    InitPolicy::LeastSquares => {
                        let xtx = data.x().t().dot(data.x());
                        Some(linalg::solve_spd(xtx.view(), data.x().t().dot(data.y()).view())?)
                    }
                };
                let problem = if self.model == ExperimentModel::Grouped {
                    FitProblem::group_linear(data, plan.prior.clone(), noise)?
                } else {
                    FitProblem::linear(data, plan.prior.clone(), noise)?
                };
                (problem, init)
            }
        };
        let fit: FitResult<f64> = match (&plan.lasso_weights, &plan.schedule) {
            (Some(w), _) => fit_fixed_penalty(&problem, w, &plan.opts)?,
            (None, Some(schedule)) => tempered_fit(&problem, schedule, &plan.opts)?,
            (None, None) => fit_map(&problem, &plan.opts, init.as_ref().map(|b| PriorPoint::Coefficients(b.view())))?,
        };
        let score: SupportScore<f64> = match &fit.estimate {
            Estimate::Coefficients(b) => support_metrics(b.view(), plan.beta.as_ref().expect("planned").view())?,
            Estimate::Precision(p) => precision_support_metrics(p.omega.view(), plan.omega.as_ref().expect("planned").view())?,
        };
        Ok(RepOutcome {
            rep,
            error: score.error,
            correct: score.correct,
            false_positives: score.false_positives,
            false_negatives: score.false_negatives,
            converged: fit.converged,
            outer_iterations: fit.outer_iterations,
        })
    }

    fn summarize(&self, outcomes: Vec<RepOutcome>) -> MetricsSummary {
        let r = outcomes.len() as f64;
        let mean = |f: &dyn Fn(&RepOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / r;
        MetricsSummary {
            label: self.label.clone(),
            n: self.n,
            avg_error: mean(&|o| o.error),
            pct_correct: 100.0 * mean(&|o| if o.correct { 1.0 } else { 0.0 }),
            avg_false_positives: mean(&|o| o.false_positives as f64),
            avg_false_negatives: mean(&|o| o.false_negatives as f64),
            nonconverged: outcomes.iter().filter(|o| !o.converged).count(),
            reps: outcomes.len(),
            seed: self.seed,
            generator: GENERATOR.to_string(),
            config: self.clone(),
            outcomes,
        }
    }
}

fn with_rep<T>(rep: u64, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Internal(m) => Error::Internal(format!("replication {rep}: {m}")),
        Error::Domain(m) => Error::Domain(format!("replication {rep}: {m}")),
        other => other,
    })
}

/// Runs replications `1..=reps` in parallel and aggregates them in
/// replication order, so the summary does not depend on scheduling.
pub fn run_replications(config: &ExperimentConfig) -> Result<MetricsSummary> {
    let plan = config.plan()?;
    let outcomes = (1..=config.reps as u64)
        .into_par_iter()
        .map(|rep| with_rep(rep, config.run_one(&plan, rep)))
        .collect::<Result<Vec<_>>>()?;
    Ok(config.summarize(outcomes))
}

/// Single-threaded [`run_replications`].
pub fn run_replications_serial(config: &ExperimentConfig) -> Result<MetricsSummary> {
    let plan = config.plan()?;
    let outcomes = (1..=config.reps as u64)
        .map(|rep| with_rep(rep, config.run_one(&plan, rep)))
        .collect::<Result<Vec<_>>>()?;
    Ok(config.summarize(outcomes))
}
