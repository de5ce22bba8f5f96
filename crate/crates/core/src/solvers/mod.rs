//! Inner optimizers for the weighted penalized problems solved in each M-step.

mod dataset;
mod glasso;
mod group;
pub mod kkt;
mod linear;
mod logistic;
mod prox;

pub use dataset::Dataset;
pub use glasso::{glasso_objective, weighted_glasso, weighted_glasso_from, PrecisionEstimate};
pub use group::{group_linear_objective, weighted_group_linear, weighted_group_linear_from};
pub use linear::{
    lasso_linear_objective, weighted_l1_linear, weighted_l1_linear_from, weighted_l2_linear,
};
pub use logistic::{
    logistic_jeffreys_gradient, logistic_jeffreys_logdet, logistic_nll, logistic_nll_gradient,
    logistic_objective, weighted_l1_logistic, weighted_l1_logistic_from,
    weighted_logistic_from, LogisticPenalty,
};
pub use prox::{group_soft_threshold, soft_threshold};

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::Scalar;

/// Tolerances and iteration caps shared by the inner and outer loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Sup-norm change (and stationarity residual) below which a solve stops.
    pub tol: T,
    /// Inner iteration cap (sweeps or proximal steps).
    pub max_iter: usize,
    /// EM iteration cap used by the fitting driver.
    pub outer_max_iter: usize,
    /// First trial step of the backtracking line search.
    pub initial_step: T,
    /// Factor applied to the step after a failed sufficient-decrease test.
    pub step_shrink: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::default_tol(),
            max_iter: 10_000,
            outer_max_iter: 100,
            initial_step: T::one(),
            step_shrink: T::lit(0.5),
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 || self.outer_max_iter == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        if !(self.initial_step > T::zero())
            || !(self.step_shrink > T::zero() && self.step_shrink < T::one())
        {
            return Err(Error::Config("invalid backtracking parameters".into()));
        }
        Ok(())
    }
}

/// Result of one inner solve. A solve that hits its iteration cap is still
/// returned, with `converged = false` and the last iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution<T> {
    pub coef: Array1<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Stationarity residual at `coef` as tracked by the solver.
    pub residual: T,
    /// Inner objective after each sweep or accepted step (first entry: start).
    pub objective_trace: Vec<T>,
}
