use serde::{Deserialize, Serialize};

use super::fit::{fit_map, FitResult};
use super::problem::FitProblem;
use crate::error::{Error, Result};
use crate::solvers::SolverOptions;
use crate::Scalar;

/// Stages of `(a_scale, b_scale)` multipliers; the last stage must be `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperSchedule<T> {
    stages: Vec<(T, T)>,
}

impl<T: Scalar> TemperSchedule<T> {
    pub fn new(stages: Vec<(T, T)>) -> Result<Self> {
        let s = Self { stages };
        s.validate()?;
        Ok(s)
    }

    pub fn identity() -> Self {
        Self { stages: vec![(T::one(), T::one())] }
    }

    /// Stages scaling only `b`, ending at `b × 1`.
    pub fn b_scales(scales: &[T]) -> Result<Self> {
        Self::new(scales.iter().map(|&s| (T::one(), s)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let Some(&last) = self.stages.last() else {
            return Err(Error::Config("schedule needs at least one stage".into()));
        };
        if self.stages.iter().any(|&(a, b)| !(a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite())) {
            return Err(Error::Config("schedule multipliers must be positive".into()));
        }
        if last != (T::one(), T::one()) {
            return Err(Error::Config("final stage must be the identity (1, 1)".into()));
        }
        Ok(())
    }

    pub fn stages(&self) -> &[(T, T)] {
        &self.stages
    }
}

/// Runs [`fit_map`] once per stage with the prior's `a` and `b` scaled,
/// warm-starting each stage at the previous estimate. Returns the last
/// stage's result with earlier stage traces in `stage_traces`.
pub fn tempered_fit<T: Scalar>(
    problem: &FitProblem<T>,
    schedule: &TemperSchedule<T>,
    opts: &SolverOptions<T>,
) -> Result<FitResult<T>> {
    schedule.validate()?;
    let mut traces = Vec::new();
    let mut previous: Option<FitResult<T>> = None;
    for &(sa, sb) in schedule.stages() {
        let staged = if (sa, sb) == (T::one(), T::one()) {
            problem.clone()
        } else {
            problem.with_prior(problem.prior().scaled(sa, sb)?)?
        };
        let result = match &previous {
            None => fit_map(&staged, opts, None)?,
            Some(prev) => fit_map(&staged, opts, Some(prev.estimate.point()))?,
        };
        if let Some(prev) = previous.take() {
            traces.push(prev.objective_trace);
        }
        previous = Some(result);
    }
    let mut result = previous.ok_or_else(|| Error::Internal("empty schedule".into()))?;
    result.stage_traces = traces;
    Ok(result)
}
