//! The outer EM loop: E-step weight refresh, M-step inner solve, objective
//! monitoring, and tempered schedules.

mod fit;
mod objective;
mod problem;
mod temper;

pub use fit::{fit_fixed_penalty, fit_map, Estimate, FitResult, InnerFailure, Support};
pub use objective::{log_likelihood, log_likelihood_gradient, penalized_objective};
pub use problem::{FitProblem, ModelKind, ProblemData};
pub use temper::{tempered_fit, TemperSchedule};

pub use crate::model::PriorPoint;
