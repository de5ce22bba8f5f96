//! Sparse MAP estimation under hierarchical sparsity-inducing priors.
//!
//! Each coefficient (or group, or precision-matrix entry) gets a Laplace or
//! exponential-power prior whose scale carries an inverse-gamma hyperprior.
//! The resulting posterior mode is found by EM: the E-step turns the current
//! estimate into penalty weights, the M-step solves a weighted penalized
//! problem (lasso, ridge, group lasso, logistic, or graphical lasso).
//!
//! Modules:
//! - [`model`]: priors, weight updates, marginal densities, moments.
//! - [`solvers`]: inner optimizers and KKT checks.
//! - [`em`]: the outer EM loop, tempering, and objectives.
//! - [`sim`]: synthetic data, replicated experiments, figure data.
//!
//! The numerical code is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix it to `f64`.

pub mod em;
pub mod error;
pub mod linalg;
pub mod model;
mod scalar;
pub mod sim;
pub mod solvers;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type PriorSpec64 = model::PriorSpec<f64>;
pub type WeightSet64 = model::WeightSet<f64>;
pub type NoiseModel64 = model::NoiseModel<f64>;
pub type Hyper64 = model::Hyper<f64>;
pub type Dataset64 = solvers::Dataset<f64>;
pub type SolverOptions64 = solvers::SolverOptions<f64>;
pub type PrecisionEstimate64 = solvers::PrecisionEstimate<f64>;
pub type FitProblem64 = em::FitProblem<f64>;
pub type FitResult64 = em::FitResult<f64>;
pub type TemperSchedule64 = em::TemperSchedule<f64>;

pub type PriorSpec32 = model::PriorSpec<f32>;
pub type Dataset32 = solvers::Dataset<f32>;
pub type SolverOptions32 = solvers::SolverOptions<f32>;
pub type FitProblem32 = em::FitProblem<f32>;
pub type FitResult32 = em::FitResult<f32>;
