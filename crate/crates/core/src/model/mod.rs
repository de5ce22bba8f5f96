//! Hierarchical priors: specifications, EM weight updates, marginal densities,
//! and hyperparameter moment utilities.

mod density;
mod moments;
mod prior;
mod weights;

pub use density::{log_marginal_prior, PriorPoint};
pub use moments::{hyperparams_from_mean_var, prior_moment};
pub use prior::{tri_index, tri_len, GroupStructure, Hyper, NoiseModel, PriorSpec, PriorVariant};
pub use weights::{
    coordinate_weights, group_weights, noise_weight, precision_weights, shared_group_weights,
    WeightSet,
};
