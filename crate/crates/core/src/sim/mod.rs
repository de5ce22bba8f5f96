//! Synthetic data, support metrics, replicated experiments and figure data.
//!
//! Replication `r` (1-based) of an experiment with master seed `s` draws from
//! `ChaCha20Rng::seed_from_u64(s)` switched to stream `r`. Streams are
//! independent counter-based sequences, so a replication's data does not
//! depend on how many replications run or in what order.

mod curves;
mod data;
mod experiment;
mod metrics;
mod presets;

pub use curves::{penalty_contour, threshold_curve, CurvePrior, Grid};
pub use data::{gen_correlated_design, gen_gaussian_samples, gen_linear_responses, gen_logistic_responses};
pub use experiment::{
    run_replications, run_replications_serial, ExperimentConfig, ExperimentModel, InitPolicy,
    Method, MetricsSummary, NoiseSpec, RepOutcome, SolverSettings,
};
pub use metrics::{precision_support_metrics, support_metrics, SupportScore};
pub use presets::{paper_precision_truth, preset, preset_names, PAPER_BETA};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Name of the generator recorded alongside every harness output.
pub const GENERATOR: &str = "chacha20 (rand_chacha 0.9, seed_from_u64 + set_stream)";

/// Stream for replication `rep` under `master_seed`.
pub fn rep_stream(master_seed: u64, rep: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(rep);
    rng
}
