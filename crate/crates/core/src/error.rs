use thiserror::Error;

/// Errors raised across model construction, solving, and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("moment of order {order} is undefined for shape {shape} (requires shape > order)")]
    MomentUndefined { order: f64, shape: f64 },

    #[error("infeasible moments: variance {var} must exceed squared mean {mean_sq}")]
    InfeasibleMoments { var: f64, mean_sq: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("rank-deficient information matrix")]
    RankDeficient,

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("internal numerical failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
