use ndarray::array;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{log_marginal_prior, PriorPoint, PriorSpec};
use crate::solvers::soft_threshold;

// Largest spacing of the scan that brackets stationary points.
const SCAN_STEP: f64 = 1e-4;

/// One-dimensional prior family for figure data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CurvePrior {
    /// Laplace prior with weight `w = 1/τ`.
    Lasso { weight: f64 },
    /// Laplace with inverse-gamma scale (`q = 1`).
    Hal { a: f64, b: f64 },
    /// Gaussian with inverse-gamma variance scale (`q = 2`).
    Har { a: f64, b: f64 },
}

impl CurvePrior {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            CurvePrior::Lasso { weight } => weight >= 0.0 && weight.is_finite(),
            CurvePrior::Hal { a, b } | CurvePrior::Har { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid prior parameters {self:?}")))
        }
    }

    /// Penalty up to a constant, for `β ≥ 0`.
    fn penalty(&self, beta: f64) -> f64 {
        match *self {
            CurvePrior::Lasso { weight } => weight * beta,
            CurvePrior::Hal { a, b } => (a + 1.0) * (beta / b).ln_1p(),
            CurvePrior::Har { a, b } => (a + 0.5) * (beta * beta / b).ln_1p(),
        }
    }

    /// Right derivative of the penalty, for `β ≥ 0`.
    fn slope(&self, beta: f64) -> f64 {
        match *self {
            CurvePrior::Lasso { weight } => weight,
            CurvePrior::Hal { a, b } => (a + 1.0) / (b + beta),
            CurvePrior::Har { a, b } => (a + 0.5) * 2.0 * beta / (b + beta * beta),
        }
    }

    /// Upper bound of the slope over `β ≥ 0`.
    fn max_slope(&self) -> f64 {
        match *self {
            CurvePrior::Lasso { weight } => weight,
            CurvePrior::Hal { a, b } => (a + 1.0) / b,
            CurvePrior::Har { a, b } => (a + 0.5) / b.sqrt(),
        }
    }

    /// `−log p(β₁) − log p(β₂)` with all constants.
    fn neg_log_density(&self, b1: f64, b2: f64) -> Result<f64> {
        match *self {
            CurvePrior::Lasso { weight } => {
                Ok(-2.0 * (weight / 2.0).ln() + weight * (b1.abs() + b2.abs()))
            }
            CurvePrior::Hal { a, b } | CurvePrior::Har { a, b } => {
                let q = if matches!(self, CurvePrior::Hal { .. }) { 1.0 } else { 2.0 };
                let prior = PriorSpec::per_coordinate(vec![a; 2], vec![b; 2], q)?;
                let point = array![b1, b2];
                Ok(-log_marginal_prior(PriorPoint::Coefficients(point.view()), &prior)?)
            }
        }
    }
}

/// Evenly spaced grid `start, …, stop` with `points` entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::Config("grid must have at least one point".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Config("grid bounds must be finite".into()));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let h = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|k| if k + 1 == self.points { self.stop } else { self.start + h * k as f64 }).collect())
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Global minimizer of `½(z − β)² + pen(β)` for `z ≥ 0`.
fn threshold_nonneg(prior: &CurvePrior, z: f64) -> f64 {
    if let CurvePrior::Lasso { weight } = *prior {
        return soft_threshold(z, weight);
    }
    let obj = |b: f64| 0.5 * (z - b) * (z - b) + prior.penalty(b);
    let grad = |b: f64| b - z + prior.slope(b);
    // Stationary points satisfy z − β = pen'(β) ≤ max_slope.
    let lo = (z - prior.max_slope()).max(0.0);
    let steps = ((z - lo) / SCAN_STEP).ceil().max(1.0) as usize;
    let h = (z - lo) / steps as f64;
    let mut best = (obj(0.0), 0.0);
    let mut prev = (lo, grad(lo));
    let mut consider = |b: f64| {
        let v = obj(b);
        if v < best.0 {
            best = (v, b);
        }
    };
    if prev.1 == 0.0 {
        consider(lo);
    }
    for k in 1..=steps {
        let b = if k == steps { z } else { lo + h * k as f64 };
        let g = grad(b);
        if g == 0.0 {
            consider(b);
        } else if (prev.1 < 0.0 && g > 0.0) || (prev.1 > 0.0 && g < 0.0) {
            consider(bisect(grad, prev.0, b));
        }
        prev = (b, g);
    }
    best.1
}

/// `(z, β̂(z))` for the one-dimensional problem `min ½(z − β)² + pen(β)`.
///
/// The lasso map is the soft threshold. For the hierarchical priors the
/// stationary points are bracketed by a scan with spacing at most `1e-4`,
/// refined by bisection, and compared with `β = 0`.
pub fn threshold_curve(prior: &CurvePrior, z: &[f64]) -> Result<Vec<(f64, f64)>> {
    prior.validate()?;
    if z.is_empty() {
        return Err(Error::Config("grid must have at least one point".into()));
    }
    z.iter()
        .map(|&zi| {
            if !zi.is_finite() {
                return Err(Error::Config("grid values must be finite".into()));
            }
            let b = threshold_nonneg(prior, zi.abs());
            Ok((zi, if zi < 0.0 { -b } else { b }))
        })
        .collect()
}

/// `(β₁, β₂, −log p(β₁) − log p(β₂))` over the product grid, `β₁` outer.
pub fn penalty_contour(prior: &CurvePrior, beta1: &[f64], beta2: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    prior.validate()?;
    if beta1.is_empty() || beta2.is_empty() {
        return Err(Error::Config("grid must have at least one point".into()));
    }
    if let CurvePrior::Lasso { weight } = *prior {
        if weight <= 0.0 {
            return Err(Error::Config("lasso contour needs a positive weight".into()));
        }
    }
    let mut out = Vec::with_capacity(beta1.len() * beta2.len());
    for &b1 in beta1 {
        for &b2 in beta2 {
            out.push((b1, b2, prior.neg_log_density(b1, b2)?));
        }
    }
    Ok(out)
}
