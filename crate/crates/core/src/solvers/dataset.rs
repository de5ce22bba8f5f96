use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::Scalar;

/// Design matrix and response.
///
/// For linear models the response and every column are centered, which
/// integrates out a flat-prior intercept; logistic data is left as given.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Array2<T>,
    y: Array1<T>,
    centered: bool,
    y_mean: T,
    col_means: Array1<T>,
}

impl<T: Scalar> Dataset<T> {
    /// Raw data, used as given.
    pub fn new(x: Array2<T>, y: Array1<T>) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(Error::Config(format!("design must be non-empty, got {n}×{p}")));
        }
        if y.len() != n {
            return Err(Error::Dimension { expected: n, found: y.len() });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("data contains non-finite values".into()));
        }
        Ok(Self { x, y, centered: false, y_mean: T::zero(), col_means: Array1::zeros(p) })
    }

    /// Centers the response and every column.
    pub fn centered(x: Array2<T>, y: Array1<T>) -> Result<Self> {
        let raw = Self::new(x, y)?;
        let n = T::from_usize_lossy(raw.n());
        let col_means = raw.x.sum_axis(Axis(0)) / n;
        let y_mean = raw.y.sum() / n;
        let x = &raw.x - &col_means.view().insert_axis(Axis(0));
        let y = raw.y.mapv(|v| v - y_mean);
        Ok(Self { x, y, centered: true, y_mean, col_means })
    }

    /// Binary labels in `{−1, +1}`.
    pub fn logistic(x: Array2<T>, y: Array1<T>) -> Result<Self> {
        if let Some(i) = y.iter().position(|&v| v != T::one() && v != -T::one()) {
            return Err(Error::Domain(format!(
                "logistic labels must be -1 or +1 (row {i} has {})",
                y[i]
            )));
        }
        Self::new(x, y)
    }

    pub fn x(&self) -> &Array2<T> {
        &self.x
    }

    pub fn y(&self) -> &Array1<T> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn y_mean(&self) -> T {
        self.y_mean
    }

    pub fn col_means(&self) -> &Array1<T> {
        &self.col_means
    }
}
