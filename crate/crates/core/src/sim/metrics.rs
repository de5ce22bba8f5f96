use ndarray::{ArrayView1, ArrayView2};

use crate::error::{check_len, Result};
use crate::Scalar;

/// Distance to the truth and support agreement for one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportScore<T> {
    pub error: T,
    pub correct: bool,
    pub false_positives: usize,
    pub false_negatives: usize,
}

fn score<T: Scalar>(sq_error: T, pairs: impl Iterator<Item = (T, T)>) -> SupportScore<T> {
    let (mut fp, mut fneg) = (0, 0);
    for (e, t) in pairs {
        if t == T::zero() && e != T::zero() {
            fp += 1;
        }
        if t != T::zero() && e == T::zero() {
            fneg += 1;
        }
    }
    SupportScore { error: sq_error.sqrt(), correct: fp == 0 && fneg == 0, false_positives: fp, false_negatives: fneg }
}

/// ℓ2 error and exact-zero support comparison of a coefficient vector.
pub fn support_metrics<T: Scalar>(estimate: ArrayView1<'_, T>, truth: ArrayView1<'_, T>) -> Result<SupportScore<T>> {
    check_len(truth.len(), estimate.len())?;
    let sq = estimate.iter().zip(truth.iter()).map(|(e, t)| (*e - *t) * (*e - *t)).sum();
    Ok(score(sq, estimate.iter().copied().zip(truth.iter().copied())))
}

/// Frobenius error over the upper triangle (diagonal included) and support
/// comparison over the off-diagonal entries `i < j`.
pub fn precision_support_metrics<T: Scalar>(estimate: ArrayView2<'_, T>, truth: ArrayView2<'_, T>) -> Result<SupportScore<T>> {
    let p = truth.nrows();
    check_len(p, truth.ncols())?;
    check_len(p, estimate.nrows())?;
    check_len(p, estimate.ncols())?;
    let mut sq = T::zero();
    for i in 0..p {
        for j in i..p {
            let d = estimate[[i, j]] - truth[[i, j]];
            sq += d * d;
        }
    }
    let off = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j)));
    Ok(score(sq, off.map(|(i, j)| (estimate[[i, j]], truth[[i, j]]))))
}
