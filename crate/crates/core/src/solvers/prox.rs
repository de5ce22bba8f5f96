use ndarray::{Array1, ArrayView1};

use crate::Scalar;

/// Proximal operator of `γ|·|`: `sign(z)·max(|z| − γ, 0)`.
#[inline]
pub fn soft_threshold<T: Scalar>(z: T, gamma: T) -> T {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        T::zero()
    }
}

/// Proximal operator of `γ‖·‖₂`: `z·max(0, 1 − γ/‖z‖₂)`.
pub fn group_soft_threshold<T: Scalar>(z: ArrayView1<'_, T>, gamma: T) -> Array1<T> {
    let norm = z.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if norm <= gamma {
        Array1::zeros(z.len())
    } else {
        let scale = T::one() - gamma / norm;
        z.mapv(|x| x * scale)
    }
}
