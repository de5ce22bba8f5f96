use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::prior::{tri_index, GroupStructure, NoiseModel, PriorSpec, PriorVariant};
use crate::error::{check_len, Error, Result};
use crate::Scalar;

/// Penalty weights produced by one E-step.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSet<T> {
    /// `w_j` multiplying `|β_j|^q`.
    PerCoordinate(Array1<T>),
    /// `w_i` multiplying `‖β_{G_i}‖₂`.
    PerGroup(Array1<T>),
    /// `w_i` multiplying `Σ_{j∈G_i} |β_j|^q`.
    SharedGroups(Array1<T>),
    /// Symmetric `W` with `W_ij` multiplying `|Ω_ij|` for `i ≤ j`.
    Matrix(Array2<T>),
}

impl<T: Scalar> WeightSet<T> {
    /// Per-coordinate view; shared-group weights are broadcast to members.
    pub fn coordinate_weights(&self, groups: Option<&GroupStructure>) -> Result<Array1<T>> {
        match self {
            WeightSet::PerCoordinate(w) => Ok(w.clone()),
            WeightSet::SharedGroups(w) => {
                let g = groups.ok_or_else(|| {
                    Error::Config("shared-group weights need the group structure".into())
                })?;
                check_len(g.num_groups(), w.len())?;
                Ok(Array1::from_shape_fn(g.num_coords(), |j| w[g.group_of(j)]))
            }
            _ => Err(Error::Config("weights are not coordinate-wise".into())),
        }
    }

    pub fn values(&self) -> Vec<T> {
        match self {
            WeightSet::PerCoordinate(w) | WeightSet::PerGroup(w) | WeightSet::SharedGroups(w) => {
                w.to_vec()
            }
            WeightSet::Matrix(m) => m.iter().copied().collect(),
        }
    }

    pub fn all_positive_finite(&self) -> bool {
        self.values().iter().all(|w| w.is_finite() && *w > T::zero())
    }
}

fn check_finite<T: Scalar>(beta: ArrayView1<'_, T>) -> Result<()> {
    match beta.iter().position(|b| !b.is_finite()) {
        Some(j) => Err(Error::Domain(format!("coefficient {j} is not finite"))),
        None => Ok(()),
    }
}

fn expect_variant<T: Scalar>(prior: &PriorSpec<T>, v: PriorVariant) -> Result<()> {
    if prior.variant() == v {
        Ok(())
    } else {
        Err(Error::Config(format!("expected a {v:?} prior, got {:?}", prior.variant())))
    }
}

/// `w_j = (a_j + 1/q) / (b_j + |β_j|^q)`.
pub fn coordinate_weights<T: Scalar>(
    beta: ArrayView1<'_, T>,
    prior: &PriorSpec<T>,
) -> Result<WeightSet<T>> {
    expect_variant(prior, PriorVariant::PerCoordinate)?;
    check_len(prior.dim(), beta.len())?;
    check_finite(beta)?;
    let q = prior.q();
    let inv_q = q.recip();
    let w = Array1::from_shape_fn(beta.len(), |j| {
        (prior.a()[j] + inv_q) / (prior.b()[j] + beta[j].abs().powf(q))
    });
    Ok(WeightSet::PerCoordinate(w))
}

/// `w_i = (a_i + n_i) / (‖β_{G_i}‖₂ + b_i)`.
pub fn group_weights<T: Scalar>(
    beta: ArrayView1<'_, T>,
    prior: &PriorSpec<T>,
) -> Result<WeightSet<T>> {
    expect_variant(prior, PriorVariant::Grouped)?;
    let groups = prior
        .groups()
        .ok_or_else(|| Error::Config("grouped prior has no group structure".into()))?;
    check_len(groups.num_coords(), beta.len())?;
    check_finite(beta)?;
    let w = Array1::from_shape_fn(groups.num_groups(), |g| {
        let norm = groups.members(g).iter().map(|&j| beta[j] * beta[j]).sum::<T>().sqrt();
        (prior.a()[g] + T::from_usize_lossy(groups.size(g))) / (norm + prior.b()[g])
    });
    Ok(WeightSet::PerGroup(w))
}

/// `w_i = (a_i + n_i/q) / (b_i + Σ_{j∈G_i} |β_j|^q)`.
pub fn shared_group_weights<T: Scalar>(
    beta: ArrayView1<'_, T>,
    prior: &PriorSpec<T>,
) -> Result<WeightSet<T>> {
    expect_variant(prior, PriorVariant::SharedGroups)?;
    let q = prior.q();
    if !(q > T::zero()) {
        return Err(Error::Domain(format!("exponent q must be positive, got {q}")));
    }
    let groups = prior
        .groups()
        .ok_or_else(|| Error::Config("shared-group prior has no group structure".into()))?;
    check_len(groups.num_coords(), beta.len())?;
    check_finite(beta)?;
    let w = Array1::from_shape_fn(groups.num_groups(), |g| {
        let s = groups.members(g).iter().map(|&j| beta[j].abs().powf(q)).sum::<T>();
        (prior.a()[g] + T::from_usize_lossy(groups.size(g)) / q) / (prior.b()[g] + s)
    });
    Ok(WeightSet::SharedGroups(w))
}

/// `W_ij = (a_ij + 1) / (b_ij + |Ω_ij|)`, filled symmetrically.
pub fn precision_weights<T: Scalar>(
    omega: ArrayView2<'_, T>,
    prior: &PriorSpec<T>,
) -> Result<WeightSet<T>> {
    expect_variant(prior, PriorVariant::Matrix)?;
    let p = prior.dim();
    check_len(p, omega.nrows())?;
    check_len(p, omega.ncols())?;
    if omega.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("precision matrix has non-finite entries".into()));
    }
    if !crate::linalg::is_symmetric(omega, T::lit(1e-10)) {
        return Err(Error::Domain("precision matrix is not symmetric".into()));
    }
    let mut w = Array2::<T>::zeros((p, p));
    for i in 0..p {
        for j in i..p {
            let k = tri_index(p, i, j);
            let v = (prior.a()[k] + T::one()) / (prior.b()[k] + omega[[i, j]].abs());
            w[[i, j]] = v;
            w[[j, i]] = v;
        }
    }
    Ok(WeightSet::Matrix(w))
}

/// `v = (a_δ + (n−1)/2) / (b_δ + rss/2)`, the expected noise precision.
pub fn noise_weight<T: Scalar>(rss: T, n: usize, noise: &NoiseModel<T>) -> Result<T> {
    let (a, b) = match *noise {
        NoiseModel::InverseGammaVariance { a, b } => (a, b),
        NoiseModel::FixedVariance(_) => {
            return Err(Error::Config("noise_weight needs an inverse-gamma noise model".into()))
        }
    };
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 observations, got {n}")));
    }
    if !(rss >= T::zero()) || !rss.is_finite() {
        return Err(Error::Domain(format!("residual sum of squares must be ≥ 0, got {rss}")));
    }
    let half = T::lit(0.5);
    Ok((a + T::from_usize_lossy(n - 1) * half) / (b + rss * half))
}
