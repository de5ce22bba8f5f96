use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Which level of the hierarchy carries the latent scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorVariant {
    /// One inverse-gamma scale per coefficient (HAL / HAR).
    PerCoordinate,
    /// One scale per group on the group ℓ2 norm (hierarchical adaptive group lasso).
    Grouped,
    /// One exponential-power scale shared by all members of a group.
    SharedGroups,
    /// One scale per upper-triangular entry of a precision matrix.
    Matrix,
}

/// Partition of `0..p` into `K` non-empty groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStructure {
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl GroupStructure {
    /// Builds from a per-coordinate group index (0-based). Group ids must
    /// cover `0..K` with no gaps.
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::Config("group assignment is empty".into()));
        }
        let k = assignment.iter().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); k];
        for (j, &g) in assignment.iter().enumerate() {
            members[g].push(j);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(Error::Config(format!("group {empty} has no members")));
        }
        Ok(Self { assignment, members })
    }

    /// Builds from explicit index lists (0-based), which must partition `0..p`.
    pub fn from_partition(groups: &[Vec<usize>], p: usize) -> Result<Self> {
        let mut assignment = vec![usize::MAX; p];
        for (g, idx) in groups.iter().enumerate() {
            if idx.is_empty() {
                return Err(Error::Config(format!("group {g} has no members")));
            }
            for &j in idx {
                if j >= p {
                    return Err(Error::Config(format!(
                        "group {g} references coordinate {j} outside 0..{p}"
                    )));
                }
                if assignment[j] != usize::MAX {
                    return Err(Error::Config(format!(
                        "coordinate {j} assigned to groups {} and {g}",
                        assignment[j]
                    )));
                }
                assignment[j] = g;
            }
        }
        if let Some(j) = assignment.iter().position(|&g| g == usize::MAX) {
            return Err(Error::Config(format!("coordinate {j} is not assigned to any group")));
        }
        Self::from_assignment(assignment)
    }

    /// Consecutive blocks of `size` coordinates.
    pub fn contiguous(p: usize, size: usize) -> Result<Self> {
        if size == 0 || p == 0 || p % size != 0 {
            return Err(Error::Config(format!("cannot split {p} coordinates into blocks of {size}")));
        }
        Self::from_assignment((0..p).map(|j| j / size).collect())
    }

    /// Every coordinate in one group.
    pub fn single(p: usize) -> Result<Self> {
        Self::from_assignment(vec![0; p])
    }

    /// Every coordinate in its own group.
    pub fn singletons(p: usize) -> Result<Self> {
        Self::from_assignment((0..p).collect())
    }

    pub fn num_coords(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_groups(&self) -> usize {
        self.members.len()
    }

    pub fn group_of(&self, j: usize) -> usize {
        self.assignment[j]
    }

    pub fn members(&self, g: usize) -> &[usize] {
        &self.members[g]
    }

    pub fn size(&self, g: usize) -> usize {
        self.members[g].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.members
    }
}

/// Shared `(a, b)` with optional per-index replacements.
///
/// Override keys are 1-based to match how settings such as
/// `(a₂, b₂, a₅, b₅) = (2, 2, 2, 2)` are usually written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyper<T> {
    pub a: T,
    pub b: T,
    #[serde(default)]
    pub overrides: BTreeMap<usize, (T, T)>,
}

impl<T: Scalar> Hyper<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { a, b, overrides: BTreeMap::new() }
    }

    pub fn with_override(mut self, index_one_based: usize, a: T, b: T) -> Self {
        self.overrides.insert(index_one_based, (a, b));
        self
    }

    /// Broadcasts to `len` entries and applies overrides.
    pub fn expand(&self, len: usize) -> Result<(Vec<T>, Vec<T>)> {
        let mut a = vec![self.a; len];
        let mut b = vec![self.b; len];
        for (&k, &(ak, bk)) in &self.overrides {
            if k == 0 || k > len {
                return Err(Error::Config(format!(
                    "override index {k} outside 1..={len}"
                )));
            }
            a[k - 1] = ak;
            b[k - 1] = bk;
        }
        Ok((a, b))
    }
}

/// Number of entries `i ≤ j` of a `p × p` matrix.
pub fn tri_len(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Row-major position of entry `(i, j)`, `i ≤ j`, in the packed upper triangle.
pub fn tri_index(p: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * p - i - 1) / 2 + j
}

/// Hyperparameters of one hierarchical prior.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec<T> {
    variant: PriorVariant,
    dim: usize,
    a: Vec<T>,
    b: Vec<T>,
    q: T,
    groups: Option<GroupStructure>,
}

impl<T: Scalar> PriorSpec<T> {
    /// Independent scale per coordinate; `q = 1` gives HAL, `q = 2` HAR.
    pub fn per_coordinate(a: Vec<T>, b: Vec<T>, q: T) -> Result<Self> {
        let dim = a.len();
        Self::validated(PriorVariant::PerCoordinate, dim, a, b, q, None)
    }

    pub fn grouped(a: Vec<T>, b: Vec<T>, groups: GroupStructure) -> Result<Self> {
        let dim = groups.num_coords();
        Self::validated(PriorVariant::Grouped, dim, a, b, T::one(), Some(groups))
    }

    pub fn shared_groups(a: Vec<T>, b: Vec<T>, q: T, groups: GroupStructure) -> Result<Self> {
        let dim = groups.num_coords();
        Self::validated(PriorVariant::SharedGroups, dim, a, b, q, Some(groups))
    }

    /// Precision-matrix prior; `a` and `b` hold the packed upper triangle
    /// (diagonal included), see [`tri_index`].
    pub fn matrix(p: usize, a: Vec<T>, b: Vec<T>) -> Result<Self> {
        Self::validated(PriorVariant::Matrix, p, a, b, T::one(), None)
    }

    pub fn matrix_uniform(p: usize, a: T, b: T) -> Result<Self> {
        let m = tri_len(p);
        Self::matrix(p, vec![a; m], vec![b; m])
    }

    fn validated(
        variant: PriorVariant,
        dim: usize,
        a: Vec<T>,
        b: Vec<T>,
        q: T,
        groups: Option<GroupStructure>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("prior dimension must be at least 1".into()));
        }
        let expected = match variant {
            PriorVariant::PerCoordinate => dim,
            PriorVariant::Grouped | PriorVariant::SharedGroups => groups
                .as_ref()
                .ok_or_else(|| Error::Config("grouped prior requires a group structure".into()))?
                .num_groups(),
            PriorVariant::Matrix => tri_len(dim),
        };
        if a.len() != b.len() {
            return Err(Error::Dimension { expected: a.len(), found: b.len() });
        }
        if a.len() != expected {
            return Err(Error::Dimension { expected, found: a.len() });
        }
        if !(q > T::zero()) || !q.is_finite() {
            return Err(Error::Config(format!("exponent q must be positive, got {q}")));
        }
        if matches!(variant, PriorVariant::Grouped | PriorVariant::Matrix) && q != T::one() {
            return Err(Error::Config("grouped and matrix priors require q = 1".into()));
        }
        for (k, (&ak, &bk)) in a.iter().zip(&b).enumerate() {
            if !(ak > T::zero()) || !ak.is_finite() {
                return Err(Error::Config(format!(
                    "shape a must be strictly positive and finite (index {}: {ak})",
                    k + 1
                )));
            }
            if !(bk > T::zero()) || !bk.is_finite() {
                return Err(Error::Config(format!(
                    "scale b must be strictly positive and finite (index {}: {bk})",
                    k + 1
                )));
            }
        }
        Ok(Self { variant, dim, a, b, q, groups })
    }

    pub fn variant(&self) -> PriorVariant {
        self.variant
    }

    /// Number of coefficients, or the matrix order for [`PriorVariant::Matrix`].
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn groups(&self) -> Option<&GroupStructure> {
        self.groups.as_ref()
    }

    /// Same prior with every `a` and `b` multiplied by the given factors.
    pub fn scaled(&self, a_scale: T, b_scale: T) -> Result<Self> {
        Self::validated(
            self.variant,
            self.dim,
            self.a.iter().map(|&x| x * a_scale).collect(),
            self.b.iter().map(|&x| x * b_scale).collect(),
            self.q,
            self.groups.clone(),
        )
    }
}

/// Observation noise for the linear models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel<T> {
    FixedVariance(T),
    InverseGammaVariance { a: T, b: T },
}

impl<T: Scalar> NoiseModel<T> {
    pub fn fixed(variance: T) -> Result<Self> {
        if variance > T::zero() && variance.is_finite() {
            Ok(Self::FixedVariance(variance))
        } else {
            Err(Error::Config(format!("noise variance must be positive, got {variance}")))
        }
    }

    pub fn inverse_gamma(a: T, b: T) -> Result<Self> {
        if a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite() {
            Ok(Self::InverseGammaVariance { a, b })
        } else {
            Err(Error::Config(format!(
                "inverse-gamma noise parameters must be positive, got ({a}, {b})"
            )))
        }
    }
}
