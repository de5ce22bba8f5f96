use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{NoiseModel, PriorSpec, PriorVariant};
use crate::solvers::Dataset;
use crate::Scalar;

/// Likelihood family and hierarchy combination being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    LinearFixedNoise,
    LinearRandomNoise,
    Logistic,
    GroupLinear,
    SharedLinear,
    Precision,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemData<T> {
    Regression(Dataset<T>),
    /// Sample covariance `S = (1/n) Σ xᵢxᵢᵀ` and the sample size.
    Covariance { s: Array2<T>, n: usize },
}

/// A fully specified MAP problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem<T> {
    model: ModelKind,
    data: ProblemData<T>,
    prior: PriorSpec<T>,
    noise: Option<NoiseModel<T>>,
    jeffreys: bool,
}

impl<T: Scalar> FitProblem<T> {
    pub fn new(
        model: ModelKind,
        data: ProblemData<T>,
        prior: PriorSpec<T>,
        noise: Option<NoiseModel<T>>,
        jeffreys: bool,
    ) -> Result<Self> {
        let problem = Self { model, data, prior, noise, jeffreys };
        problem.validate()?;
        Ok(problem)
    }

    /// Linear regression; the noise model selects fixed or random variance.
    pub fn linear(data: Dataset<T>, prior: PriorSpec<T>, noise: NoiseModel<T>) -> Result<Self> {
        let model = match noise {
            NoiseModel::FixedVariance(_) => ModelKind::LinearFixedNoise,
            NoiseModel::InverseGammaVariance { .. } => ModelKind::LinearRandomNoise,
        };
        Self::new(model, ProblemData::Regression(data), prior, Some(noise), false)
    }

    pub fn logistic(data: Dataset<T>, prior: PriorSpec<T>, jeffreys: bool) -> Result<Self> {
        Self::new(ModelKind::Logistic, ProblemData::Regression(data), prior, None, jeffreys)
    }

    pub fn group_linear(data: Dataset<T>, prior: PriorSpec<T>, noise: NoiseModel<T>) -> Result<Self> {
        Self::new(ModelKind::GroupLinear, ProblemData::Regression(data), prior, Some(noise), false)
    }

    pub fn shared_linear(data: Dataset<T>, prior: PriorSpec<T>, noise: NoiseModel<T>) -> Result<Self> {
        Self::new(ModelKind::SharedLinear, ProblemData::Regression(data), prior, Some(noise), false)
    }

    pub fn precision(s: Array2<T>, n: usize, prior: PriorSpec<T>) -> Result<Self> {
        Self::new(ModelKind::Precision, ProblemData::Covariance { s, n }, prior, None, false)
    }

    fn validate(&self) -> Result<()> {
        let q = self.prior.q();
        let q_ok = q == T::one() || q == T::lit(2.0);
        let need = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(Error::Config(msg.into())) };
        match self.model {
            ModelKind::Precision => {
                need(self.prior.variant() == PriorVariant::Matrix, "precision model needs a matrix prior")?;
                let ProblemData::Covariance { s, n } = &self.data else {
                    return Err(Error::Config("precision model needs a sample covariance".into()));
                };
                let p = s.nrows();
                if s.ncols() != p || p != self.prior.dim() {
                    return Err(Error::Dimension { expected: self.prior.dim(), found: s.ncols() });
                }
                if *n <= p + 1 {
                    return Err(Error::Infeasible(format!("need n > p + 1 (n = {n}, p = {p})")));
                }
                if !linalg::is_symmetric(s.view(), T::lit(1e-10)) {
                    return Err(Error::Domain("sample covariance is not symmetric".into()));
                }
                Ok(())
            }
            model => {
                let ProblemData::Regression(data) = &self.data else {
                    return Err(Error::Config("regression model needs a dataset".into()));
                };
                if data.p() != self.prior.dim() {
                    return Err(Error::Dimension { expected: self.prior.dim(), found: data.p() });
                }
                match model {
                    ModelKind::Logistic => {
                        need(self.prior.variant() == PriorVariant::PerCoordinate, "logistic model needs a per-coordinate prior")?;
                        need(q_ok, "only q = 1 or q = 2 is supported")?;
                        if data.y().iter().any(|&v| v != T::one() && v != -T::one()) {
                            return Err(Error::Domain("logistic labels must be -1 or +1".into()));
                        }
                        Ok(())
                    }
                    _ => {
                        need(data.is_centered(), "linear models need centered data")?;
                        if data.n() < 2 {
                            return Err(Error::Domain("linear models need at least 2 observations".into()));
                        }
                        let noise = self.noise.ok_or_else(|| Error::Config("linear model needs a noise model".into()))?;
                        match model {
                            ModelKind::LinearFixedNoise => {
                                need(matches!(noise, NoiseModel::FixedVariance(_)), "fixed-noise model needs a fixed variance")?;
                                need(self.prior.variant() == PriorVariant::PerCoordinate, "linear model needs a per-coordinate prior")?;
                                need(q_ok, "only q = 1 or q = 2 is supported")
                            }
                            ModelKind::LinearRandomNoise => {
                                need(matches!(noise, NoiseModel::InverseGammaVariance { .. }), "random-noise model needs inverse-gamma noise")?;
                                need(self.prior.variant() == PriorVariant::PerCoordinate, "linear model needs a per-coordinate prior")?;
                                need(q_ok, "only q = 1 or q = 2 is supported")
                            }
                            ModelKind::GroupLinear => {
                                need(self.prior.variant() == PriorVariant::Grouped, "group model needs a grouped prior")
                            }
                            ModelKind::SharedLinear => {
                                need(self.prior.variant() == PriorVariant::SharedGroups, "shared model needs a shared-groups prior")?;
                                need(q_ok, "only q = 1 or q = 2 is supported")
                            }
                            _ => unreachable!(),
                        }
                    }
                }
            }
        }
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn data(&self) -> &ProblemData<T> {
        &self.data
    }

    pub fn dataset(&self) -> Option<&Dataset<T>> {
        match &self.data {
            ProblemData::Regression(d) => Some(d),
            ProblemData::Covariance { .. } => None,
        }
    }

    pub fn prior(&self) -> &PriorSpec<T> {
        &self.prior
    }

    pub fn noise(&self) -> Option<&NoiseModel<T>> {
        self.noise.as_ref()
    }

    pub fn jeffreys(&self) -> bool {
        self.jeffreys
    }

    /// Number of free parameters in the estimate (coefficients or matrix order).
    pub fn dim(&self) -> usize {
        self.prior.dim()
    }

    /// Same problem under a different prior of the same shape.
    pub fn with_prior(&self, prior: PriorSpec<T>) -> Result<Self> {
        Self::new(self.model, self.data.clone(), prior, self.noise, self.jeffreys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn data() -> Dataset<f64> {
        Dataset::centered(array![[1.0, 2.0], [0.5, -1.0], [2.0, 0.0]], array![1.0, 0.0, 2.0])
            .unwrap()
    }

    #[test]
    fn compatibility_checks() {
        let hal = PriorSpec::per_coordinate(vec![2.0; 2], vec![0.1; 2], 1.0).unwrap();
        let fixed = NoiseModel::fixed(1.0).unwrap();
        assert!(FitProblem::linear(data(), hal.clone(), fixed).is_ok());
        let raw = Dataset::new(array![[1.0, 2.0], [0.5, -1.0]], array![1.0, 0.0]).unwrap();
        assert!(FitProblem::linear(raw, hal.clone(), fixed).is_err());
        let cubic = PriorSpec::per_coordinate(vec![2.0; 2], vec![0.1; 2], 3.0).unwrap();
        assert!(FitProblem::linear(data(), cubic, fixed).is_err());
        assert!(FitProblem::logistic(data(), hal.clone(), false).is_err());
        let m = PriorSpec::matrix_uniform(2, 1.0, 0.1).unwrap();
        assert!(FitProblem::precision(Array2::eye(2), 4, m.clone()).is_ok());
        assert!(matches!(
            FitProblem::precision(Array2::eye(2), 3, m),
            Err(Error::Infeasible(_))
        ));
        assert!(FitProblem::precision(Array2::eye(2), 10, hal).is_err());
    }
}
