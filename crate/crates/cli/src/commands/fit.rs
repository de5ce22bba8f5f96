use std::path::Path;

use hiersparse_core::em::{fit_map, FitProblem, FitResult, PriorPoint};
use hiersparse_core::linalg;
use hiersparse_core::model::{tri_index, tri_len, GroupStructure, Hyper, NoiseModel, PriorSpec, PriorVariant, WeightSet};
use hiersparse_core::sim::{InitPolicy, GENERATOR};
use hiersparse_core::solvers::Dataset;
use ndarray::{s, Array1, Axis};

use crate::config::{read_json, FitConfig, FitModel, NoiseConfig};
use crate::data::{read_table, Table};
use crate::error::{input, CliError, CliResult};
use crate::output::{self, Cell, Provenance, RunManifest};

pub struct FitArgs<'a> {
    pub config: &'a Path,
    pub data: &'a Path,
    pub out: &'a Path,
    pub seed: Option<u64>,
}

fn resolve_variant(cfg: &FitConfig) -> PriorVariant {
    cfg.prior.variant.unwrap_or(match (cfg.model, &cfg.prior.groups) {
        (FitModel::Precision, _) => PriorVariant::Matrix,
        (_, Some(_)) => PriorVariant::Grouped,
        _ => PriorVariant::PerCoordinate,
    })
}

fn group_structure(cfg: &FitConfig, p: usize) -> CliResult<GroupStructure> {
    let groups = cfg.prior.groups.as_ref().ok_or_else(|| input("grouped priors need `prior.groups`"))?;
    let zero_based = groups
        .iter()
        .map(|g| g.iter().map(|&j| j.checked_sub(1).ok_or_else(|| input("group indices are 1-based"))).collect())
        .collect::<CliResult<Vec<Vec<usize>>>>()?;
    Ok(GroupStructure::from_partition(&zero_based, p)?)
}

/// Builds the fitting problem from a parsed config and data table.
pub fn build_problem(cfg: &FitConfig, table: &Table) -> CliResult<FitProblem<f64>> {
    let variant = resolve_variant(cfg);
    let hyper = Hyper { a: cfg.prior.a, b: cfg.prior.b, overrides: cfg.prior.overrides.clone() };
    if cfg.jeffreys && cfg.model != FitModel::Logistic {
        return Err(input("`jeffreys` applies to logistic models only"));
    }
    if cfg.prior.groups.is_some() && !matches!(variant, PriorVariant::Grouped | PriorVariant::SharedGroups) {
        return Err(input("`prior.groups` is only used by the grouped and shared_groups variants"));
    }
    match cfg.model {
        FitModel::Precision => {
            if variant != PriorVariant::Matrix {
                return Err(input("precision models use the `matrix` prior variant"));
            }
            let (n, p) = table.values.dim();
            let mean = table.values.mean_axis(Axis(0)).ok_or_else(|| input("no data rows"))?;
            let centered = &table.values - &mean.insert_axis(Axis(0));
            let s = centered.t().dot(&centered) / n as f64;
            let (a, b) = hyper.expand(tri_len(p))?;
            Ok(FitProblem::precision(s, n, PriorSpec::matrix(p, a, b)?)?)
        }
        model => {
            if table.values.ncols() < 2 {
                return Err(input("data needs a response column and at least one covariate"));
            }
            let y = table.values.column(0).to_owned();
            let x = table.values.slice(s![.., 1..]).to_owned();
            let p = x.ncols();
            let prior = match variant {
                PriorVariant::PerCoordinate => {
                    let (a, b) = hyper.expand(p)?;
                    PriorSpec::per_coordinate(a, b, cfg.prior.q)?
                }
                PriorVariant::Grouped | PriorVariant::SharedGroups => {
                    if model == FitModel::Logistic {
                        return Err(input("logistic models use the `per_coordinate` prior variant"));
                    }
                    let groups = group_structure(cfg, p)?;
                    let (a, b) = hyper.expand(groups.num_groups())?;
                    if variant == PriorVariant::Grouped {
                        PriorSpec::grouped(a, b, groups)?
                    } else {
                        PriorSpec::shared_groups(a, b, cfg.prior.q, groups)?
                    }
                }
                PriorVariant::Matrix => return Err(input("the `matrix` prior variant needs the precision model")),
            };
            if model == FitModel::Logistic {
                return Ok(FitProblem::logistic(Dataset::logistic(x, y)?, prior, cfg.jeffreys)?);
            }
            let noise = match cfg.noise {
                NoiseConfig::Fixed { variance } => NoiseModel::fixed(variance)?,
                NoiseConfig::InverseGamma { a, b } => NoiseModel::inverse_gamma(a, b)?,
            };
            let data = Dataset::centered(x, y)?;
            Ok(match variant {
                PriorVariant::Grouped => FitProblem::group_linear(data, prior, noise)?,
                PriorVariant::SharedGroups => FitProblem::shared_linear(data, prior, noise)?,
                _ => FitProblem::linear(data, prior, noise)?,
            })
        }
    }
}

fn least_squares_start(problem: &FitProblem<f64>) -> CliResult<Array1<f64>> {
    let data = problem.dataset().ok_or_else(|| input("least-squares initialization applies to linear models only"))?;
    if problem.jeffreys() || data.n() <= data.p() || !data.is_centered() {
        return Err(input("least-squares initialization needs a linear model with more rows than covariates"));
    }
    let xtx = data.x().t().dot(data.x());
    Ok(linalg::solve_spd(xtx.view(), data.x().t().dot(data.y()).view())?)
}

pub fn run_fit(cfg: &FitConfig, problem: &FitProblem<f64>) -> CliResult<FitResult<f64>> {
    let start = match cfg.init {
        InitPolicy::Zero => None,
        InitPolicy::LeastSquares => Some(least_squares_start(problem)?),
    };
    Ok(fit_map(problem, &cfg.solver.options(), start.as_ref().map(|b| PriorPoint::Coefficients(b.view())))?)
}

fn coefficient_rows(problem: &FitProblem<f64>, fit: &FitResult<f64>, names: &[String]) -> CliResult<Vec<Vec<Cell>>> {
    if let Some(omega) = fit.estimate.precision() {
        let WeightSet::Matrix(w) = &fit.weights_final else {
            return Err(input("unexpected weight layout for a precision fit"));
        };
        let p = omega.nrows();
        let mut rows = Vec::with_capacity(tri_len(p));
        for i in 0..p {
            for j in i..p {
                rows.push(vec![
                    Cell::from(tri_index(p, i, j) + 1),
                    Cell::from(format!("{}:{}", names[i], names[j])),
                    Cell::from(omega[[i, j]]),
                    Cell::from(w[[i, j]]),
                    Cell::from(omega[[i, j]] != 0.0),
                ]);
            }
        }
        return Ok(rows);
    }
    let beta = fit.estimate.coefficients().ok_or_else(|| input("fit produced no coefficients"))?;
    let groups = problem.prior().groups();
    let per_coord: Array1<f64> = match &fit.weights_final {
        WeightSet::PerGroup(w) | WeightSet::SharedGroups(w) => {
            let g = groups.ok_or_else(|| input("grouped weights without groups"))?;
            Array1::from_shape_fn(beta.len(), |j| w[g.group_of(j)])
        }
        other => other.coordinate_weights(groups)?,
    };
    Ok((0..beta.len())
        .map(|j| {
            vec![
                Cell::from(j + 1),
                Cell::from(names[j + 1].clone()),
                Cell::from(beta[j]),
                Cell::from(per_coord[j]),
                Cell::from(beta[j] != 0.0),
            ]
        })
        .collect())
}

/// Fits one model to a data file and writes the coefficients, the objective
/// trace (`<out>.trace.csv`) and a manifest (`<out>.manifest.json`).
pub fn cmd_fit(args: &FitArgs<'_>) -> CliResult<()> {
    let mut cfg: FitConfig = read_json(args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let table = read_table(args.data)?;
    let problem = build_problem(&cfg, &table)?;
    let fit = run_fit(&cfg, &problem)?;

    let digest = output::digest(&cfg)?;
    let prov = Provenance { command: "fit", digest: digest.clone(), generator: GENERATOR.to_string(), seed: cfg.seed };
    let rows = coefficient_rows(&problem, &fit, &table.names)?;
    let coef = output::render_table(&prov, &["index", "name", "estimate", "weight_final", "in_support"], &rows)?;
    output::write(args.out, &coef)?;

    let trace_path = output::sibling(args.out, ".trace.csv");
    let trace_rows: Vec<Vec<Cell>> =
        fit.objective_trace.iter().enumerate().map(|(k, &v)| vec![Cell::from(k), Cell::from(v)]).collect();
    output::write(&trace_path, &output::render_table(&prov, &["iteration", "objective"], &trace_rows)?)?;

    let manifest = RunManifest {
        command: "fit".into(),
        config_digest: digest,
        data_digest: Some(output::file_digest(args.data)?),
        generator: GENERATOR.to_string(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        outputs: vec![output::file_name(args.out), output::file_name(&trace_path)],
        resolved_config: serde_json::to_value(&cfg).map_err(|e| input(e.to_string()))?,
    };
    output::write_manifest(args.out, &manifest)?;

    if fit.converged {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!(
            "fit did not converge after {} outer iterations ({} capped inner solves); outputs written",
            fit.outer_iterations,
            fit.inner_failures.len()
        )))
    }
}
