use std::collections::BTreeMap;

use ndarray::Array2;

use super::experiment::{ExperimentConfig, ExperimentModel, InitPolicy, Method, NoiseSpec, SolverSettings};
use crate::error::{Error, Result};

/// True coefficients of the linear and logistic studies.
pub const PAPER_BETA: [f64; 8] = [3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0];

const DEFAULT_REPS: usize = 1000;

/// Precision matrix of the graphical-model study. The published matrix has
/// `Ω₅₇ = 0.5` but `Ω₇₅ = 0.1`; this returns the symmetric part `(Ω + Ωᵀ)/2`.
pub fn paper_precision_truth() -> Array2<f64> {
    let rows: [[f64; 8]; 8] = [
        [1.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0],
        [0.0, 1.5, 0.0, 0.2, 0.8, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.3, 0.0, 0.2, 0.0, 0.0],
        [0.0, 0.2, 0.3, 2.0, 0.0, 0.0, 0.0, 1.5],
        [0.5, 0.8, 0.0, 0.0, 1.0, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.2, 0.0, 0.0, 0.5, 0.3, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.1, 0.3, 1.5, 0.0],
        [0.0, 0.0, 0.0, 1.5, 0.0, 0.0, 0.0, 2.0],
    ];
    let raw = Array2::from_shape_fn((8, 8), |(i, j)| rows[i][j]);
    (&raw + &raw.t()) * 0.5
}

fn group_beta() -> Vec<f64> {
    let mut beta = vec![0.0; 32];
    beta[0..4].copy_from_slice(&[3.0, 1.5, 2.0, 0.5]);
    beta[8..12].copy_from_slice(&[6.0, 3.0, 4.0, 1.0]);
    beta[16..20].copy_from_slice(&[1.5, 0.75, 1.0, 0.25]);
    beta
}

fn groups_of_four() -> Vec<Vec<usize>> {
    (0..8).map(|g| (4 * g + 1..=4 * g + 4).collect()).collect()
}

fn hal(a: f64, b: f64, overrides: &[(usize, f64, f64)]) -> Method {
    Method::Hierarchical {
        a,
        b,
        q: 1.0,
        overrides: overrides.iter().map(|&(k, a, b)| (k, (a, b))).collect(),
        schedule: None,
    }
}

fn lasso(tau: f64, overrides: &[(usize, f64)]) -> Method {
    Method::Lasso { tau, overrides: overrides.iter().copied().collect::<BTreeMap<_, _>>() }
}

fn base(model: ExperimentModel, n: usize, label: &str, method: Method, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        label: label.to_string(),
        model,
        n,
        beta: Some(PAPER_BETA.to_vec()),
        omega: None,
        rho: 0.5,
        noise: None,
        method,
        groups: None,
        jeffreys: false,
        init: InitPolicy::Zero,
        solver: SolverSettings::default(),
        reps: DEFAULT_REPS,
        seed,
    }
}

fn linear(n: usize, delta: f64, label: &str, method: Method, seed: u64) -> ExperimentConfig {
    ExperimentConfig { noise: Some(NoiseSpec::Fixed { delta }), ..base(ExperimentModel::Linear, n, label, method, seed) }
}

fn grouped(label: &str, method: Method, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        beta: Some(group_beta()),
        groups: Some(groups_of_four()),
        noise: Some(NoiseSpec::Fixed { delta: 3.0 }),
        ..base(ExperimentModel::Grouped, 40, label, method, seed)
    }
}

fn precision(label: &str, method: Method, seed: u64) -> ExperimentConfig {
    let omega = paper_precision_truth();
    ExperimentConfig {
        beta: None,
        omega: Some(omega.rows().into_iter().map(|r| r.to_vec()).collect()),
        ..base(ExperimentModel::Precision, 40, label, method, seed)
    }
}

const NAMES: [&str; 11] = [
    "lasso-linear-delta1",
    "hal-linear-delta1",
    "lasso-linear-delta3",
    "hal-linear-delta3",
    "hal-linear-random-noise",
    "group-lasso-delta3",
    "ghal-delta3",
    "lasso-logistic",
    "hal-logistic",
    "lasso-ggm",
    "hal-ggm",
];

pub fn preset_names() -> &'static [&'static str] {
    &NAMES
}

/// Experiment rows of a named study, one per (n, setting) pair, with
/// `reps` replications each (1000 when omitted).
pub fn preset(name: &str, reps: Option<usize>, seed: u64) -> Result<Vec<ExperimentConfig>> {
    let mut rows: Vec<ExperimentConfig> = match name {
        "lasso-linear-delta1" => [40, 80]
            .iter()
            .flat_map(|&n| [(0.2, "0.2"), (0.1, "0.1"), (0.02, "0.02")].map(|(t, l)| linear(n, 1.0, l, lasso(t, &[]), seed)))
            .collect(),
        "hal-linear-delta1" => [40, 80]
            .iter()
            .flat_map(|&n| {
                [(1.0, 0.1, "(1,0.1)"), (2.0, 0.1, "(2,0.1)"), (2.0, 0.05, "(2,0.05)")]
                    .map(|(a, b, l)| linear(n, 1.0, l, hal(a, b, &[]), seed))
            })
            .collect(),
        "lasso-linear-delta3" => vec![
            linear(40, 3.0, "1/6", lasso(1.0 / 6.0, &[]), seed),
            linear(40, 3.0, "0.125", lasso(0.125, &[]), seed),
            linear(40, 3.0, "0.125*", lasso(0.125, &[(2, 0.25), (5, 0.25)]), seed),
        ],
        "hal-linear-delta3" => vec![
            linear(40, 3.0, "(2,0.75)", hal(2.0, 0.75, &[]), seed),
            linear(40, 3.0, "(2,0.1)", hal(2.0, 0.1, &[]), seed),
            linear(40, 3.0, "(2,0.1)*", hal(2.0, 0.1, &[(2, 2.0, 2.0), (5, 2.0, 2.0)]), seed),
        ],
        "hal-linear-random-noise" => [
            (3.0, 5.0, 2.0, 0.1, false, "(3,5) (2,0.1)"),
            (1.0, 1.0, 2.0, 0.1, false, "(1,1) (2,0.1)"),
            (1.0, 4.0, 2.0, 0.2, false, "(1,4) (2,0.2)"),
            (1.0, 4.0, 2.0, 0.2, true, "(1,4) (2,0.2)*"),
        ]
        .iter()
        .map(|&(ad, bd, a, b, star, l)| {
            let ov: &[(usize, f64, f64)] = if star { &[(2, 2.0, 2.0), (5, 2.0, 2.0)] } else { &[] };
            ExperimentConfig {
                noise: Some(NoiseSpec::InverseGamma { a: ad, b: bd }),
                ..base(ExperimentModel::Linear, 40, l, hal(a, b, ov), seed)
            }
        })
        .collect(),
        "group-lasso-delta3" => vec![
            grouped("1/12", lasso(1.0 / 12.0, &[]), seed),
            grouped("0.1", lasso(0.1, &[]), seed),
        ],
        "ghal-delta3" => vec![
            grouped("(2,0.75)", hal(2.0, 0.75, &[]), seed),
            grouped("(2,0.7)", hal(2.0, 0.7, &[]), seed),
        ],
        "lasso-logistic" => vec![
            base(ExperimentModel::Logistic, 80, "1/7.5", lasso(1.0 / 7.5, &[]), seed),
            base(ExperimentModel::Logistic, 80, "0.1*", lasso(0.1, &[(2, 1.0), (5, 1.0)]), seed),
        ],
        "hal-logistic" => vec![
            base(ExperimentModel::Logistic, 80, "(2,0.65)", hal(2.0, 0.65, &[]), seed),
            base(ExperimentModel::Logistic, 80, "(2,0.1)*", hal(2.0, 0.1, &[(2, 2.0, 2.0), (5, 2.0, 2.0)]), seed),
            base(
                ExperimentModel::Logistic,
                80,
                "(2,0.1)+",
                hal(2.0, 0.1, &[(1, 2.0, 0.5), (2, 2.0, 2.0), (5, 2.0, 2.0)]),
                seed,
            ),
        ],
        "lasso-ggm" => vec![
            precision("1/45", lasso(1.0 / 45.0, &[]), seed),
            precision("1/50", lasso(1.0 / 50.0, &[]), seed),
        ],
        "hal-ggm" => vec![
            precision("(1,0.075)", hal(1.0, 0.075, &[]), seed),
            precision("(2,0.1)", hal(2.0, 0.1, &[]), seed),
        ],
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}`; available: {}",
                NAMES.join(", ")
            )))
        }
    };
    for c in rows.iter_mut() {
        // Hierarchical linear fits start from least squares: from zero, the
        // first EM step is a heavily weighted lasso that can lock in an
        // all-zero mode (notably with random noise).
        let linear_family = matches!(c.model, ExperimentModel::Linear | ExperimentModel::Grouped);
        if linear_family && matches!(c.method, Method::Hierarchical { .. }) {
            c.init = InitPolicy::LeastSquares;
        }
        if let Some(r) = reps {
            c.reps = r;
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn every_preset_validates() {
        for name in preset_names() {
            for cfg in preset(name, Some(1), 1).unwrap() {
                cfg.validate().unwrap_or_else(|e| panic!("{name} {}: {e}", cfg.label));
            }
        }
        assert_eq!(preset("hal-linear-delta1", None, 1).unwrap().len(), 6);
        assert!(preset("nope", None, 1).is_err());
    }

    #[test]
    fn precision_truth_is_symmetric_pd() {
        let o = paper_precision_truth();
        assert!(linalg::is_symmetric(o.view(), 0.0));
        assert!(linalg::min_eigenvalue(o.view()) > 0.0);
        assert_eq!(o[[4, 6]], 0.3);
    }
}
