//! JSON configuration documents for the three commands.

use std::collections::BTreeMap;
use std::path::Path;

use hiersparse_core::model::PriorVariant;
use hiersparse_core::sim::{CurvePrior, ExperimentConfig, Grid, InitPolicy, SolverSettings};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{input, CliResult};

/// Reads and parses a JSON file, anchoring syntax and schema errors at
/// `path:line:column`.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        // the position goes in front, so drop serde_json's trailing copy
        let msg = msg.rfind(" at line ").map_or(msg.as_str(), |k| &msg[..k]);
        input(format!("{origin}:{}:{}: {msg}", e.line(), e.column()))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Linear,
    Logistic,
    /// Every data column is a variable; the fitted object is a precision matrix.
    Precision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    /// Inferred when absent: `matrix` for precision models, `grouped` when
    /// groups are given, `per_coordinate` otherwise.
    #[serde(default)]
    pub variant: Option<PriorVariant>,
    pub a: f64,
    pub b: f64,
    #[serde(default = "one")]
    pub q: f64,
    /// 1-based coordinate, group, or packed-triangle index to `(a, b)`.
    #[serde(default)]
    pub overrides: BTreeMap<usize, (f64, f64)>,
    /// 1-based covariate indices, one list per group.
    #[serde(default)]
    pub groups: Option<Vec<Vec<usize>>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    Fixed { variance: f64 },
    InverseGamma { a: f64, b: f64 },
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig::Fixed { variance: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub model: FitModel,
    pub prior: PriorConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub jeffreys: bool,
    #[serde(default)]
    pub init: InitPolicy,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Echoed into outputs; fitting itself draws no random numbers.
    #[serde(default)]
    pub seed: u64,
}

/// A simulation document: a named preset, a list of experiments, or one
/// experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulateConfig {
    Preset { name: String, reps: Option<usize>, seed: u64 },
    Experiments(Vec<ExperimentConfig>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetDoc {
    preset: String,
    #[serde(default)]
    reps: Option<usize>,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ListDoc {
    experiments: Vec<ExperimentConfig>,
}

impl SimulateConfig {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let value: serde_json::Value = parse_json(text, origin)?;
        let has = |k: &str| value.get(k).is_some();
        if has("preset") {
            let d: PresetDoc = parse_json(text, origin)?;
            Ok(SimulateConfig::Preset { name: d.preset, reps: d.reps, seed: d.seed })
        } else if has("experiments") {
            let d: ListDoc = parse_json(text, origin)?;
            Ok(SimulateConfig::Experiments(d.experiments))
        } else {
            Ok(SimulateConfig::Experiments(vec![parse_json(text, origin)?]))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Threshold,
    Contour,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesConfig {
    pub kind: CurveKind,
    pub prior: CurvePrior,
    /// `z` for threshold curves, `β₁` for contours.
    pub grid: Grid,
    /// `β₂` for contours; defaults to `grid`.
    #[serde(default)]
    pub grid2: Option<Grid>,
    #[serde(default)]
    pub seed: u64,
}
