use std::path::Path;

use hiersparse_core::sim::{penalty_contour, threshold_curve, GENERATOR};

use crate::config::{read_json, CurveKind, CurvesConfig};
use crate::error::{input, CliResult};
use crate::output::{self, Cell, Provenance, RunManifest};

pub struct CurvesArgs<'a> {
    pub config: &'a Path,
    pub out: &'a Path,
    pub seed: Option<u64>,
}

/// Column names and rows of a threshold curve or penalty contour.
pub fn curve_table(cfg: &CurvesConfig) -> CliResult<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let first = cfg.grid.values()?;
    Ok(match cfg.kind {
        CurveKind::Threshold => {
            let rows = threshold_curve(&cfg.prior, &first)?;
            (vec!["z", "beta_hat"], rows.into_iter().map(|(z, b)| vec![Cell::from(z), Cell::from(b)]).collect())
        }
        CurveKind::Contour => {
            let second = cfg.grid2.unwrap_or(cfg.grid).values()?;
            let rows = penalty_contour(&cfg.prior, &first, &second)?;
            (
                vec!["beta1", "beta2", "neg_log_density"],
                rows.into_iter().map(|(x, y, v)| vec![Cell::from(x), Cell::from(y), Cell::from(v)]).collect(),
            )
        }
    })
}

pub fn cmd_curves(args: &CurvesArgs<'_>) -> CliResult<()> {
    let mut cfg: CurvesConfig = read_json(args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let (columns, rows) = curve_table(&cfg)?;
    let digest = output::digest(&cfg)?;
    let prov = Provenance { command: "curves", digest: digest.clone(), generator: GENERATOR.to_string(), seed: cfg.seed };
    output::write(args.out, &output::render_table(&prov, &columns, &rows)?)?;
    let manifest = RunManifest {
        command: "curves".into(),
        config_digest: digest,
        data_digest: None,
        generator: GENERATOR.to_string(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        outputs: vec![output::file_name(args.out)],
        resolved_config: serde_json::to_value(&cfg).map_err(|e| input(e.to_string()))?,
    };
    output::write_manifest(args.out, &manifest)?;
    Ok(())
}
