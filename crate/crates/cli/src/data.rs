use std::path::Path;

use ndarray::Array2;

use crate::error::{input, CliResult};

/// A numeric table read from delimited text with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub values: Array2<f64>,
}

/// Reads comma-separated numbers below a header row. Lines starting with
/// `#` are skipped. Diagnostics point at `path:line:column`.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let bytes = std::fs::read(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    parse_table(&bytes, &path.display().to_string())
}

pub fn parse_table(bytes: &[u8], origin: &str) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes);
    let located = |e: csv::Error| match e.position() {
        Some(pos) => input(format!("{origin}:{}: {e}", pos.line())),
        None => input(format!("{origin}: {e}")),
    };
    let names: Vec<String> = reader.headers().map_err(located)?.iter().map(str::to_string).collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(input(format!("{origin}:1: missing header row")));
    }
    let mut flat = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(located)?;
        let line = record.position().map_or(0, |p| p.line());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| input(format!("{origin}:{line}:{}: cannot parse `{field}` as a number", col + 1)))?;
            if !v.is_finite() {
                return Err(input(format!("{origin}:{line}:{}: value `{field}` is not finite", col + 1)));
            }
            flat.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(input(format!("{origin}: no data rows")));
    }
    let values = Array2::from_shape_vec((rows, names.len()), flat).map_err(|e| input(format!("{origin}: {e}")))?;
    Ok(Table { names, values })
}
