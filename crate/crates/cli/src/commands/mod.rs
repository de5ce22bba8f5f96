mod curves;
mod fit;
mod simulate;

pub use curves::{cmd_curves, curve_table, CurvesArgs};
pub use fit::{build_problem, cmd_fit, run_fit, FitArgs};
pub use simulate::{cmd_simulate, resolve, summary_row, SimulateArgs, COLUMNS};
