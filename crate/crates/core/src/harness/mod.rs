//! Sweeps, charts and the verification suite.

mod chart;
mod sweep;
pub mod verify;

pub use chart::{chart_svg, render_chart, ChartSpec};
pub use sweep::{
    csv_string, parse_csv, read_csv, run_sweep, run_sweep_file, write_csv, Method, Metric, ResultRow, SweepSpec,
    SweepVar, CSV_COLUMNS,
};
