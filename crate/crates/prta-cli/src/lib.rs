//! Experiment harness around the estimator library: batch generation and
//! timing over a parameter grid, CSV result tables, ratio comparisons, and
//! static SVG scatter plots.

pub mod compare;
pub mod experiment;
pub mod svg;
pub mod table;

pub use compare::{compare_ratios, CompareSummary, QuadrantCounts, RatioPoint};
pub use experiment::{
    derived_seed, generate_cell_taskset, run_experiment, run_method, taskset_id, worker_pool,
    ExperimentConfig, TargetPolicy,
};
pub use svg::{emit_scatter_svg, scatter_svg, PlotAxes, ReferenceLines, ScatterPoint};
pub use table::{
    csv_string, emit_csv, parse_csv, HarnessError, ResultRow, ResultTable, RowFailure,
};
