//! Experiment configuration, execution and trace files.

mod compare;
mod config;
mod experiment;
mod trace;

pub use compare::{compare_runs, Comparison};
pub use config::{
    load_config, parse_config, Diagnostic, ExperimentConfig, ObjectiveSource, DEFAULT_ETA, DEFAULT_GAMMA,
    DEFAULT_HORIZON, DEFAULT_NODES, DEFAULT_OUTPUT,
};
pub use experiment::{
    build_problem, resolve_output, run_experiment, run_experiment_to, side_path, ExperimentOutcome,
    LYAPUNOV_HEADER, OUTPUT_DIR_ENV,
};
pub use trace::{parse_trace_csv, read_trace_csv, render_row, render_trace_csv, write_trace_csv, CSV_HEADER};
