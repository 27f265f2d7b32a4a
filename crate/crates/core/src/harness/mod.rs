//! Experiment driver: configuration, repeated runs, aggregation, reports.

mod aggregate;
mod config;
mod output;
mod report;
mod run;

pub use aggregate::{aggregate, mean_and_stderr, AggregateRow};
pub use config::{
    CBarMode, ComparatorSpec, CorruptedUsers, ExperimentConfig, GraphSource, InstanceMode,
};
pub use output::{
    aggregate_dir, prepare_out_dir, read_aggregate_csv, read_run_csv, read_runs, run_csv_path,
    write_aggregate_csv, write_experiment, write_run_csv, AGGREGATE_HEADER, RUN_HEADER,
};
pub use report::render_report;
pub use run::{
    build_instance, run_experiment, run_single, ExperimentResult, Instance, RoundRecord, RunResult,
};
