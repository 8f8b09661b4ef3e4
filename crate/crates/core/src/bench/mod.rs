//! Benchmark harness: synthetic maps, Monte Carlo experiments over engines
//! and seeds, CSV logs and timing summaries.

mod config;
mod experiment;
mod log;
mod maps;

pub use config::KeyValues;
pub use experiment::{
    central_free_pose, run_experiment, summarize, worker_count, write_run_files, ExperimentReport,
    ExperimentSpec, Job, MapSource, RunOutcome, WORKERS_ENV,
};
pub use log::{
    read_step_rows, read_summaries, summarize_runs, write_step_rows, write_summaries, ExplorationLog, RunSummary,
    StepEvent, StepRecord, StepRow, Termination, DECISION_COLUMNS, STEP_COLUMNS, SUMMARY_COLUMNS,
};
pub use maps::{
    generate_office_map, generate_structured_map, generate_unstructured_map, load_map, unstructured_obstacles,
    Ellipse, MapKind,
};
