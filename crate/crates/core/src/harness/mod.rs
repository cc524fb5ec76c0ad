//! Experiment orchestration: configs, multi-seed training runs, metrics
//! files, and SVG figures.

pub mod config;
pub mod metrics;
pub mod plot;
pub mod runner;

pub use config::{ActionSource, CleanMode, ExperimentConfig, GridConfig};
pub use metrics::{
    episodes_to_threshold, final_performance, initial_performance, moving_average,
    read_metrics_csv, write_metrics_csv, ExperimentSummary, FailedRun, MetricsRow, RunMetrics,
    FINAL_WINDOW,
};
pub use runner::{
    build_agent, run_episode, run_experiment, run_seed, write_outputs, Agent, EpisodeRecord,
    ExperimentOutcome, SeedRun,
};
