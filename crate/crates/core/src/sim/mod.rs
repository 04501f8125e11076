//! Simulated environments, Merge-Rank data and the experiment runner.

pub mod config;
pub mod env;
pub mod experiment;
pub mod fixture;
pub mod merge_rank;

pub use config::{EnvKind, ExperimentConfig, RegretKind, CONFIG_SCHEMA};
pub use env::{Environment, PreferenceMatrix};
pub use experiment::{
    build_environment, checkpoints, run_experiment, simulate, simulate_run, write_report, ExperimentReport, RunResult,
    SummaryRow,
};
pub use fixture::{make_fixture_theta, ThetaKind};
pub use merge_rank::{merge_rank, merge_rank_generate, MergeRankOutput};
