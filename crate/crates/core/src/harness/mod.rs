//! Experiment orchestration and statistics.

pub mod acd;
pub mod stats;
pub mod suite;

pub use acd::{acd, confusion_matrix, max_weight_assignment};
pub use stats::{
    aggregate, welch_matrix, welch_t_test, write_summary_csv, GroupBy, GroupKey, GroupSummary,
    StatsError, WelchResult,
};
pub use suite::{
    read_ledger, run_suite, solve, Algo, ExperimentRecord, RunOptions, SolverConfig, SuiteEntry,
    SuiteError, SuiteInstance, SuiteSpec,
};
