//! Replicated experiments on derived random streams, their estimators and
//! persistence.
//!
//! Replicate `r` always draws from `derive_stream(master_seed, r)`, replicates
//! run in parallel, and records are collected in replicate order; summaries
//! are computed single-threaded from that ordered list, so results do not
//! depend on the thread count.

mod experiments;
mod persist;
pub mod stats;

pub use crate::rng::derive_stream;
pub use experiments::{
    run_bilinear_experiment, run_clt_experiment, run_cov_experiment, run_esd_experiment, summarize_bilinear,
    summarize_clt, summarize_cov, summarize_esd, BilinearRecord, BilinearResult, BilinearSummary, CltSummary,
    CovEstimate, CovSummary, EsdSummary, ExperimentPlan, ReplicateRecord, RunResult, StatSummary, KURTOSIS_FLAG,
    MIN_CLT_REPLICATES, MIN_COV_REPLICATES, SKEW_FLAG,
};
pub use persist::{read_jsonl, with_threads, write_json, write_jsonl};
pub use stats::ks_statistic;
