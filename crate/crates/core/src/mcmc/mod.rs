//! Bayesian posterior sampling and the replicated simulation study.

mod chain;
mod prior;
mod study;

pub use chain::{
    adaptive_metropolis, batch_means_se, posterior_summary, quantile_sorted, run_chain,
    ChainConfig, ParamSummary, PosteriorChain, RawChain,
};
pub use prior::{log_posterior, Prior, PriorSpec};
pub use study::{
    monte_carlo_study, InitSource, ReplicationOutcome, StudyConfig, StudyResult, StudyRow,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McmcError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid starting point: {0}")]
    InvalidStart(String),
    #[error("no proposal accepted in the {window} burn-in iterations ending at {iteration}")]
    Stuck { iteration: usize, window: usize },
    #[error("{failed} of {total} replications failed (limit 10%); first error: {first}")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: String,
    },
    #[error("simulation failed: {0}")]
    Sampling(String),
}
