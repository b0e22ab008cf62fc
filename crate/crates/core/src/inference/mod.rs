//! Likelihood-based inference: censored log-likelihood, simplex MLE,
//! classical baselines, MGF evaluation and starting values.

mod family;
mod fit;
mod init;
mod likelihood;
mod mgf;
mod optim;

pub use family::{
    log_normal_sf, lognormal_log_likelihood, weibull_log_likelihood, ModelFamily, Transform,
};
pub use fit::{bic, fit_lognormal, fit_weibull, mle_fit, FitConfig, FitResult};
pub use init::{init_from_survival, survival_differences, InitEstimate, DEFAULT_WINDOW};
pub use likelihood::{log_likelihood, log_likelihood_trajectory};
pub use mgf::{mgf, mgf_sweep, simpson, MgfConfig, MgfResult};
pub use optim::{nelder_mead, Minimum, NelderMeadConfig};

use crate::models::ModelError;
use crate::ode::OdeError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("invalid initial point: {0}")]
    InvalidInit(String),
    #[error("optimisation failed: {0}")]
    NonConvergence(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("cannot certify quadrature tail: {0}")]
    TailBound(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<OdeError> for InferenceError {
    fn from(e: OdeError) -> Self {
        Self::Model(ModelError::Ode(e))
    }
}
