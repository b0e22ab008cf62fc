//! Second-order ODE hazard models for survival analysis: hazard families,
//! simulation by cumulative-hazard inversion, censored likelihood fitting,
//! and adaptive Metropolis posterior sampling.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curves;
pub mod dataset;
pub mod inference;
pub mod mcmc;
pub mod models;
pub mod ode;
pub mod rng;
pub mod sampling;
