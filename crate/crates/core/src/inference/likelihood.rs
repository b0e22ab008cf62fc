//! Right-censored log-likelihood `sum delta_i log h(t_i) - sum H(t_i)`.

use crate::dataset::SurvivalDataset;
use crate::models::ModelSpec;
use crate::ode::{Channel, DEFAULT_DT};

/// Uses closed forms where the family has them, otherwise one trajectory
/// integrated to `max t_i` at the default step. Invalid parameters, a
/// non-positive hazard at an event time, or a negative hazard anywhere
/// before the last observation give `-inf`.
pub fn log_likelihood(model: &ModelSpec, data: &SurvivalDataset) -> f64 {
    if model.validate().is_err() || data.is_empty() {
        return f64::NEG_INFINITY;
    }
    if model.has_closed_form() {
        log_likelihood_closed(model, data)
    } else {
        log_likelihood_trajectory(model, data, DEFAULT_DT)
    }
}

fn log_likelihood_closed(model: &ModelSpec, data: &SurvivalDataset) -> f64 {
    let mut ll = 0.0;
    for (t, event) in data.iter() {
        let Some((h, cum)) = model.closed_pair(t) else {
            return f64::NEG_INFINITY;
        };
        if event {
            if !(h > 0.0) {
                return f64::NEG_INFINITY;
            }
            ll += h.ln();
        }
        ll -= cum;
    }
    if ll.is_finite() {
        ll
    } else {
        f64::NEG_INFINITY
    }
}

/// Likelihood from an RK4 trajectory with trapezoidal `H` and linear
/// interpolation, regardless of whether closed forms exist.
pub fn log_likelihood_trajectory(model: &ModelSpec, data: &SurvivalDataset, dt: f64) -> f64 {
    if model.validate().is_err() || data.is_empty() {
        return f64::NEG_INFINITY;
    }
    let t_max = data.max_time();
    // one spare step so rounding of the grid never cuts off t_max
    let traj = match model.trajectory(t_max + dt, dt) {
        Ok(traj) => traj,
        Err(_) => return f64::NEG_INFINITY,
    };
    if traj.negative_hazard_at().is_some_and(|t| t <= t_max + dt) {
        return f64::NEG_INFINITY;
    }
    let mut ll = 0.0;
    for (t, event) in data.iter() {
        if event {
            match traj.interp(Channel::Hazard, t) {
                Ok(h) if h > 0.0 => ll += h.ln(),
                _ => return f64::NEG_INFINITY,
            }
        }
        match traj.interp(Channel::CumHazard, t) {
            Ok(cum) => ll -= cum,
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    if ll.is_finite() {
        ll
    } else {
        f64::NEG_INFINITY
    }
}
