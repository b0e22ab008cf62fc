//! Plot-ready `t,h,S,H` tables for the reference parameter sets.

use crate::models::{
    delayed_logistic_solve, logistic_first_order_field, DampedOscParams, ExpInteractionParams,
    ModelError, ModelSpec, PopDynParams, SinusoidalParams,
};
use crate::ode::{integrate, State2, TimeGrid, Trajectory};
use std::fmt::Write as _;

/// What produces the hazard path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveSource {
    Model(ModelSpec),
    FirstOrderLogistic { r: f64, k: f64, h0: f64 },
    DelayedLogistic { r: f64, k: f64, tau: f64, h0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    /// File stem, e.g. `damped_underdamped`.
    pub name: &'static str,
    /// Group the curve is plotted in.
    pub group: &'static str,
    pub source: CurveSource,
    pub horizon: f64,
}

impl CurveSpec {
    pub fn trajectory(&self, dt: f64) -> Result<Trajectory, ModelError> {
        let grid = TimeGrid::from_zero(self.horizon, dt)?;
        match self.source {
            CurveSource::Model(m) => {
                m.validate()?;
                m.trajectory(self.horizon, dt)
            }
            CurveSource::FirstOrderLogistic { r, k, h0 } => {
                // validates r, K, h0
                crate::models::logistic_first_order_hazard(0.0, r, k, h0)?;
                let init = State2::new(h0, r * h0 * (1.0 - h0 / k));
                Ok(integrate(&logistic_first_order_field(r, k), init, grid)?)
            }
            CurveSource::DelayedLogistic { r, k, tau, h0 } => {
                delayed_logistic_solve(r, k, tau, h0, grid)
            }
        }
    }

    /// Header plus every `stride`-th grid row (the last row is always kept).
    pub fn render(&self, dt: f64, stride: usize) -> Result<String, ModelError> {
        let traj = self.trajectory(dt)?;
        Ok(render_trajectory(&traj, stride))
    }
}

pub fn render_trajectory(traj: &Trajectory, stride: usize) -> String {
    let stride = stride.max(1);
    let last = traj.len() - 1;
    let mut out = String::from("t,h,S,H\n");
    for (i, ((t, &h), &cum)) in traj
        .times()
        .zip(traj.hazard())
        .zip(traj.cum_hazard())
        .enumerate()
    {
        if i % stride == 0 || i == last {
            let _ = writeln!(out, "{t},{h},{},{cum}", (-cum).exp());
        }
    }
    out
}

/// The reference parameter sets, grouped as they are plotted.
pub fn reference_curves() -> Vec<CurveSpec> {
    let damped =
        |alpha| ModelSpec::Damped(DampedOscParams::new(alpha, 1.0, 0.2, 0.1, 0.3).expect("valid"));
    let (r, k, tau, zeta, h0, v0) = (0.8, 1.0, 1.2, 0.5, 0.1, 0.2);
    vec![
        CurveSpec {
            name: "damped_underdamped",
            group: "damped",
            source: CurveSource::Model(damped(0.5)),
            horizon: 30.0,
        },
        CurveSpec {
            name: "damped_critical",
            group: "damped",
            source: CurveSource::Model(damped(2.0)),
            horizon: 30.0,
        },
        CurveSpec {
            name: "damped_overdamped",
            group: "damped",
            source: CurveSource::Model(damped(3.0)),
            horizon: 30.0,
        },
        CurveSpec {
            name: "logistic_first_order",
            group: "logistic",
            source: CurveSource::FirstOrderLogistic { r, k, h0 },
            horizon: 40.0,
        },
        CurveSpec {
            name: "logistic_delayed",
            group: "logistic",
            source: CurveSource::DelayedLogistic { r, k, tau, h0 },
            horizon: 40.0,
        },
        CurveSpec {
            name: "logistic_second_order",
            group: "logistic",
            source: CurveSource::Model(ModelSpec::PopDyn(
                PopDynParams::from_zeta(r, k, zeta, h0, v0).expect("valid"),
            )),
            horizon: 40.0,
        },
        CurveSpec {
            name: "sinusoidal",
            group: "sinusoidal",
            source: CurveSource::Model(ModelSpec::Sinusoidal(
                SinusoidalParams::new(0.2 * std::f64::consts::PI, 0.6, 0.1, 0.2).expect("valid"),
            )),
            horizon: 30.0,
        },
        CurveSpec {
            name: "exp_boundary",
            group: "exp_boundary",
            source: CurveSource::Model(ModelSpec::ExpInteraction(
                ExpInteractionParams::boundary(0.1, -0.1).expect("valid"),
            )),
            horizon: 60.0,
        },
        CurveSpec {
            name: "exp_beta0",
            group: "exp_growth",
            source: CurveSource::Model(ModelSpec::ExpInteraction(
                ExpInteractionParams::new(0.1, 0.0, 0.4, 0.1).expect("valid"),
            )),
            horizon: 10.0,
        },
        CurveSpec {
            name: "exp_interaction",
            group: "exp_growth",
            source: CurveSource::Model(ModelSpec::ExpInteraction(
                ExpInteractionParams::new(0.1, 0.1, 0.4, 0.1).expect("valid"),
            )),
            horizon: 10.0,
        },
    ]
}

/// Curves whose group or name equals `key`; `all` selects everything.
pub fn select_curves(key: &str) -> Vec<CurveSpec> {
    reference_curves()
        .into_iter()
        .filter(|c| key == "all" || c.group == key || c.name == key)
        .collect()
}
