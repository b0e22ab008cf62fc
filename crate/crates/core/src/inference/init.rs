//! Data-driven starting values from a local exponential anchor near `t = 0`.

use super::{InferenceError, ModelFamily};
use crate::dataset::SurvivalDataset;
use std::f64::consts::TAU;

/// One month on a yearly time scale.
pub const DEFAULT_WINDOW: f64 = 1.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitEstimate {
    /// Events in `[0, dt]` per unit of exposure there.
    pub lambda_hat: f64,
    pub h0: f64,
    pub v0: f64,
    /// `h''(0)`
    pub hpp0: f64,
    /// Events per unit of total follow-up.
    pub c0: f64,
    pub omega0: f64,
    /// `true` when `-h''(0) / (h0 - c0)` was not positive and `omega0`
    /// fell back to `2 pi / range(t)`.
    pub omega_fallback: bool,
}

impl InitEstimate {
    /// Starting point `(omega, c, h0, v0)` for the sinusoidal family.
    pub fn sinusoidal_start(&self) -> [f64; 4] {
        [self.omega0, self.c0, self.h0, self.v0]
    }

    /// Starting point for any ODE family. Only the sinusoidal start follows
    /// the moment-matching scheme; the others anchor the long-run level at `c0`
    /// and take `(h0, v0)` from the anchor. `None` for the closed-form
    /// baselines, which have their own starts.
    pub fn start_for(&self, family: ModelFamily) -> Option<Vec<f64>> {
        let h0 = if self.h0 > 0.0 { self.h0 } else { self.c0 };
        let v0 = self.v0;
        Some(match family {
            ModelFamily::Constant => vec![self.c0],
            ModelFamily::Sinusoidal => self.sinusoidal_start().to_vec(),
            ModelFamily::Damped => vec![1.0, 1.0, self.c0, h0, v0],
            ModelFamily::PopDyn => vec![1.0, self.c0, 1.0, h0, v0],
            // alpha leaves h0 well inside h0 >= |v0| / sqrt(alpha)
            ModelFamily::ExpBeta0 => vec![(4.0 * (v0 / h0).powi(2)).max(1e-4), h0, v0],
            ModelFamily::ExpInteraction => vec![(4.0 * (v0 / h0).powi(2)).max(1e-4), 0.1, h0, v0],
            ModelFamily::Weibull | ModelFamily::LogNormal => return None,
        })
    }
}

/// Forward-difference estimates of `h(0)`, `h'(0)`, `h''(0)` from survival
/// values `s = [S(0), S(dt), S(2dt), S(3dt)]`, written exactly as the classic
/// approximations (including their mixed `S(0)`/`S(dt)`
/// denominators).
pub fn survival_differences(s: [f64; 4], dt: f64) -> (f64, f64, f64) {
    let [s0, s1, s2, s3] = s;
    let d1 = s1 - s0;
    let d2 = s2 - 2.0 * s1 + s0;
    let d3 = s3 - 3.0 * s2 + 3.0 * s1 - s0;
    let h0 = -d1 / (dt * s0);
    let v0 = (d1 / (dt * s1)).powi(2) - d2 / (dt * dt * s1);
    let dt3 = dt * dt * dt;
    let hpp0 =
        -d3 / (dt3 * s1) + 3.0 * d2 * d1 / (dt3 * s1 * s1) - 2.0 * d1.powi(3) / (dt3 * s1.powi(3));
    (h0, v0, hpp0)
}

/// Starting values from the near-zero event rate.
///
/// With no events inside the window, `lambda_hat = 0` and the anchored
/// survival curve is flat, so `h0 = v0 = h''(0) = 0`.
pub fn init_from_survival(data: &SurvivalDataset, dt: f64) -> Result<InitEstimate, InferenceError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(InferenceError::Data(format!(
            "window {dt} must be positive"
        )));
    }
    let exposure: f64 = data.times().iter().map(|&t| t.min(dt)).sum();
    if !(exposure > 0.0) {
        return Err(InferenceError::Data("no exposure inside the window".into()));
    }
    let early = data.iter().filter(|&(t, d)| d && t <= dt).count();
    let lambda_hat = early as f64 / exposure;
    let anchor = |k: f64| (-k * lambda_hat * dt).exp();
    let (h0, v0, hpp0) = survival_differences([1.0, anchor(1.0), anchor(2.0), anchor(3.0)], dt);

    let c0 = data.event_count() as f64 / data.total_time();
    let radicand = -hpp0 / (h0 - c0);
    let (omega0, omega_fallback) = if radicand > 0.0 && radicand.is_finite() {
        (radicand.sqrt(), false)
    } else {
        let (lo, hi) = data
            .times()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| {
                (a.min(t), b.max(t))
            });
        (TAU / (hi - lo).max(dt), true)
    };
    Ok(InitEstimate {
        lambda_hat,
        h0,
        v0,
        hpp0,
        c0,
        omega0,
        omega_fallback,
    })
}
