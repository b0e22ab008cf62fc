//! Exponential hazard with interaction: `h'' = alpha h - beta (h')^2`.
//!
//! With `beta = 0` the solution is a pair of exponentials with rates
//! `+-sqrt(alpha)`. When `h0 = -v0/sqrt(alpha)` the growing mode vanishes,
//! the cumulative hazard stays bounded and the survival law is improper.

use super::ModelError;
use crate::ode::State2;

/// Relative band within which `h0 +- v0/sqrt(alpha)` is treated as zero.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpInteractionParams {
    pub alpha: f64,
    pub beta: f64,
    pub h0: f64,
    pub v0: f64,
}

impl ExpInteractionParams {
    pub fn new(alpha: f64, beta: f64, h0: f64, v0: f64) -> Result<Self, ModelError> {
        let p = Self {
            alpha,
            beta,
            h0,
            v0,
        };
        p.check_domain()?;
        Ok(p)
    }

    /// The decaying-only solution `h(t) = h0 e^{-sqrt(alpha) t}` with
    /// `h0 = -v0 / sqrt(alpha)` (requires `v0 < 0`).
    pub fn boundary(alpha: f64, v0: f64) -> Result<Self, ModelError> {
        if !(v0 < 0.0) {
            return Err(ModelError::invalid("v0", v0, "boundary case needs v0 < 0"));
        }
        if !(alpha > 0.0) {
            return Err(ModelError::invalid("alpha", alpha, "must be positive"));
        }
        Self::new(alpha, 0.0, -v0 / alpha.sqrt(), v0)
    }

    pub(crate) fn check_domain(&self) -> Result<(), ModelError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ModelError::invalid("alpha", self.alpha, "must be positive"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(ModelError::invalid(
                "beta",
                self.beta,
                "must be non-negative",
            ));
        }
        if !(self.h0 >= 0.0 && self.h0.is_finite()) {
            return Err(ModelError::invalid("h0", self.h0, "must be non-negative"));
        }
        if !self.v0.is_finite() {
            return Err(ModelError::invalid("v0", self.v0, "must be finite"));
        }
        Ok(())
    }

    /// Domain checks, plus the positivity certificate when `beta = 0`.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.check_domain()?;
        if self.beta == 0.0 && !self.beta0_positive() {
            return Err(ModelError::NotPositive(format!(
                "h0 = {} below |v0|/sqrt(alpha) = {}",
                self.h0,
                self.v0.abs() / self.alpha.sqrt()
            )));
        }
        Ok(())
    }

    /// `h0 >= |v0| / sqrt(alpha)`, with a relative tolerance band at equality.
    pub fn beta0_positive(&self) -> bool {
        let bound = self.v0.abs() / self.alpha.sqrt();
        self.h0 >= bound - BOUNDARY_TOLERANCE * bound.max(self.h0)
    }

    /// Exact condition for `h(t) >= 0` on `t >= 0` when `beta = 0` and
    /// `h0 > 0`: the growing coefficient `h0 + v0/sqrt(alpha)` is
    /// non-negative. [`Self::beta0_positive`] additionally asks the decaying
    /// coefficient to be non-negative, which is sufficient but not necessary
    /// (for `v0 > 0` the hazard increases from `h0`).
    pub fn beta0_hazard_nonnegative(&self) -> bool {
        let scaled = self.v0 / self.alpha.sqrt();
        self.h0 + scaled >= -BOUNDARY_TOLERANCE * self.h0.max(scaled.abs())
    }

    /// Coefficients of `e^{+sqrt(alpha) t}` and `e^{-sqrt(alpha) t}`.
    fn beta0_coefficients(&self) -> (f64, f64) {
        let ra = self.alpha.sqrt();
        let scaled = self.v0 / ra;
        let snap = |x: f64| {
            if x.abs() <= BOUNDARY_TOLERANCE * self.h0.abs().max(scaled.abs()) {
                0.0
            } else {
                x
            }
        };
        (0.5 * snap(self.h0 + scaled), 0.5 * snap(self.h0 - scaled))
    }

    /// `true` when the growing mode is absent (bounded cumulative hazard).
    pub fn is_boundary(&self) -> bool {
        self.beta == 0.0 && self.beta0_coefficients().0 == 0.0
    }

    pub fn beta0_hazard(&self, t: f64) -> f64 {
        let ra = self.alpha.sqrt();
        let (a, b) = self.beta0_coefficients();
        a * (ra * t).exp() + b * (-ra * t).exp()
    }

    pub fn beta0_cum_hazard(&self, t: f64) -> f64 {
        let ra = self.alpha.sqrt();
        let (a, b) = self.beta0_coefficients();
        a / ra * (ra * t).exp_m1() - b / ra * (-ra * t).exp_m1()
    }

    /// `lim H(t)` when it is finite.
    pub fn cum_hazard_limit(&self) -> Option<f64> {
        self.is_boundary()
            .then(|| self.beta0_coefficients().1 / self.alpha.sqrt())
    }

    #[inline]
    pub fn derivative(&self, state: State2) -> State2 {
        State2::new(
            state.v,
            self.alpha * state.h - self.beta * state.v * state.v,
        )
    }
}

pub fn exp_beta0_hazard_closed(t: f64, alpha: f64, h0: f64, v0: f64) -> Result<f64, ModelError> {
    Ok(ExpInteractionParams::new(alpha, 0.0, h0, v0)?.beta0_hazard(t))
}

pub fn exp_beta0_cumhaz_closed(t: f64, alpha: f64, h0: f64, v0: f64) -> Result<f64, ModelError> {
    Ok(ExpInteractionParams::new(alpha, 0.0, h0, v0)?.beta0_cum_hazard(t))
}

pub fn exp_beta0_positivity(p: &ExpInteractionParams) -> bool {
    p.beta0_positive()
}
