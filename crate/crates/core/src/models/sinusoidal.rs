//! Sinusoidal hazard: `h'' = -omega^2 (h - c)`.

use super::ModelError;
use crate::ode::State2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalParams {
    pub omega: f64,
    pub c: f64,
    pub h0: f64,
    pub v0: f64,
}

impl SinusoidalParams {
    pub fn new(omega: f64, c: f64, h0: f64, v0: f64) -> Result<Self, ModelError> {
        let p = Self { omega, c, h0, v0 };
        p.check_domain()?;
        Ok(p)
    }

    /// Constant hazard `c` written as a degenerate oscillation.
    pub fn constant(c: f64) -> Result<Self, ModelError> {
        Self::new(1.0, c, c, 0.0)
    }

    pub(crate) fn check_domain(&self) -> Result<(), ModelError> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(ModelError::invalid("omega", self.omega, "must be positive"));
        }
        if !self.c.is_finite() {
            return Err(ModelError::invalid("c", self.c, "must be finite"));
        }
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(ModelError::invalid("h0", self.h0, "must be positive"));
        }
        if !self.v0.is_finite() {
            return Err(ModelError::invalid("v0", self.v0, "must be finite"));
        }
        Ok(())
    }

    /// Domain checks plus strict positivity of the hazard for all `t`.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.check_domain()?;
        if !self.is_positive() {
            return Err(ModelError::NotPositive(format!(
                "sinusoidal hazard dips to {:.6} (needs c > {:.6})",
                self.minimum(),
                self.positivity_threshold()
            )));
        }
        Ok(())
    }

    /// Oscillation amplitude `sqrt((h0 - c)^2 + (v0/omega)^2)`.
    pub fn amplitude(&self) -> f64 {
        (self.h0 - self.c).hypot(self.v0 / self.omega)
    }

    /// `min_t h(t) = c - R`.
    pub fn minimum(&self) -> f64 {
        self.c - self.amplitude()
    }

    /// Smallest baseline `c` that keeps the hazard positive given `h0, v0, omega`.
    pub fn positivity_threshold(&self) -> f64 {
        self.h0 / 2.0 + self.v0 * self.v0 / (2.0 * self.h0 * self.omega * self.omega)
    }

    /// Strict positivity for every `t`: `c > h0/2 + v0^2 / (2 h0 omega^2)`.
    pub fn is_positive(&self) -> bool {
        self.c > self.positivity_threshold()
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    pub fn hazard(&self, t: f64) -> f64 {
        let (s, c) = (self.omega * t).sin_cos();
        (self.h0 - self.c) * c + self.v0 / self.omega * s + self.c
    }

    pub fn cum_hazard(&self, t: f64) -> f64 {
        let (s, c) = (self.omega * t).sin_cos();
        self.c * t
            + (self.h0 - self.c) / self.omega * s
            + self.v0 / (self.omega * self.omega) * (1.0 - c)
    }

    /// Density `h(t) exp(-H(t))`.
    pub fn pdf(&self, t: f64) -> f64 {
        self.hazard(t) * (-self.cum_hazard(t)).exp()
    }

    /// Largest possible deficit of `H(t)` below `c t`.
    pub fn cum_hazard_deficit(&self) -> f64 {
        let w2 = self.omega * self.omega;
        (self.h0 - self.c).abs() / self.omega + (-2.0 * self.v0 / w2).max(0.0)
    }

    #[inline]
    pub fn derivative(&self, state: State2) -> State2 {
        State2::new(state.v, -self.omega * self.omega * (state.h - self.c))
    }
}

/// Evaluates the positivity inequality; requires `h0 > 0`.
pub fn sinusoidal_positivity(p: &SinusoidalParams) -> Result<bool, ModelError> {
    if !(p.h0 > 0.0) {
        return Err(ModelError::invalid(
            "h0",
            p.h0,
            "positivity check needs h0 > 0",
        ));
    }
    Ok(p.is_positive())
}
