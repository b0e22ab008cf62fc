//! Damped oscillatory hazard: `h'' + alpha h' + beta h = gamma`.

use super::ModelError;
use crate::ode::State2;

/// Relative width of the band in which the discriminant counts as zero.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingRegime {
    Underdamped { discriminant: f64 },
    CriticallyDamped { discriminant: f64 },
    Overdamped { discriminant: f64 },
}

impl DampingRegime {
    pub fn discriminant(&self) -> f64 {
        match *self {
            Self::Underdamped { discriminant }
            | Self::CriticallyDamped { discriminant }
            | Self::Overdamped { discriminant } => discriminant,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Underdamped { .. } => "underdamped",
            Self::CriticallyDamped { .. } => "critically-damped",
            Self::Overdamped { .. } => "overdamped",
        }
    }
}

/// Classifies the characteristic polynomial `r^2 + alpha r + beta` by the sign
/// of `alpha^2 - 4 beta`.
pub fn classify_damping(alpha: f64, beta: f64) -> Result<DampingRegime, ModelError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ModelError::invalid("alpha", alpha, "must be positive"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(ModelError::invalid("beta", beta, "must be positive"));
    }
    let discriminant = alpha * alpha - 4.0 * beta;
    let band = CRITICAL_TOLERANCE * (alpha * alpha).max(4.0 * beta);
    Ok(if discriminant.abs() <= band {
        DampingRegime::CriticallyDamped { discriminant }
    } else if discriminant < 0.0 {
        DampingRegime::Underdamped { discriminant }
    } else {
        DampingRegime::Overdamped { discriminant }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedOscParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub h0: f64,
    pub v0: f64,
}

/// Regime-specific constants of the closed-form solution.
#[derive(Debug, Clone, Copy)]
enum Solution {
    /// `e^{-a t/2} (A cos wt + B sin wt)`
    Under { a: f64, b: f64, omega: f64 },
    /// `(A + B t) e^{-a t/2}`
    Critical { a: f64, b: f64 },
    /// `A e^{r1 t} + B e^{r2 t}`
    Over { a: f64, b: f64, r1: f64, r2: f64 },
}

impl DampedOscParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, h0: f64, v0: f64) -> Result<Self, ModelError> {
        let p = Self {
            alpha,
            beta,
            gamma,
            h0,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        classify_damping(self.alpha, self.beta)?;
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(ModelError::invalid(
                "gamma",
                self.gamma,
                "equilibrium gamma/beta must be non-negative",
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

    /// Long-run hazard `gamma / beta`.
    pub fn equilibrium(&self) -> f64 {
        self.gamma / self.beta
    }

    pub fn regime(&self) -> DampingRegime {
        classify_damping(self.alpha, self.beta).expect("validated parameters")
    }

    fn solution(&self) -> Solution {
        let a = self.h0 - self.equilibrium();
        let half = 0.5 * self.alpha;
        match self.regime() {
            DampingRegime::Underdamped { discriminant } => {
                let omega = 0.5 * (-discriminant).sqrt();
                Solution::Under {
                    a,
                    b: (self.v0 + half * a) / omega,
                    omega,
                }
            }
            DampingRegime::CriticallyDamped { .. } => Solution::Critical {
                a,
                b: self.v0 + half * a,
            },
            DampingRegime::Overdamped { discriminant } => {
                let root = 0.5 * discriminant.sqrt();
                let (r1, r2) = (-half + root, -half - root);
                Solution::Over {
                    a: (self.v0 - r2 * a) / (r1 - r2),
                    b: (r1 * a - self.v0) / (r1 - r2),
                    r1,
                    r2,
                }
            }
        }
    }

    /// Closed-form hazard in every damping regime.
    pub fn hazard(&self, t: f64) -> f64 {
        let eq = self.equilibrium();
        let half = 0.5 * self.alpha;
        match self.solution() {
            Solution::Under { a, b, omega } => {
                let (s, c) = (omega * t).sin_cos();
                (-half * t).exp() * (a * c + b * s) + eq
            }
            Solution::Critical { a, b } => (a + b * t) * (-half * t).exp() + eq,
            Solution::Over { a, b, r1, r2 } => a * (r1 * t).exp() + b * (r2 * t).exp() + eq,
        }
    }

    /// Closed-form cumulative hazard. The underdamped branch uses the
    /// standard phase-shifted antiderivative; the other two integrate their exponentials
    /// term by term.
    pub fn cum_hazard(&self, t: f64) -> f64 {
        let eq = self.equilibrium();
        let half = 0.5 * self.alpha;
        match self.solution() {
            Solution::Under { a, b, omega } => {
                let (s, c) = (omega * t).sin_cos();
                let decay = (-half * t).exp();
                eq * t
                    + a / self.beta * (half + decay * (-half * c + omega * s))
                    + b / self.beta * (omega + decay * (-half * s - omega * c))
            }
            Solution::Critical { a, b } => {
                let k = half;
                let decay = (-k * t).exp();
                eq * t + a * (-(-k * t).exp_m1()) / k + b * (1.0 - decay * (1.0 + k * t)) / (k * k)
            }
            Solution::Over { a, b, r1, r2 } => {
                eq * t + a * (r1 * t).exp_m1() / r1 + b * (r2 * t).exp_m1() / r2
            }
        }
    }

    /// `(h(t), H(t))` sharing one evaluation of the exponential and
    /// trigonometric factors; the likelihood's hot path.
    pub fn hazard_and_cum(&self, t: f64) -> (f64, f64) {
        let eq = self.equilibrium();
        let half = 0.5 * self.alpha;
        match self.solution() {
            Solution::Under { a, b, omega } => {
                let (s, c) = (omega * t).sin_cos();
                let decay = (-half * t).exp();
                let h = decay * (a * c + b * s) + eq;
                let cum = eq * t
                    + a / self.beta * (half + decay * (-half * c + omega * s))
                    + b / self.beta * (omega + decay * (-half * s - omega * c));
                (h, cum)
            }
            _ => (self.hazard(t), self.cum_hazard(t)),
        }
    }

    /// Upper bound on `integral_0^inf |h(u) - gamma/beta| du`, so that
    /// `H(t) >= (gamma/beta) t - bound` for every `t`.
    pub fn transient_l1_bound(&self) -> f64 {
        match self.solution() {
            Solution::Under { a, b, .. } => 2.0 * a.hypot(b) / self.alpha,
            Solution::Critical { a, b } => {
                let k = 0.5 * self.alpha;
                a.abs() / k + b.abs() / (k * k)
            }
            Solution::Over { a, b, r1, r2 } => a.abs() / r1.abs() + b.abs() / r2.abs(),
        }
    }

    #[inline]
    pub fn derivative(&self, state: State2) -> State2 {
        State2::new(
            state.v,
            -self.alpha * state.v - self.beta * state.h + self.gamma,
        )
    }
}
