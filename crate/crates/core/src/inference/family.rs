//! Fittable model families: flat parameter vectors, their constraints and
//! unconstrained coordinates.

use super::likelihood::log_likelihood;
use crate::dataset::SurvivalDataset;
use crate::models::{
    DampedOscParams, ExpInteractionParams, ModelError, ModelSpec, PopDynParams, SinusoidalParams,
};
use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

/// Map between a constrained parameter and the optimizer/sampler coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Log,
    Identity,
}

impl Transform {
    /// Constrained -> unconstrained.
    pub fn forward(self, x: f64) -> f64 {
        match self {
            Self::Log => x.ln(),
            Self::Identity => x,
        }
    }

    pub fn inverse(self, y: f64) -> f64 {
        match self {
            Self::Log => y.exp(),
            Self::Identity => y,
        }
    }

    /// `log |dx/dy|` at unconstrained `y`.
    pub fn log_jacobian(self, y: f64) -> f64 {
        match self {
            Self::Log => y,
            Self::Identity => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Log => "log",
            Self::Identity => "identity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    /// Constant hazard `c` (the sinusoidal family with `h0 = c`, `v0 = 0`).
    Constant,
    Damped,
    PopDyn,
    Sinusoidal,
    /// Exponential family with the interaction switched off.
    ExpBeta0,
    ExpInteraction,
    /// Hazard `beta kappa t^(kappa - 1)`.
    Weibull,
    LogNormal,
}

use Transform::{Identity as I, Log as L};

impl ModelFamily {
    pub const ALL: [ModelFamily; 8] = [
        Self::Constant,
        Self::Damped,
        Self::PopDyn,
        Self::Sinusoidal,
        Self::ExpBeta0,
        Self::ExpInteraction,
        Self::Weibull,
        Self::LogNormal,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Damped => "damped",
            Self::PopDyn => "popdyn",
            Self::Sinusoidal => "sinusoidal",
            Self::ExpBeta0 => "exp_beta0",
            Self::ExpInteraction => "exp_interaction",
            Self::Weibull => "weibull",
            Self::LogNormal => "lognormal",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Self::Constant => &["c"],
            Self::Damped => &["alpha", "beta", "gamma", "h0", "v0"],
            Self::PopDyn => &["r", "K", "eta", "h0", "v0"],
            Self::Sinusoidal => &["omega", "c", "h0", "v0"],
            Self::ExpBeta0 => &["alpha", "h0", "v0"],
            Self::ExpInteraction => &["alpha", "beta", "h0", "v0"],
            Self::Weibull => &["beta", "kappa"],
            Self::LogNormal => &["mu", "sigma"],
        }
    }

    pub fn transforms(self) -> &'static [Transform] {
        match self {
            Self::Constant => &[L],
            Self::Damped | Self::PopDyn => &[L, L, L, L, I],
            Self::Sinusoidal | Self::ExpInteraction => &[L, L, L, I],
            Self::ExpBeta0 => &[L, L, I],
            Self::Weibull => &[L, L],
            Self::LogNormal => &[I, L],
        }
    }

    /// Number of free parameters (the `k` of BIC).
    pub fn dim(self) -> usize {
        self.param_names().len()
    }

    /// Whether this family is driven by a hazard ODE.
    pub fn is_ode(self) -> bool {
        !matches!(self, Self::Weibull | Self::LogNormal)
    }

    pub fn to_unconstrained(self, params: &[f64]) -> Vec<f64> {
        params
            .iter()
            .zip(self.transforms())
            .map(|(&x, t)| t.forward(x))
            .collect()
    }

    pub fn from_unconstrained(self, coords: &[f64]) -> Vec<f64> {
        coords
            .iter()
            .zip(self.transforms())
            .map(|(&y, t)| t.inverse(y))
            .collect()
    }

    fn check_len(self, params: &[f64]) -> Result<(), ModelError> {
        if params.len() == self.dim() {
            Ok(())
        } else {
            Err(ModelError::Config(format!(
                "{} expects {} parameters, got {}",
                self.tag(),
                self.dim(),
                params.len()
            )))
        }
    }

    /// The ODE model for `params`, validated. `None` for the two classical
    /// baselines.
    pub fn spec(self, params: &[f64]) -> Result<Option<ModelSpec>, ModelError> {
        self.check_len(params)?;
        let p = params;
        let spec = match self {
            Self::Constant => ModelSpec::Sinusoidal(SinusoidalParams::constant(p[0])?),
            Self::Damped => ModelSpec::Damped(DampedOscParams::new(p[0], p[1], p[2], p[3], p[4])?),
            Self::PopDyn => ModelSpec::PopDyn(PopDynParams::new(p[0], p[1], p[2], p[3], p[4])?),
            Self::Sinusoidal => {
                ModelSpec::Sinusoidal(SinusoidalParams::new(p[0], p[1], p[2], p[3])?)
            }
            Self::ExpBeta0 => {
                ModelSpec::ExpInteraction(ExpInteractionParams::new(p[0], 0.0, p[1], p[2])?)
            }
            Self::ExpInteraction => {
                ModelSpec::ExpInteraction(ExpInteractionParams::new(p[0], p[1], p[2], p[3])?)
            }
            Self::Weibull | Self::LogNormal => return Ok(None),
        };
        spec.validate()?;
        Ok(Some(spec))
    }

    /// The family a model belongs to, with its parameter vector.
    pub fn of_spec(spec: &ModelSpec) -> (Self, Vec<f64>) {
        match *spec {
            ModelSpec::Damped(p) => (Self::Damped, vec![p.alpha, p.beta, p.gamma, p.h0, p.v0]),
            ModelSpec::PopDyn(p) => (Self::PopDyn, vec![p.r, p.k, p.eta, p.h0, p.v0]),
            ModelSpec::Sinusoidal(p) if p.v0 == 0.0 && p.h0 == p.c => (Self::Constant, vec![p.c]),
            ModelSpec::Sinusoidal(p) => (Self::Sinusoidal, vec![p.omega, p.c, p.h0, p.v0]),
            ModelSpec::ExpInteraction(p) if p.beta == 0.0 => {
                (Self::ExpBeta0, vec![p.alpha, p.h0, p.v0])
            }
            ModelSpec::ExpInteraction(p) => {
                (Self::ExpInteraction, vec![p.alpha, p.beta, p.h0, p.v0])
            }
        }
    }

    /// Censored log-likelihood at `params`; `-inf` for any invalid point.
    pub fn log_likelihood(self, params: &[f64], data: &SurvivalDataset) -> f64 {
        if params.len() != self.dim() || params.iter().any(|x| !x.is_finite()) {
            return f64::NEG_INFINITY;
        }
        match self {
            Self::Weibull => weibull_log_likelihood(params[0], params[1], data),
            Self::LogNormal => lognormal_log_likelihood(params[0], params[1], data),
            _ => match self.spec(params) {
                Ok(Some(spec)) => log_likelihood(&spec, data),
                _ => f64::NEG_INFINITY,
            },
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelFamily {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.tag() == s.trim())
            .ok_or_else(|| ModelError::Config(format!("unknown model family `{s}`")))
    }
}

/// Weibull with `H(t) = beta t^kappa`.
pub fn weibull_log_likelihood(beta: f64, kappa: f64, data: &SurvivalDataset) -> f64 {
    if !(beta > 0.0 && kappa > 0.0) {
        return f64::NEG_INFINITY;
    }
    let log_bk = (beta * kappa).ln();
    let mut ll = 0.0;
    for (t, event) in data.iter() {
        if event {
            ll += log_bk + (kappa - 1.0) * t.ln();
        }
        ll -= beta * t.powf(kappa);
    }
    if ll.is_nan() {
        f64::NEG_INFINITY
    } else {
        ll
    }
}

/// `log P(Z > z)` for standard normal `Z`, accurate far into the upper tail.
pub fn log_normal_sf(z: f64) -> f64 {
    if z < 30.0 {
        (0.5 * erfc(z * FRAC_1_SQRT_2)).ln()
    } else {
        // Mills-ratio expansion
        let z2 = z * z;
        -0.5 * z2 - (z * (2.0 * PI).sqrt()).ln() + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
    }
}

pub fn lognormal_log_likelihood(mu: f64, sigma: f64, data: &SurvivalDataset) -> f64 {
    if !(sigma > 0.0) {
        return f64::NEG_INFINITY;
    }
    let log_norm = sigma.ln() + 0.5 * (2.0 * PI).ln();
    let mut ll = 0.0;
    for (t, event) in data.iter() {
        let lt = t.ln();
        let z = (lt - mu) / sigma;
        ll += if event {
            -lt - log_norm - 0.5 * z * z
        } else {
            log_normal_sf(z)
        };
    }
    if ll.is_nan() {
        f64::NEG_INFINITY
    } else {
        ll
    }
}
