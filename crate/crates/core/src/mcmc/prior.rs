use crate::dataset::SurvivalDataset;
use crate::inference::{ModelFamily, Transform};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    Gamma {
        shape: f64,
        rate: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Improper constant density.
    Flat,
}

impl Prior {
    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Prior::Gamma { shape, rate } => {
                if x > 0.0 {
                    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
                } else {
                    f64::NEG_INFINITY
                }
            }
            Prior::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln() - 0.5 * (2.0 * PI).ln()
            }
            Prior::Flat => 0.0,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            Prior::Gamma { shape, rate } => Some(shape / rate),
            Prior::Normal { mean, .. } => Some(mean),
            Prior::Flat => None,
        }
    }
}

/// Independent per-parameter priors.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub priors: Vec<Prior>,
}

impl PriorSpec {
    /// Gamma(2, 2) on every positive parameter, Normal(0, 1) on sign-free ones.
    pub fn default_for(family: ModelFamily) -> Self {
        let priors = family
            .transforms()
            .iter()
            .map(|t| match t {
                Transform::Log => Prior::Gamma {
                    shape: 2.0,
                    rate: 2.0,
                },
                Transform::Identity => Prior::Normal { mean: 0.0, sd: 1.0 },
            })
            .collect();
        Self { priors }
    }

    pub fn flat(dim: usize) -> Self {
        Self {
            priors: vec![Prior::Flat; dim],
        }
    }

    pub fn log_density(&self, params: &[f64]) -> f64 {
        if params.len() != self.priors.len() {
            return f64::NEG_INFINITY;
        }
        self.priors
            .iter()
            .zip(params)
            .map(|(p, &x)| p.log_density(x))
            .sum()
    }

    /// Prior means, with `fallback` for improper components.
    pub fn means(&self, fallback: f64) -> Vec<f64> {
        self.priors
            .iter()
            .map(|p| p.mean().unwrap_or(fallback))
            .collect()
    }
}

/// Log-likelihood plus log-prior; `-inf` whenever either is.
pub fn log_posterior(
    family: ModelFamily,
    params: &[f64],
    data: &SurvivalDataset,
    prior: &PriorSpec,
) -> f64 {
    let lp = prior.log_density(params);
    if lp == f64::NEG_INFINITY || lp.is_nan() {
        return f64::NEG_INFINITY;
    }
    let ll = family.log_likelihood(params, data);
    if ll == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    ll + lp
}
