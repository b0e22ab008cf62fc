//! Autonomy coefficients `a(t) = f'(t)/f(t)` for two classical families.
//!
//! With this definition the hazard obeys `h' = a h + h^2` (since
//! `h = f/S` and `S' = -f`); the tests reconstruct `h'` that way.

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceModel {
    /// Hazard `beta kappa t^(kappa - 1)`.
    Weibull {
        beta: f64,
        kappa: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
}

/// Evaluates `a(t)`. The Weibull branch is expressed through the current
/// hazard `h`; the log-normal branch depends on `t` only.
pub fn riccati_autonomy(model: ReferenceModel, t: f64, h: f64) -> Result<f64, ModelError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(ModelError::invalid("t", t, "must be positive"));
    }
    match model {
        ReferenceModel::Weibull { beta, kappa } => {
            if !(beta > 0.0 && kappa > 0.0) {
                return Err(ModelError::invalid(
                    "beta/kappa",
                    beta.min(kappa),
                    "must be positive",
                ));
            }
            if kappa == 1.0 {
                return Err(ModelError::invalid(
                    "kappa",
                    kappa,
                    "the exponential case has no autonomous form",
                ));
            }
            if !(h > 0.0) {
                return Err(ModelError::invalid("h", h, "must be positive"));
            }
            Ok((kappa - 1.0) * (beta * kappa / h).powf(1.0 / (kappa - 1.0)) - h)
        }
        ReferenceModel::LogNormal { mu, sigma } => {
            if !(sigma > 0.0) {
                return Err(ModelError::invalid("sigma", sigma, "must be positive"));
            }
            let s2 = sigma * sigma;
            Ok((mu - s2 - t.ln()) / (s2 * t))
        }
    }
}
