//! Linearisation of the state-space system around a point.

use super::{ModelError, ModelSpec};
use crate::ode::State2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian {
    /// `[[0, 1], [d phi/dh, d phi/dv]]`
    pub matrix: [[f64; 2]; 2],
    /// Real parts of the two eigenvalues, larger first.
    pub eigen_real: [f64; 2],
}

impl Jacobian {
    fn from_partials(dh: f64, dv: f64) -> Self {
        // characteristic polynomial: l^2 - dv l - dh = 0
        let disc = dv * dv + 4.0 * dh;
        let eigen_real = if disc >= 0.0 {
            let root = disc.sqrt();
            [0.5 * (dv + root), 0.5 * (dv - root)]
        } else {
            [0.5 * dv, 0.5 * dv]
        };
        Self {
            matrix: [[0.0, 1.0], [dh, dv]],
            eigen_real,
        }
    }

    /// All eigenvalues strictly in the left half-plane.
    pub fn is_asymptotically_stable(&self) -> bool {
        self.eigen_real.iter().all(|&re| re < 0.0)
    }

    pub fn unstable_directions(&self) -> usize {
        self.eigen_real.iter().filter(|&&re| re > 0.0).count()
    }
}

/// Jacobian of `(h, v) -> (v, phi(h, v))` at `at`, with hand-derived partials
/// for each family.
pub fn stability_jacobian(model: &ModelSpec, at: State2) -> Result<Jacobian, ModelError> {
    if !at.is_finite() {
        return Err(ModelError::invalid("state", f64::NAN, "must be finite"));
    }
    let (dh, dv) = match model {
        ModelSpec::Damped(p) => (-p.beta, -p.alpha),
        ModelSpec::PopDyn(p) => (p.r * (1.0 - 2.0 * at.h / p.k), -p.eta),
        ModelSpec::Sinusoidal(p) => (-p.omega * p.omega, 0.0),
        ModelSpec::ExpInteraction(p) => (p.alpha, -2.0 * p.beta * at.v),
    };
    Ok(Jacobian::from_partials(dh, dv))
}
