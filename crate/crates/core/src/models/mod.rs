//! Hazard families driven by second-order ODEs.

mod damped;
mod exp_interaction;
mod popdyn;
mod riccati;
mod sinusoidal;
mod stability;

pub use damped::{classify_damping, DampedOscParams, DampingRegime, CRITICAL_TOLERANCE};
pub use exp_interaction::{
    exp_beta0_cumhaz_closed, exp_beta0_hazard_closed, exp_beta0_positivity, ExpInteractionParams,
};
pub use popdyn::{
    delayed_logistic_solve, logistic_first_order_cumhaz, logistic_first_order_field,
    logistic_first_order_hazard, PopDynParams,
};
pub use riccati::{riccati_autonomy, ReferenceModel};
pub use sinusoidal::{sinusoidal_positivity, SinusoidalParams};
pub use stability::{stability_jacobian, Jacobian};

use crate::ode::{integrate, OdeError, State2, TimeGrid, Trajectory, VectorField};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("hazard not positive: {0}")]
    NotPositive(String),
    #[error("bad model configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

impl ModelError {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Self::Invalid {
            name,
            value,
            reason,
        }
    }
}

/// One hazard family with its parameters and initial conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Damped(DampedOscParams),
    PopDyn(PopDynParams),
    Sinusoidal(SinusoidalParams),
    ExpInteraction(ExpInteractionParams),
}

impl ModelSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Damped(_) => "damped",
            Self::PopDyn(_) => "popdyn",
            Self::Sinusoidal(_) => "sinusoidal",
            Self::ExpInteraction(_) => "exp_interaction",
        }
    }

    /// Parameter checks that must pass before sampling or likelihood use.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::Damped(p) => p.validate(),
            Self::PopDyn(p) => p.validate(),
            Self::Sinusoidal(p) => p.validate(),
            Self::ExpInteraction(p) => p.validate(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn initial_state(&self) -> State2 {
        let (h0, v0) = match self {
            Self::Damped(p) => (p.h0, p.v0),
            Self::PopDyn(p) => (p.h0, p.v0),
            Self::Sinusoidal(p) => (p.h0, p.v0),
            Self::ExpInteraction(p) => (p.h0, p.v0),
        };
        State2::new(h0, v0)
    }

    pub fn has_closed_form(&self) -> bool {
        match self {
            Self::Damped(_) | Self::Sinusoidal(_) => true,
            Self::PopDyn(_) => false,
            Self::ExpInteraction(p) => p.beta == 0.0,
        }
    }

    pub fn hazard_closed(&self, t: f64) -> Option<f64> {
        match self {
            Self::Damped(p) => Some(p.hazard(t)),
            Self::Sinusoidal(p) => Some(p.hazard(t)),
            Self::ExpInteraction(p) if p.beta == 0.0 => Some(p.beta0_hazard(t)),
            _ => None,
        }
    }

    pub fn cum_hazard_closed(&self, t: f64) -> Option<f64> {
        match self {
            Self::Damped(p) => Some(p.cum_hazard(t)),
            Self::Sinusoidal(p) => Some(p.cum_hazard(t)),
            Self::ExpInteraction(p) if p.beta == 0.0 => Some(p.beta0_cum_hazard(t)),
            _ => None,
        }
    }

    /// `(h(t), H(t))` from closed forms, if the family has them.
    #[inline]
    pub fn closed_pair(&self, t: f64) -> Option<(f64, f64)> {
        match self {
            Self::Damped(p) => Some(p.hazard_and_cum(t)),
            _ => Some((self.hazard_closed(t)?, self.cum_hazard_closed(t)?)),
        }
    }

    /// `lim_{t -> inf} H(t)` when it is provably finite (improper law).
    pub fn cum_hazard_limit(&self) -> Option<f64> {
        match self {
            Self::ExpInteraction(p) => p.cum_hazard_limit(),
            _ => None,
        }
    }

    pub fn is_improper(&self) -> bool {
        self.cum_hazard_limit().is_some()
    }

    /// Supremum of the set of `s` where the moment generating function is finite.
    pub fn mgf_domain_bound(&self) -> f64 {
        match self {
            Self::Damped(p) => p.equilibrium(),
            Self::PopDyn(p) => p.k,
            Self::Sinusoidal(p) => p.c,
            Self::ExpInteraction(_) if self.is_improper() => 0.0,
            Self::ExpInteraction(_) => f64::INFINITY,
        }
    }

    /// Integrates the model's field on `[0, t_end]`.
    pub fn trajectory(&self, t_end: f64, dt: f64) -> Result<Trajectory, ModelError> {
        let grid = TimeGrid::from_zero(t_end, dt)?;
        Ok(integrate(self, self.initial_state(), grid)?)
    }

    /// Named parameter values, keyed as in the config format.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Self::Damped(p) => vec![
                ("alpha", p.alpha),
                ("beta", p.beta),
                ("gamma", p.gamma),
                ("h0", p.h0),
                ("v0", p.v0),
            ],
            Self::PopDyn(p) => vec![
                ("r", p.r),
                ("K", p.k),
                ("eta", p.eta),
                ("h0", p.h0),
                ("v0", p.v0),
            ],
            Self::Sinusoidal(p) => {
                vec![("omega", p.omega), ("c", p.c), ("h0", p.h0), ("v0", p.v0)]
            }
            Self::ExpInteraction(p) => vec![
                ("alpha", p.alpha),
                ("beta", p.beta),
                ("h0", p.h0),
                ("v0", p.v0),
            ],
        }
    }

    /// Builds a model from flat `key = value` pairs. `model` selects the
    /// family; `constant` is shorthand for a sinusoidal model with `h0 = c`,
    /// `v0 = 0`, and `zeta` may stand in for `eta` in `popdyn`.
    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<Self, ModelError> {
        let get = |key: &str| -> Result<f64, ModelError> {
            let raw = kv
                .get(key)
                .ok_or_else(|| ModelError::Config(format!("missing key `{key}`")))?;
            raw.trim()
                .parse::<f64>()
                .map_err(|_| ModelError::Config(format!("`{key}` is not a number: {raw}")))
        };
        let tag = kv
            .get("model")
            .ok_or_else(|| ModelError::Config("missing key `model`".into()))?;
        let spec = match tag.trim() {
            "damped" => Self::Damped(DampedOscParams::new(
                get("alpha")?,
                get("beta")?,
                get("gamma")?,
                get("h0")?,
                get("v0")?,
            )?),
            "popdyn" => {
                let (r, k, h0, v0) = (get("r")?, get("K")?, get("h0")?, get("v0")?);
                let p = if kv.contains_key("eta") {
                    PopDynParams::new(r, k, get("eta")?, h0, v0)?
                } else {
                    PopDynParams::from_zeta(r, k, get("zeta")?, h0, v0)?
                };
                Self::PopDyn(p)
            }
            "sinusoidal" => Self::Sinusoidal(SinusoidalParams::new(
                get("omega")?,
                get("c")?,
                get("h0")?,
                get("v0")?,
            )?),
            "constant" => Self::Sinusoidal(SinusoidalParams::constant(get("c")?)?),
            "exp_interaction" => Self::ExpInteraction(ExpInteractionParams::new(
                get("alpha")?,
                kv.get("beta").map_or(Ok(0.0), |_| get("beta"))?,
                get("h0")?,
                get("v0")?,
            )?),
            "exp_boundary" => {
                Self::ExpInteraction(ExpInteractionParams::boundary(get("alpha")?, get("v0")?)?)
            }
            other => return Err(ModelError::Config(format!("unknown model `{other}`"))),
        };
        Ok(spec)
    }

    /// Flat `key = value` rendering accepted by [`ModelSpec::from_kv`].
    pub fn to_kv(&self) -> String {
        let mut out = format!("model = {}\n", self.tag());
        for (k, v) in self.params() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

impl VectorField for ModelSpec {
    #[inline]
    fn derivative(&self, _t: f64, state: State2) -> State2 {
        match self {
            Self::Damped(p) => p.derivative(state),
            Self::PopDyn(p) => p.derivative(state),
            Self::Sinusoidal(p) => p.derivative(state),
            Self::ExpInteraction(p) => p.derivative(state),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.tag())?;
        for (i, (k, v)) in self.params().into_iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn parse(text: &str) -> BTreeMap<String, String> {
        text.lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect()
    }

    #[test]
    fn kv_round_trip_for_every_family() {
        let specs = [
            ModelSpec::Damped(DampedOscParams::new(0.5, 1.0, 0.2, 0.1, 0.3).unwrap()),
            ModelSpec::PopDyn(PopDynParams::from_zeta(0.8, 1.0, 0.5, 0.1, 0.2).unwrap()),
            ModelSpec::Sinusoidal(SinusoidalParams::new(0.2 * PI, 0.6, 0.1, 0.2).unwrap()),
            ModelSpec::ExpInteraction(ExpInteractionParams::new(0.1, 0.1, 0.4, 0.1).unwrap()),
        ];
        for spec in specs {
            assert_eq!(ModelSpec::from_kv(&parse(&spec.to_kv())).unwrap(), spec);
        }
    }

    #[test]
    fn kv_shorthands_and_errors() {
        let c = ModelSpec::from_kv(&parse("model = constant\nc = 0.6")).unwrap();
        assert_eq!(c.hazard_closed(3.0), Some(0.6));
        let b = ModelSpec::from_kv(&parse("model = exp_boundary\nalpha = 0.1\nv0 = -0.1")).unwrap();
        assert!(b.is_improper());
        assert!(matches!(
            ModelSpec::from_kv(&parse("model = damped\nalpha = 0.5")),
            Err(ModelError::Config(_))
        ));
        assert!(matches!(
            ModelSpec::from_kv(&parse(
                "model = damped\nalpha = -1\nbeta=1\ngamma=0.2\nh0=0.1\nv0=0"
            )),
            Err(ModelError::Invalid { name: "alpha", .. })
        ));
        assert!(ModelSpec::from_kv(&parse("model = nope")).is_err());
    }

    #[test]
    fn mgf_domain_bounds() {
        let d = ModelSpec::Damped(DampedOscParams::new(0.5, 1.0, 0.2, 0.1, 0.3).unwrap());
        assert!((d.mgf_domain_bound() - 0.2).abs() < 1e-15);
        let b = ModelSpec::ExpInteraction(ExpInteractionParams::boundary(0.1, -0.1).unwrap());
        assert_eq!(b.mgf_domain_bound(), 0.0);
        let g = ModelSpec::ExpInteraction(ExpInteractionParams::new(0.1, 0.0, 0.4, 0.1).unwrap());
        assert_eq!(g.mgf_domain_bound(), f64::INFINITY);
    }
}
