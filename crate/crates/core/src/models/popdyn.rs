//! Logistic hazard dynamics: the damped second-order model and its two
//! comparators (first-order logistic and delayed logistic).

use super::ModelError;
use crate::ode::{OdeError, State2, TimeGrid, Trajectory};

/// Damped second-order logistic: `h'' + eta h' = r h (1 - h/K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopDynParams {
    pub r: f64,
    pub k: f64,
    pub eta: f64,
    pub h0: f64,
    pub v0: f64,
}

impl PopDynParams {
    pub fn new(r: f64, k: f64, eta: f64, h0: f64, v0: f64) -> Result<Self, ModelError> {
        let p = Self { r, k, eta, h0, v0 };
        p.validate()?;
        Ok(p)
    }

    /// Builds from the dimensionless damping `zeta = eta / sqrt(r)`.
    pub fn from_zeta(r: f64, k: f64, zeta: f64, h0: f64, v0: f64) -> Result<Self, ModelError> {
        if !(r > 0.0) {
            return Err(ModelError::invalid("r", r, "must be positive"));
        }
        Self::new(r, k, zeta * r.sqrt(), h0, v0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("r", self.r),
            ("K", self.k),
            ("eta", self.eta),
            ("h0", self.h0),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::invalid(name, value, "must be positive"));
            }
        }
        if !self.v0.is_finite() {
            return Err(ModelError::invalid("v0", self.v0, "must be finite"));
        }
        Ok(())
    }

    pub fn zeta(&self) -> f64 {
        self.eta / self.r.sqrt()
    }

    /// Parameters of the rescaled system `x = h/K`, `tau = sqrt(r) t`.
    pub fn rescaled(&self) -> PopDynParams {
        PopDynParams {
            r: 1.0,
            k: 1.0,
            eta: self.zeta(),
            h0: self.h0 / self.k,
            v0: self.v0 / (self.k * self.r.sqrt()),
        }
    }

    #[inline]
    pub fn derivative(&self, state: State2) -> State2 {
        State2::new(
            state.v,
            self.r * state.h * (1.0 - state.h / self.k) - self.eta * state.v,
        )
    }
}

fn check_logistic(r: f64, k: f64, h0: f64) -> Result<(), ModelError> {
    for (name, value) in [("r", r), ("K", k), ("h0", h0)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ModelError::invalid(name, value, "must be positive"));
        }
    }
    Ok(())
}

/// Sigmoid solution of `h' = r h (1 - h/K)`.
pub fn logistic_first_order_hazard(t: f64, r: f64, k: f64, h0: f64) -> Result<f64, ModelError> {
    check_logistic(r, k, h0)?;
    // divide through by e^{rt} so large rt stays finite
    let decay = (-r * t).exp();
    Ok(k * h0 / (k * decay + h0 * (1.0 - decay)))
}

/// First-order logistic lifted to the two-state form, with `v` tracking `h'`.
pub fn logistic_first_order_field(r: f64, k: f64) -> impl Fn(f64, State2) -> State2 {
    move |_t, s: State2| {
        let slope = r * s.h * (1.0 - s.h / k);
        State2::new(slope, r * (1.0 - 2.0 * s.h / k) * slope)
    }
}

/// Closed-form cumulative hazard of the first-order logistic.
pub fn logistic_first_order_cumhaz(t: f64, r: f64, k: f64, h0: f64) -> Result<f64, ModelError> {
    check_logistic(r, k, h0)?;
    // H(t) = (K/r) ln(1 + h0 (e^{rt} - 1)/K)
    let growth = (r * t).exp_m1();
    Ok(k / r * (h0 * growth / k).ln_1p())
}

/// Solves `h'(t) = r h(t) (1 - h(t - tau)/K)` with constant history `h0` on
/// `[-tau, 0]`. Lagged values inside the RK4 stages are read by linear
/// interpolation from the part of the trajectory already computed.
pub fn delayed_logistic_solve(
    r: f64,
    k: f64,
    tau: f64,
    h0: f64,
    grid: TimeGrid,
) -> Result<Trajectory, ModelError> {
    check_logistic(r, k, h0)?;
    let dt = grid.dt();
    if !(tau >= dt) {
        return Err(ModelError::invalid(
            "tau",
            tau,
            "delay must be at least one step",
        ));
    }
    let t0 = grid.t0();
    let n = grid.n_steps();
    let mut h = Vec::with_capacity(n + 1);
    h.push(h0);

    let lagged = |h: &[f64], t: f64| -> f64 {
        let s = t - tau;
        if s <= t0 {
            return h0;
        }
        let pos = (s - t0) / dt;
        let i = pos.floor() as usize;
        if i + 1 >= h.len() {
            // only reachable when tau < dt, rejected above
            return h[h.len() - 1];
        }
        let w = pos - i as f64;
        h[i] + w * (h[i + 1] - h[i])
    };
    let rate = |hv: f64, lag: f64| r * hv * (1.0 - lag / k);

    for i in 0..n {
        let t = grid.time(i);
        let hi = h[i];
        let half = 0.5 * dt;
        let lag_0 = lagged(&h, t);
        let lag_half = lagged(&h, t + half);
        let lag_1 = lagged(&h, t + dt);
        let k1 = rate(hi, lag_0);
        let k2 = rate(hi + half * k1, lag_half);
        let k3 = rate(hi + half * k2, lag_half);
        let k4 = rate(hi + dt * k3, lag_1);
        let next = hi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(OdeError::Blowup { t }.into());
        }
        h.push(next);
    }
    let v: Vec<f64> = (0..=n)
        .map(|i| rate(h[i], lagged(&h, grid.time(i))))
        .collect();
    Ok(Trajectory::from_samples(grid, h, v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{cumulative_trapezoid, integrate};
    use approx::assert_abs_diff_eq;

    fn reference_popdyn() -> PopDynParams {
        PopDynParams::from_zeta(0.8, 1.0, 0.5, 0.1, 0.2).unwrap()
    }

    #[test]
    fn equilibrium_and_direct_substitution() {
        let p = reference_popdyn();
        assert_eq!(p.derivative(State2::new(1.0, 0.0)), State2::new(0.0, 0.0));
        assert_abs_diff_eq!(p.derivative(State2::new(0.5, 0.0)).v, 0.2, epsilon = 1e-15);
        assert!(PopDynParams::new(0.8, 1.0, 0.0, 0.1, 0.2).is_err());
    }

    #[test]
    fn second_order_overshoots_then_settles() {
        let p = reference_popdyn();
        let field = |_t: f64, s: State2| p.derivative(s);
        let traj = integrate(
            &field,
            State2::new(p.h0, p.v0),
            TimeGrid::from_zero(40.0, 1e-3).unwrap(),
        )
        .unwrap();
        assert!(traj.hazard().iter().any(|&h| h > 1.0));
        assert_abs_diff_eq!(*traj.hazard().last().unwrap(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn rescaled_system_coincides() {
        let p = PopDynParams::new(0.8, 2.5, 0.6, 0.3, 0.1).unwrap();
        let q = p.rescaled();
        let dt = 1e-3;
        let orig = integrate(
            &|_t: f64, s: State2| p.derivative(s),
            State2::new(p.h0, p.v0),
            TimeGrid::from_zero(30.0, dt).unwrap(),
        )
        .unwrap();
        let sr = p.r.sqrt();
        let scaled = integrate(
            &|_t: f64, s: State2| q.derivative(s),
            State2::new(q.h0, q.v0),
            TimeGrid::from_zero(30.0 * sr, dt).unwrap(),
        )
        .unwrap();
        for i in (0..orig.len()).step_by(997) {
            let t = orig.grid().time(i);
            let x = scaled
                .interp(
                    crate::ode::Channel::Hazard,
                    (t * sr).min(scaled.grid().last_time()),
                )
                .unwrap();
            assert_abs_diff_eq!(orig.hazard()[i], p.k * x, epsilon = 1e-6);
        }
    }

    #[test]
    fn first_order_examples() {
        assert_eq!(
            logistic_first_order_hazard(0.0, 0.8, 1.0, 0.1).unwrap(),
            0.1
        );
        assert_abs_diff_eq!(
            logistic_first_order_hazard(50.0, 0.8, 1.0, 0.1).unwrap(),
            1.0,
            epsilon = 1e-9
        );
        let mut prev = 0.0;
        for i in 0..400 {
            let h = logistic_first_order_hazard(i as f64 * 0.1, 0.8, 1.0, 0.1).unwrap();
            assert!(h >= prev);
            prev = h;
        }
        assert!(logistic_first_order_hazard(1.0, -0.8, 1.0, 0.1).is_err());
    }

    #[test]
    fn first_order_cumhaz_is_antiderivative() {
        let dt = 1e-4;
        let h: Vec<f64> = (0..=100_000)
            .map(|i| logistic_first_order_hazard(i as f64 * dt, 0.8, 1.0, 0.1).unwrap())
            .collect();
        let cum = cumulative_trapezoid(&h, dt).unwrap();
        assert_abs_diff_eq!(
            logistic_first_order_cumhaz(10.0, 0.8, 1.0, 0.1).unwrap(),
            cum[100_000],
            epsilon = 1e-7
        );
    }

    #[test]
    fn short_delay_approaches_first_order() {
        let grid = TimeGrid::from_zero(20.0, 1e-3).unwrap();
        let traj = delayed_logistic_solve(0.8, 1.0, 1e-3, 0.1, grid).unwrap();
        let worst = traj
            .times()
            .zip(traj.hazard())
            .map(|(t, h)| (h - logistic_first_order_hazard(t, 0.8, 1.0, 0.1).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-3, "worst = {worst}");
    }

    #[test]
    fn long_delay_overshoots() {
        let grid = TimeGrid::from_zero(40.0, 1e-3).unwrap();
        let traj = delayed_logistic_solve(0.8, 1.0, 1.2, 0.1, grid).unwrap();
        assert!(traj.hazard().iter().any(|&h| h > 1.0));
    }

    #[test]
    fn equilibrium_start_stays_put() {
        let grid = TimeGrid::from_zero(10.0, 1e-2).unwrap();
        let traj = delayed_logistic_solve(0.8, 1.0, 1.2, 1.0, grid).unwrap();
        assert!(traj.hazard().iter().all(|&h| h == 1.0));
        assert!(delayed_logistic_solve(0.8, 1.0, 1e-3, 1.0, grid).is_err());
    }
}
