//! Fixed-step engine for two-state hazard systems.
//!
//! A second-order hazard equation `h'' = phi(h, h', t)` is carried as the
//! state `(h, v)` with `v = h'`. The engine advances it with classical RK4
//! on a uniform grid and accumulates the cumulative hazard with the
//! trapezoidal rule on the same grid.

use thiserror::Error;

/// Default step size in model time units.
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("integration blew up near t = {t}")]
    Blowup { t: f64 },
    #[error("t = {t} outside trajectory range [{t0}, {t_end}]")]
    OutOfRange { t: f64, t0: f64, t_end: f64 },
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
}

/// Uniform grid `t_i = t0 + i * dt`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Result<Self, OdeError> {
        if !(t0.is_finite() && t_end.is_finite() && dt.is_finite()) {
            return Err(OdeError::InvalidGrid("non-finite bounds or step".into()));
        }
        if dt <= 0.0 {
            return Err(OdeError::InvalidGrid(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if t_end <= t0 {
            return Err(OdeError::InvalidGrid(format!(
                "t_end ({t_end}) must exceed t0 ({t0})"
            )));
        }
        let n_steps = ((t_end - t0) / dt).round() as usize;
        if n_steps == 0 {
            return Err(OdeError::InvalidGrid("grid has no steps".into()));
        }
        Ok(Self {
            t0,
            t_end,
            dt,
            n_steps,
        })
    }

    /// Grid anchored at zero.
    pub fn from_zero(t_end: f64, dt: f64) -> Result<Self, OdeError> {
        Self::new(0.0, t_end, dt)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of node `i`, computed from the index (never by summing `dt`).
    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Time of the last node.
    pub fn last_time(&self) -> f64 {
        self.time(self.n_steps)
    }

    fn with_steps(&self, n_steps: usize) -> Self {
        Self {
            n_steps,
            t_end: self.t0 + n_steps as f64 * self.dt,
            ..*self
        }
    }
}

/// Hazard level and its first derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State2 {
    pub h: f64,
    pub v: f64,
}

impl State2 {
    pub const fn new(h: f64, v: f64) -> Self {
        Self { h, v }
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.v.is_finite()
    }

    #[inline]
    fn axpy(self, a: f64, k: State2) -> State2 {
        State2::new(self.h + a * k.h, self.v + a * k.v)
    }
}

/// Right-hand side of the state-space system: returns `(h', v')`.
pub trait VectorField {
    fn derivative(&self, t: f64, state: State2) -> State2;
}

impl<F> VectorField for F
where
    F: Fn(f64, State2) -> State2,
{
    #[inline]
    fn derivative(&self, t: f64, state: State2) -> State2 {
        self(t, state)
    }
}

/// One classical RK4 step of size `dt` from `(t, state)`.
pub fn rk4_step<F: VectorField + ?Sized>(
    state: State2,
    t: f64,
    dt: f64,
    field: &F,
) -> Result<State2, OdeError> {
    if !(dt > 0.0) {
        return Err(OdeError::InvalidGrid(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !state.is_finite() {
        return Err(OdeError::NonFinite("state"));
    }
    let half = 0.5 * dt;
    let k1 = field.derivative(t, state);
    let k2 = field.derivative(t + half, state.axpy(half, k1));
    let k3 = field.derivative(t + half, state.axpy(half, k2));
    let k4 = field.derivative(t + dt, state.axpy(dt, k3));
    if !(k1.is_finite() && k2.is_finite() && k3.is_finite() && k4.is_finite()) {
        return Err(OdeError::Blowup { t });
    }
    let next = State2::new(
        state.h + dt / 6.0 * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h),
        state.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
    );
    if !next.is_finite() {
        return Err(OdeError::Blowup { t });
    }
    Ok(next)
}

/// Which stored sequence of a [`Trajectory`] to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Hazard,
    Slope,
    CumHazard,
}

/// Discrete solution on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    h: Vec<f64>,
    v: Vec<f64>,
    cum: Vec<f64>,
    negative_at: Option<f64>,
}

impl Trajectory {
    /// Assembles a trajectory from precomputed hazard and slope samples,
    /// filling the cumulative hazard by the trapezoidal rule.
    pub fn from_samples(grid: TimeGrid, h: Vec<f64>, v: Vec<f64>) -> Result<Self, OdeError> {
        if h.len() != grid.len() || v.len() != grid.len() {
            return Err(OdeError::InvalidGrid(format!(
                "expected {} samples, got h={} v={}",
                grid.len(),
                h.len(),
                v.len()
            )));
        }
        if h.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(OdeError::NonFinite("trajectory samples"));
        }
        let cum = cumulative_trapezoid(&h, grid.dt())?;
        let negative_at = h.iter().position(|&x| x < 0.0).map(|i| grid.time(i));
        Ok(Self {
            grid,
            h,
            v,
            cum,
            negative_at,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hazard(&self) -> &[f64] {
        &self.h
    }

    pub fn slope(&self) -> &[f64] {
        &self.v
    }

    pub fn cum_hazard(&self) -> &[f64] {
        &self.cum
    }

    pub fn channel(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::Hazard => &self.h,
            Channel::Slope => &self.v,
            Channel::CumHazard => &self.cum,
        }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.grid.time(i))
    }

    /// First grid time at which the hazard went negative, if any.
    pub fn negative_hazard_at(&self) -> Option<f64> {
        self.negative_at
    }

    pub fn last_state(&self) -> State2 {
        let i = self.len() - 1;
        State2::new(self.h[i], self.v[i])
    }

    /// Piecewise-linear interpolation of one channel at `t`.
    pub fn interp(&self, channel: Channel, t: f64) -> Result<f64, OdeError> {
        interp_linear(self, channel, t)
    }

    /// Continues the integration for `extra_steps` more steps on the same grid.
    pub fn extend<F: VectorField + ?Sized>(
        &mut self,
        field: &F,
        extra_steps: usize,
    ) -> Result<(), OdeError> {
        let start = self.grid.n_steps();
        let grid = self.grid.with_steps(start + extra_steps);
        self.h.reserve(extra_steps);
        self.v.reserve(extra_steps);
        self.cum.reserve(extra_steps);
        let mut state = self.last_state();
        let dt = grid.dt();
        for i in start..start + extra_steps {
            state = rk4_step(state, grid.time(i), dt, field)?;
            let prev_h = self.h[i];
            let prev_cum = self.cum[i];
            self.h.push(state.h);
            self.v.push(state.v);
            self.cum.push(prev_cum + dt * (prev_h + state.h) / 2.0);
            if self.negative_at.is_none() && state.h < 0.0 {
                self.negative_at = Some(grid.time(i + 1));
            }
        }
        self.grid = grid;
        Ok(())
    }
}

/// Integrates `field` from `init` across `grid`, accumulating `H` alongside.
///
/// A negative hazard is recorded in [`Trajectory::negative_hazard_at`]
/// rather than treated as an error.
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    init: State2,
    grid: TimeGrid,
) -> Result<Trajectory, OdeError> {
    if !init.is_finite() {
        return Err(OdeError::NonFinite("initial state"));
    }
    let start = grid.with_steps(0);
    let mut traj = Trajectory {
        grid: start,
        h: vec![init.h],
        v: vec![init.v],
        cum: vec![0.0],
        negative_at: (init.h < 0.0).then_some(grid.t0()),
    };
    traj.extend(field, grid.n_steps())?;
    traj.grid = grid;
    Ok(traj)
}

/// Running trapezoidal integral with `out[0] = 0`.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Result<Vec<f64>, OdeError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(OdeError::InvalidGrid(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(OdeError::NonFinite("trapezoid values"));
    }
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    if !values.is_empty() {
        out.push(0.0);
    }
    for w in values.windows(2) {
        acc += dt * (w[0] + w[1]) / 2.0;
        out.push(acc);
    }
    Ok(out)
}

/// Linear interpolation of `channel` at time `t`; exact at grid nodes.
pub fn interp_linear(traj: &Trajectory, channel: Channel, t: f64) -> Result<f64, OdeError> {
    let grid = traj.grid;
    let last = grid.last_time();
    if !(t >= grid.t0() && t <= last) {
        return Err(OdeError::OutOfRange {
            t,
            t0: grid.t0(),
            t_end: last,
        });
    }
    let ys = traj.channel(channel);
    let pos = (t - grid.t0()) / grid.dt();
    let i = (pos.floor() as usize).min(grid.n_steps());
    if i == grid.n_steps() {
        return Ok(ys[i]);
    }
    let ti = grid.time(i);
    if t == ti {
        return Ok(ys[i]);
    }
    let w = (t - ti) / grid.dt();
    Ok(ys[i] + w * (ys[i + 1] - ys[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn oscillator(_t: f64, s: State2) -> State2 {
        State2::new(s.v, -s.h)
    }

    #[test]
    fn constant_velocity_step_is_exact() {
        let field = |_t: f64, s: State2| State2::new(s.v, 0.0);
        let next = rk4_step(State2::new(1.0, 2.0), 0.0, 0.5, &field).unwrap();
        assert_eq!(next, State2::new(2.0, 2.0));
    }

    #[test]
    fn oscillator_reaches_zero_at_quarter_period() {
        let dt = 1e-3;
        let n = (std::f64::consts::FRAC_PI_2 / dt).floor() as usize;
        let mut s = State2::new(1.0, 0.0);
        for i in 0..n {
            s = rk4_step(s, i as f64 * dt, dt, &oscillator).unwrap();
        }
        // finish with a partial step landing exactly on pi/2
        let rest = std::f64::consts::FRAC_PI_2 - n as f64 * dt;
        s = rk4_step(s, n as f64 * dt, rest, &oscillator).unwrap();
        assert!(s.h.abs() <= 1e-9, "h = {}", s.h);
    }

    #[test]
    fn rk4_rejects_bad_step_and_reports_blowup() {
        assert!(rk4_step(State2::new(1.0, 0.0), 0.0, 0.0, &oscillator).is_err());
        let bad = |_t: f64, _s: State2| State2::new(f64::NAN, 0.0);
        assert_eq!(
            rk4_step(State2::new(1.0, 0.0), 3.0, 0.1, &bad),
            Err(OdeError::Blowup { t: 3.0 })
        );
    }

    #[test]
    fn constant_hazard_accumulates_linearly() {
        let field = |_t: f64, _s: State2| State2::new(0.0, 0.0);
        let grid = TimeGrid::from_zero(10.0, 0.01).unwrap();
        let traj = integrate(&field, State2::new(0.6, 0.0), grid).unwrap();
        assert_eq!(traj.len(), 1001);
        assert_abs_diff_eq!(*traj.cum_hazard().last().unwrap(), 6.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            traj.interp(Channel::CumHazard, 2.5).unwrap(),
            1.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn negative_start_is_flagged_not_fatal() {
        let grid = TimeGrid::from_zero(1.0, 0.01).unwrap();
        let traj = integrate(&oscillator, State2::new(-1.0, 0.0), grid).unwrap();
        assert_eq!(traj.negative_hazard_at(), Some(0.0));
        assert_eq!(traj.hazard()[0], -1.0);
    }

    #[test]
    fn trapezoid_examples() {
        assert_eq!(
            cumulative_trapezoid(&[1.0, 1.0, 1.0], 1.0).unwrap(),
            vec![0.0, 1.0, 2.0]
        );
        assert_eq!(
            cumulative_trapezoid(&[0.0, 1.0, 2.0], 1.0).unwrap(),
            vec![0.0, 0.5, 2.0]
        );
        assert!(cumulative_trapezoid(&[1.0, f64::NAN], 1.0).is_err());
    }

    #[test]
    fn interpolation_nodes_midpoints_and_range() {
        let grid = TimeGrid::from_zero(1.0, 0.25).unwrap();
        let h = vec![0.0, 1.0, 4.0, 9.0, 16.0];
        let traj = Trajectory::from_samples(grid, h.clone(), vec![0.0; 5]).unwrap();
        for (i, &hi) in h.iter().enumerate() {
            assert_eq!(traj.interp(Channel::Hazard, grid.time(i)).unwrap(), hi);
        }
        assert_eq!(traj.interp(Channel::Hazard, 0.375).unwrap(), 2.5);
        assert!(matches!(
            traj.interp(Channel::Hazard, 1.5),
            Err(OdeError::OutOfRange { .. })
        ));
        assert!(traj.interp(Channel::Hazard, -0.1).is_err());
    }

    #[test]
    fn grid_nodes_come_from_index() {
        let grid = TimeGrid::new(0.1, 100.1, 1e-3).unwrap();
        assert_eq!(grid.n_steps(), 100_000);
        for i in [0usize, 1, 777, 99_999, 100_000] {
            assert_eq!(grid.time(i), 0.1 + i as f64 * 1e-3);
        }
        assert!(TimeGrid::new(0.0, -1.0, 0.1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rk4_is_fourth_order() {
        let horizon = 10.0;
        let max_err = |dt: f64| {
            let grid = TimeGrid::from_zero(horizon, dt).unwrap();
            let traj = integrate(&oscillator, State2::new(1.0, 0.0), grid).unwrap();
            traj.times()
                .zip(traj.hazard())
                .map(|(t, h)| (h - t.cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = max_err(0.1) / max_err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn extension_matches_single_run() {
        let grid_full = TimeGrid::from_zero(4.0, 0.01).unwrap();
        let full = integrate(&oscillator, State2::new(1.0, 0.3), grid_full).unwrap();
        let grid_half = TimeGrid::from_zero(2.0, 0.01).unwrap();
        let mut part = integrate(&oscillator, State2::new(1.0, 0.3), grid_half).unwrap();
        part.extend(&oscillator, 200).unwrap();
        assert_eq!(part.hazard(), full.hazard());
        assert_eq!(part.cum_hazard(), full.cum_hazard());
    }

    #[test]
    fn integration_is_bitwise_deterministic() {
        let grid = TimeGrid::from_zero(5.0, 1e-3).unwrap();
        let a = integrate(&oscillator, State2::new(0.3, 0.1), grid).unwrap();
        let b = integrate(&oscillator, State2::new(0.3, 0.1), grid).unwrap();
        assert_eq!(a, b);
    }
}
