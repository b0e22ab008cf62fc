//! Event-time simulation by inverting the cumulative hazard, plus
//! right-censoring and `c_max` tuning.

use crate::dataset::{DatasetMeta, SurvivalDataset};
use crate::models::{ModelError, ModelSpec};
use crate::ode::{OdeError, TimeGrid, Trajectory, DEFAULT_DT};
use crate::rng::{CounterRng, CENSOR_STREAM, EVENT_STREAM};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("invalid sampling configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cumulative hazard reached only {reached} by t = {horizon}, target {target}")]
    HorizonExhausted {
        reached: f64,
        target: f64,
        horizon: f64,
    },
    #[error(
        "model {0} has an improper event-time law (S(inf) > 0, the exponential boundary case); \
         uncensored simulation needs an administrative horizon"
    )]
    ImproperWithoutHorizon(String),
    #[error("censoring target unattainable: {0}")]
    UnattainableTarget(String),
}

impl From<OdeError> for SamplingError {
    fn from(e: OdeError) -> Self {
        Self::Model(ModelError::Ode(e))
    }
}

/// Horizon management and root tolerance for [`simulate_event_time`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub initial_horizon: f64,
    pub growth: f64,
    pub max_horizon: f64,
    pub tolerance: f64,
    pub dt: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            initial_horizon: 50.0,
            growth: 2.0,
            max_horizon: 6400.0,
            tolerance: 1e-8,
            dt: DEFAULT_DT,
        }
    }
}

impl InversionConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        let ok = self.tolerance > 0.0
            && self.growth > 1.0
            && self.dt > 0.0
            && self.initial_horizon >= self.dt
            && self.max_horizon >= self.initial_horizon
            && self.max_horizon.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SamplingError::Config(format!("{self:?}")))
        }
    }
}

/// A cumulative-hazard grid that grows on demand and inverts `H(t) = y`.
///
/// Integration normally uses RK4. For the improper boundary case the
/// decaying solution sits on the stable manifold of a saddle, where forward
/// integration amplifies round-off along the growing mode; there the grid is
/// filled from the closed-form hazard instead.
#[derive(Debug, Clone)]
pub struct CumHazardInverter {
    model: ModelSpec,
    cfg: InversionConfig,
    traj: Trajectory,
    limit: Option<f64>,
}

impl CumHazardInverter {
    pub fn new(model: ModelSpec, cfg: InversionConfig) -> Result<Self, SamplingError> {
        cfg.validate()?;
        model.validate()?;
        let limit = model.cum_hazard_limit();
        let traj = Self::build(&model, limit.is_some(), cfg.initial_horizon, cfg.dt)?;
        Ok(Self {
            model,
            cfg,
            traj,
            limit,
        })
    }

    fn build(
        model: &ModelSpec,
        sampled: bool,
        t_end: f64,
        dt: f64,
    ) -> Result<Trajectory, SamplingError> {
        if sampled {
            let grid = TimeGrid::from_zero(t_end, dt)?;
            let h: Vec<f64> = (0..grid.len())
                .map(|i| model.hazard_closed(grid.time(i)).unwrap_or(f64::NAN))
                .collect();
            let v = vec![0.0; h.len()];
            Ok(Trajectory::from_samples(grid, h, v)?)
        } else {
            Ok(model.trajectory(t_end, dt)?)
        }
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn horizon(&self) -> f64 {
        self.traj.grid().last_time()
    }

    fn reached(&self) -> f64 {
        *self
            .traj
            .cum_hazard()
            .last()
            .expect("trajectory is never empty")
    }

    /// Grows the grid geometrically until `H(horizon) >= y` or the maximum
    /// horizon is reached. Returns whether the target is now covered.
    pub fn ensure(&mut self, y: f64) -> Result<bool, SamplingError> {
        if let Some(limit) = self.limit {
            if y >= limit {
                return Ok(false);
            }
        }
        while self.reached() < y {
            let current = self.horizon();
            if current >= self.cfg.max_horizon {
                return Ok(false);
            }
            let next = (current * self.cfg.growth).min(self.cfg.max_horizon);
            if self.limit.is_some() {
                self.traj = Self::build(&self.model, true, next, self.cfg.dt)?;
            } else {
                let extra = ((next - current) / self.cfg.dt).round().max(1.0) as usize;
                self.traj.extend(&self.model, extra)?;
            }
        }
        Ok(true)
    }

    /// Inverts the grid for a target already covered by [`ensure`](Self::ensure).
    ///
    /// Returns `+inf` for bounded-`H` models whose bound is below `y`.
    pub fn invert(&self, y: f64) -> Result<f64, SamplingError> {
        if !(y >= 0.0) {
            return Err(SamplingError::Config(format!(
                "target {y} must be non-negative"
            )));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let cum = self.traj.cum_hazard();
        if self.reached() < y {
            if self.limit.is_some() {
                return Ok(f64::INFINITY);
            }
            return Err(SamplingError::HorizonExhausted {
                reached: self.reached(),
                target: y,
                horizon: self.horizon(),
            });
        }
        let hi = cum.partition_point(|&c| c < y);
        let grid = self.traj.grid();
        if let Some(t_neg) = self.traj.negative_hazard_at() {
            if t_neg <= grid.time(hi) {
                return Err(ModelError::NotPositive(format!(
                    "{} has h < 0 at t = {t_neg}",
                    self.model
                ))
                .into());
            }
        }
        let lo = hi.saturating_sub(1);
        let (t_lo, t_hi) = (grid.time(lo), grid.time(hi));
        let (c_lo, c_hi) = (cum[lo], cum[hi]);
        if c_hi <= c_lo {
            return Ok(t_hi);
        }
        let at = |t: f64| c_lo + (c_hi - c_lo) * (t - t_lo) / (t_hi - t_lo);
        let (mut a, mut b) = (t_lo, t_hi);
        while b - a > self.cfg.tolerance {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if at(mid) < y {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// [`ensure`](Self::ensure) followed by [`invert`](Self::invert).
    pub fn solve(&mut self, y: f64) -> Result<f64, SamplingError> {
        self.ensure(y)?;
        self.invert(y)
    }
}

/// `-ln(1 - u)`, the cumulative-hazard target for a uniform draw.
pub fn inversion_target(u: f64) -> f64 {
    -(-u).ln_1p()
}

/// One event time `t*` with `H(t*) = -ln(1 - u)`; `+inf` when the target
/// exceeds the finite limit of `H`.
pub fn simulate_event_time(
    model: &ModelSpec,
    u: f64,
    cfg: &InversionConfig,
) -> Result<f64, SamplingError> {
    if !(0.0..1.0).contains(&u) {
        return Err(SamplingError::Config(format!("u = {u} outside [0, 1)")));
    }
    let y = inversion_target(u);
    if y == 0.0 {
        return Ok(0.0);
    }
    CumHazardInverter::new(*model, *cfg)?.solve(y)
}

/// Censoring mechanism applied after event-time generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Censoring {
    None,
    /// `C ~ Uniform(0, c_max)`, independent of `T`.
    Uniform {
        c_max: f64,
    },
    /// Fixed end of follow-up.
    Administrative {
        horizon: f64,
    },
}

/// Latent event times for draws `0..n` of `seed` (stream [`EVENT_STREAM`]).
pub fn simulate_event_times(
    model: &ModelSpec,
    n: usize,
    seed: u64,
    cfg: &InversionConfig,
) -> Result<Vec<f64>, SamplingError> {
    let rng = CounterRng::new(seed);
    let targets: Vec<f64> = (0..n as u64)
        .map(|i| inversion_target(rng.uniform(EVENT_STREAM, i)))
        .collect();
    let mut inverter = CumHazardInverter::new(*model, *cfg)?;
    let y_max = targets.iter().copied().fold(0.0, f64::max);
    inverter.ensure(y_max)?;
    let inverter = &inverter;
    targets.par_iter().map(|&y| inverter.invert(y)).collect()
}

/// Simulates `n` right-censored observations `(min(T, C), 1{T <= C})`.
///
/// Event and censoring uniforms come from disjoint counter streams, so each
/// `(T_i, C_i)` pair depends only on `(seed, i)`.
pub fn simulate_dataset(
    model: &ModelSpec,
    n: usize,
    censor: Censoring,
    seed: u64,
    cfg: &InversionConfig,
) -> Result<SurvivalDataset, SamplingError> {
    if n == 0 {
        return Err(SamplingError::Config("n must be at least 1".into()));
    }
    match censor {
        Censoring::None if model.is_improper() => {
            return Err(SamplingError::ImproperWithoutHorizon(model.to_string()))
        }
        Censoring::Uniform { c_max } if !(c_max > 0.0 && c_max.is_finite()) => {
            return Err(SamplingError::Config(format!(
                "c_max = {c_max} must be positive"
            )))
        }
        Censoring::Administrative { horizon } if !(horizon > 0.0 && horizon.is_finite()) => {
            return Err(SamplingError::Config(format!(
                "horizon = {horizon} must be positive"
            )))
        }
        _ => {}
    }
    let events = simulate_event_times(model, n, seed, cfg)?;
    let rng = CounterRng::new(seed);
    let (times, deltas): (Vec<f64>, Vec<bool>) = events
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let c = match censor {
                Censoring::None => f64::INFINITY,
                Censoring::Uniform { c_max } => c_max * rng.uniform(CENSOR_STREAM, i as u64),
                Censoring::Administrative { horizon } => horizon,
            };
            if t <= c {
                (t, true)
            } else {
                (c, false)
            }
        })
        .unzip();
    let meta = DatasetMeta {
        model: Some(model.to_string()),
        seed: Some(seed),
        c_max: match censor {
            Censoring::Uniform { c_max } => Some(c_max),
            _ => None,
        },
        time_unit: None,
        dropped_rows: 0,
    };
    Ok(SurvivalDataset::new(times, deltas)
        .map_err(|e| SamplingError::Config(e.to_string()))?
        .with_meta(meta))
}

/// Acceptable distance between achieved and target censoring rate.
pub const CENSOR_RATE_TOLERANCE: f64 = 0.02;

/// Finds `c_max` such that `Uniform(0, c_max)` censoring yields
/// `target_rate` on a fixed pilot sample.
///
/// The pilot rate is monotone non-increasing in `c_max` for fixed draws, so
/// plain bisection applies.
pub fn tune_cmax(
    model: &ModelSpec,
    target_rate: f64,
    n_pilot: usize,
    seed: u64,
    cfg: &InversionConfig,
) -> Result<f64, SamplingError> {
    if !(target_rate > 0.0 && target_rate < 1.0) {
        return Err(SamplingError::Config(format!(
            "target rate {target_rate} outside (0, 1)"
        )));
    }
    if n_pilot == 0 {
        return Err(SamplingError::Config("pilot size must be positive".into()));
    }
    let events = simulate_event_times(model, n_pilot, seed, cfg)?;
    let rng = CounterRng::new(seed);
    let unif: Vec<f64> = (0..n_pilot as u64)
        .map(|i| rng.uniform(CENSOR_STREAM, i))
        .collect();
    let rate = |c_max: f64| {
        let censored = events
            .iter()
            .zip(&unif)
            .filter(|(&t, &u)| c_max * u < t)
            .count();
        censored as f64 / n_pilot as f64
    };

    let finite: Vec<f64> = events.iter().copied().filter(|t| t.is_finite()).collect();
    let scale = if finite.is_empty() {
        1.0
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    let mut lo = 0.0;
    let mut hi = scale.max(f64::MIN_POSITIVE);
    while rate(hi) > target_rate {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 * scale.max(1.0) {
            return Err(SamplingError::UnattainableTarget(format!(
                "rate stays at {} > {target_rate} for c_max up to {hi:e}",
                rate(hi)
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rate(mid) > target_rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // `hi` is the smallest c_max found with rate <= target; `lo` just above it
    let best = if (rate(lo) - target_rate).abs() < (rate(hi) - target_rate).abs() && lo > 0.0 {
        lo
    } else {
        hi
    };
    let achieved = rate(best);
    if (achieved - target_rate).abs() > CENSOR_RATE_TOLERANCE {
        return Err(SamplingError::UnattainableTarget(format!(
            "pilot rate {achieved} cannot reach {target_rate} within {CENSOR_RATE_TOLERANCE}"
        )));
    }
    Ok(best)
}

/// Two-sided Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    })
}

/// Asymptotic p-value `P(sqrt(n) D > sqrt(n) d)` from the Kolmogorov series.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DampedOscParams, ExpInteractionParams, SinusoidalParams};
    use approx::assert_abs_diff_eq;

    fn constant(c: f64) -> ModelSpec {
        ModelSpec::Sinusoidal(SinusoidalParams::constant(c).unwrap())
    }

    fn underdamped() -> ModelSpec {
        ModelSpec::Damped(DampedOscParams::new(0.5, 1.0, 0.2, 0.1, 0.3).unwrap())
    }

    #[test]
    fn zero_draw_maps_to_time_zero() {
        let cfg = InversionConfig::default();
        assert_eq!(simulate_event_time(&underdamped(), 0.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn exponential_median() {
        let cfg = InversionConfig::default();
        let t = simulate_event_time(&constant(0.6), 0.5, &cfg).unwrap();
        assert_abs_diff_eq!(t, std::f64::consts::LN_2 / 0.6, epsilon = 1e-7);
    }

    #[test]
    fn improper_boundary_returns_infinity() {
        let b = ModelSpec::ExpInteraction(ExpInteractionParams::boundary(0.1, -0.1).unwrap());
        let cfg = InversionConfig::default();
        assert_eq!(simulate_event_time(&b, 0.8, &cfg).unwrap(), f64::INFINITY);
        let t = simulate_event_time(&b, 0.5, &cfg).unwrap();
        assert!(t.is_finite());
        assert_abs_diff_eq!(
            b.cum_hazard_closed(t).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-6
        );
    }

    #[test]
    fn horizon_extends_past_initial_window() {
        let cfg = InversionConfig {
            initial_horizon: 1.0,
            ..InversionConfig::default()
        };
        // H(t) = 0.01 t, so y = 1 needs t = 100
        let t = simulate_event_time(&constant(0.01), 1.0 - (-1f64).exp(), &cfg).unwrap();
        assert_abs_diff_eq!(t, 100.0, epsilon = 1e-6);
    }

    #[test]
    fn horizon_exhaustion_is_reported() {
        let cfg = InversionConfig {
            initial_horizon: 1.0,
            max_horizon: 4.0,
            ..InversionConfig::default()
        };
        let err = simulate_event_time(&constant(0.01), 0.9, &cfg).unwrap_err();
        assert!(matches!(err, SamplingError::HorizonExhausted { .. }));
    }

    #[test]
    fn uncensored_improper_needs_horizon() {
        let b = ModelSpec::ExpInteraction(ExpInteractionParams::boundary(0.1, -0.1).unwrap());
        let cfg = InversionConfig::default();
        assert!(matches!(
            simulate_dataset(&b, 10, Censoring::None, 1, &cfg),
            Err(SamplingError::ImproperWithoutHorizon(_))
        ));
        let d = simulate_dataset(
            &b,
            200,
            Censoring::Administrative { horizon: 40.0 },
            1,
            &cfg,
        )
        .unwrap();
        assert!(d.times().iter().all(|&t| t <= 40.0));
        assert!(d.censoring_rate() > 0.2);
    }

    #[test]
    fn uncensored_dataset_has_all_events_and_is_deterministic() {
        let cfg = InversionConfig::default();
        let a = simulate_dataset(&underdamped(), 300, Censoring::None, 9, &cfg).unwrap();
        assert_eq!(a.event_count(), 300);
        let b = simulate_dataset(&underdamped(), 300, Censoring::None, 9, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_censoring_matches_analytic_rate() {
        // constant hazard c, C ~ U(0, m): P(C < T) = E[e^{-cC}] = (1 - e^{-cm}) / (cm)
        let (c, m): (f64, f64) = (0.6, 3.0);
        let expected = (1.0 - (-c * m).exp()) / (c * m);
        let cfg = InversionConfig::default();
        let d = simulate_dataset(
            &constant(c),
            20_000,
            Censoring::Uniform { c_max: m },
            3,
            &cfg,
        )
        .unwrap();
        assert!((d.censoring_rate() - expected).abs() < 0.01);
    }

    #[test]
    fn tuned_cmax_hits_analytic_target() {
        let c: f64 = 0.6;
        let cfg = InversionConfig::default();
        let m = tune_cmax(&constant(c), 0.25, 10_000, 11, &cfg).unwrap();
        let analytic = (1.0 - (-c * m).exp()) / (c * m);
        assert!(
            (analytic - 0.25).abs() <= CENSOR_RATE_TOLERANCE,
            "rate {analytic} at c_max {m}"
        );
    }

    #[test]
    fn ks_statistic_examples() {
        assert_abs_diff_eq!(ks_statistic(&[0.5], |x| x), 0.5);
        let grid: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert_abs_diff_eq!(ks_statistic(&grid, |x| x), 0.005, epsilon = 1e-12);
        assert!(ks_p_value(0.005, 100) > 0.99);
        assert!(ks_p_value(0.5, 100) < 1e-10);
    }
}
