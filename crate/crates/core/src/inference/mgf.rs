//! Moment generating function `M(s) = E[e^{sT}]` with existence-domain
//! checks and a certified quadrature horizon.

use super::InferenceError;
use crate::models::ModelSpec;
use crate::ode::{TimeGrid, Trajectory, DEFAULT_DT};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfConfig {
    /// Bound on the neglected tail mass `int_T^inf e^{st} f(t) dt`.
    pub tail_tolerance: f64,
    pub dt: f64,
    pub max_horizon: f64,
}

impl Default for MgfConfig {
    fn default() -> Self {
        Self {
            tail_tolerance: 1e-8,
            dt: DEFAULT_DT,
            max_horizon: 1e5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfResult {
    pub s: f64,
    /// `None` when divergent.
    pub value: Option<f64>,
    pub divergent: bool,
    pub domain_bound: f64,
    /// Upper quadrature limit actually used.
    pub horizon: Option<f64>,
}

impl MgfResult {
    /// One `s,value,divergent` row.
    pub fn row(&self) -> String {
        match self.value {
            Some(v) => format!("{},{},0", self.s, v),
            None => format!("{},inf,1", self.s),
        }
    }
}

/// Composite Simpson on a uniform grid; an odd interval count closes with
/// the 3/8 rule on the last three intervals.
pub fn simpson(values: &[f64], dt: f64) -> f64 {
    let m = values.len().saturating_sub(1);
    match m {
        0 => 0.0,
        1 => 0.5 * dt * (values[0] + values[1]),
        2 => dt / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let even_end = if m.is_multiple_of(2) { m } else { m - 3 };
            let mut acc = 0.0;
            for k in (0..even_end).step_by(2) {
                acc += values[k] + 4.0 * values[k + 1] + values[k + 2];
            }
            let mut total = dt / 3.0 * acc;
            if even_end != m {
                let v = &values[even_end..];
                total += 3.0 * dt / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            total
        }
    }
}

/// A linear floor `H(t) >= rate t - offset` valid for all `t >= 0`.
#[derive(Debug, Clone, Copy)]
struct Floor {
    rate: f64,
    offset: f64,
}

impl Floor {
    /// Smallest `T` with `e^{offset - (rate - s) T} max(1, rate/(rate - s)) <= tol`.
    ///
    /// Integration by parts gives
    /// `int_T^inf e^{st} f = e^{sT} S(T) + s int_T^inf e^{st} S`, and each
    /// term is bounded through `S(t) <= e^{offset - rate t}`.
    fn horizon(&self, s: f64, tol: f64) -> f64 {
        let gap = self.rate - s;
        let factor = (self.rate / gap).max(1.0);
        ((self.offset + factor.ln() - tol.ln()) / gap).max(0.0)
    }
}

fn numeric_floor(
    model: &ModelSpec,
    rate: f64,
    settled: impl Fn(&Trajectory) -> bool,
    cfg: &MgfConfig,
) -> Result<(Floor, Trajectory), InferenceError> {
    let mut t_end = 50.0;
    loop {
        let traj = model.trajectory(t_end, cfg.dt)?;
        if let Some(t) = traj.negative_hazard_at() {
            return Err(InferenceError::Model(
                crate::models::ModelError::NotPositive(format!("{model} has h < 0 at t = {t}")),
            ));
        }
        if settled(&traj) {
            let offset = traj
                .times()
                .zip(traj.cum_hazard())
                .map(|(t, &c)| rate * t - c)
                .fold(0.0, f64::max);
            return Ok((Floor { rate, offset }, traj));
        }
        t_end *= 2.0;
        if t_end > cfg.max_horizon {
            return Err(InferenceError::TailBound(format!(
                "{model}: hazard did not settle above {rate} within t = {}",
                cfg.max_horizon
            )));
        }
    }
}

/// `M(s)`, flagged divergent without quadrature when `s` is at or beyond
/// the family's domain bound.
pub fn mgf(model: &ModelSpec, s: f64, cfg: &MgfConfig) -> Result<MgfResult, InferenceError> {
    model.validate()?;
    if !s.is_finite() {
        return Err(InferenceError::Data(format!("s = {s} must be finite")));
    }
    let bound = model.mgf_domain_bound();
    let mut result = MgfResult {
        s,
        value: None,
        divergent: true,
        domain_bound: bound,
        horizon: None,
    };
    if s >= bound {
        return Ok(result);
    }

    let mut cached: Option<Trajectory> = None;
    let floor = match model {
        ModelSpec::Damped(p) => Floor {
            rate: p.equilibrium(),
            offset: p.transient_l1_bound(),
        },
        ModelSpec::Sinusoidal(p) => Floor {
            rate: p.c,
            offset: p.cum_hazard_deficit(),
        },
        ModelSpec::ExpInteraction(_) if model.is_improper() => Floor {
            rate: 0.0,
            offset: 0.0,
        },
        ModelSpec::PopDyn(p) => {
            // beyond the integrated window the hazard is assumed to stay near
            // the asymptotically stable equilibrium K
            let k = p.k;
            let rate = if s > 0.0 { 0.5 * (s + k) } else { 0.5 * k };
            let margin = 0.5 * (k - rate);
            let (floor, traj) = numeric_floor(
                model,
                rate,
                |tr| {
                    let tail = &tr.hazard()[tr.len() * 3 / 4..];
                    tail.iter().all(|&h| (h - k).abs() < margin)
                },
                cfg,
            )?;
            cached = Some(traj);
            floor
        }
        ModelSpec::ExpInteraction(_) => {
            let rate = s.max(0.0) + 1.0;
            let (floor, traj) = numeric_floor(
                model,
                rate,
                |tr| {
                    let end = tr.last_state();
                    end.h > rate && end.v > 0.0
                },
                cfg,
            )?;
            cached = Some(traj);
            floor
        }
    };
    let horizon = floor.horizon(s, cfg.tail_tolerance).max(10.0 * cfg.dt);
    if horizon > cfg.max_horizon {
        return Err(InferenceError::TailBound(format!(
            "{model}: tail below {} needs T = {horizon}",
            cfg.tail_tolerance
        )));
    }

    let integrand: Vec<f64> = if model.has_closed_form() {
        let grid = TimeGrid::from_zero(horizon, cfg.dt)?;
        (0..grid.len())
            .map(|i| {
                let t = grid.time(i);
                let (h, cum) = model.closed_pair(t).expect("closed form");
                (s * t - cum).exp() * h
            })
            .collect()
    } else {
        let traj = match cached {
            Some(tr) if tr.grid().last_time() >= horizon => tr,
            _ => model.trajectory(horizon, cfg.dt)?,
        };
        let n = ((horizon / cfg.dt).round() as usize + 1).min(traj.len());
        traj.times()
            .zip(traj.hazard())
            .zip(traj.cum_hazard())
            .take(n)
            .map(|((t, &h), &cum)| (s * t - cum).exp() * h)
            .collect()
    };
    result.value = Some(simpson(&integrand, cfg.dt));
    result.divergent = false;
    result.horizon = Some(horizon);
    Ok(result)
}

/// `s,value,divergent` rows, header included.
pub fn mgf_sweep(
    model: &ModelSpec,
    grid: &[f64],
    cfg: &MgfConfig,
) -> Result<String, InferenceError> {
    let mut out = String::from("s,value,divergent\n");
    for &s in grid {
        let _ = writeln!(out, "{}", mgf(model, s, cfg)?.row());
    }
    Ok(out)
}
