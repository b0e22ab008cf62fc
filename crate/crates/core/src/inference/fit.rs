//! Maximum-likelihood fitting by multi-start simplex search in unconstrained
//! coordinates.

use super::family::{ModelFamily, Transform};
use super::optim::{nelder_mead, Minimum, NelderMeadConfig};
use super::InferenceError;
use crate::dataset::SurvivalDataset;
use crate::rng::CounterRng;
use rayon::prelude::*;
use std::fmt::Write as _;

/// `k log(n) - 2 l`.
pub fn bic(loglik: f64, k: usize, n: f64) -> f64 {
    k as f64 * n.ln() - 2.0 * loglik
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Jittered starts in addition to the supplied initial point.
    pub restarts: usize,
    /// Standard deviation of the jitter in unconstrained coordinates.
    pub jitter: f64,
    pub seed: u64,
    pub simplex: NelderMeadConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            jitter: 0.1,
            seed: 0x5eed,
            simplex: NelderMeadConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub family: ModelFamily,
    pub params: Vec<f64>,
    pub loglik: f64,
    pub bic: f64,
    pub n_obs: usize,
    /// Objective evaluations across all starts.
    pub n_evals: usize,
    pub converged: bool,
    /// Index of the start that produced the optimum (0 = supplied init).
    pub best_start: usize,
    pub starts_converged: usize,
}

impl FitResult {
    pub fn k(&self) -> usize {
        self.family.dim()
    }

    pub fn transforms(&self) -> &'static [Transform] {
        self.family.transforms()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.family
            .param_names()
            .iter()
            .position(|&n| n == name)
            .map(|i| self.params[i])
    }

    /// `key = value` report.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "family = {}", self.family);
        for ((name, value), t) in self
            .family
            .param_names()
            .iter()
            .zip(&self.params)
            .zip(self.transforms())
        {
            let _ = writeln!(out, "{name} = {value}");
            let _ = writeln!(out, "{name}.transform = {}", t.name());
        }
        let _ = writeln!(out, "loglik = {}", self.loglik);
        let _ = writeln!(out, "k = {}", self.k());
        let _ = writeln!(out, "n = {}", self.n_obs);
        let _ = writeln!(out, "bic = {}", self.bic);
        let _ = writeln!(out, "n_evals = {}", self.n_evals);
        let _ = writeln!(out, "converged = {}", self.converged);
        let _ = writeln!(out, "best_start = {}", self.best_start);
        let _ = writeln!(out, "starts_converged = {}", self.starts_converged);
        out
    }
}

fn gaussian(rng: &CounterRng, stream: u64, index: u64) -> f64 {
    // Box–Muller on two counter draws
    let u1 = 1.0 - rng.uniform(stream, 2 * index);
    let u2 = rng.uniform(stream, 2 * index + 1);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One simplex run followed by a restart from its optimum, which guards
/// against premature collapse of the simplex.
fn polish<F: Fn(&[f64]) -> f64>(objective: &F, x0: &[f64], cfg: &NelderMeadConfig) -> Minimum {
    let first = nelder_mead(objective, x0, cfg);
    let second = nelder_mead(objective, &first.x, cfg);
    let evals = first.evals + second.evals;
    let best = if second.f <= first.f { second } else { first };
    Minimum { evals, ..best }
}

/// Censored MLE of `family` on `data` from `init` (constrained scale).
pub fn mle_fit(
    family: ModelFamily,
    data: &SurvivalDataset,
    init: &[f64],
    cfg: &FitConfig,
) -> Result<FitResult, InferenceError> {
    if data.is_empty() {
        return Err(InferenceError::Data("empty dataset".into()));
    }
    if data.event_count() == 0 {
        return Err(InferenceError::NonConvergence(
            "no events: the likelihood has no interior maximum".into(),
        ));
    }
    if init.len() != family.dim() {
        return Err(InferenceError::InvalidInit(format!(
            "{family} needs {} values, got {}",
            family.dim(),
            init.len()
        )));
    }
    let objective = |y: &[f64]| -family.log_likelihood(&family.from_unconstrained(y), data);
    let y0 = family.to_unconstrained(init);
    if !objective(&y0).is_finite() {
        return Err(InferenceError::InvalidInit(format!(
            "log-likelihood at {init:?} is not finite for {family}"
        )));
    }

    let rng = CounterRng::new(cfg.seed);
    let mut starts = vec![y0.clone()];
    let mut draw = 0u64;
    while starts.len() < cfg.restarts + 1 && draw < 100 * (cfg.restarts as u64 + 1) {
        let candidate: Vec<f64> = y0
            .iter()
            .enumerate()
            .map(|(j, &y)| y + cfg.jitter * gaussian(&rng, j as u64, draw))
            .collect();
        draw += 1;
        if objective(&candidate).is_finite() {
            starts.push(candidate);
        }
    }

    let runs: Vec<Minimum> = starts
        .par_iter()
        .map(|s| polish(&objective, s, &cfg.simplex))
        .collect();
    let n_evals = runs.iter().map(|r| r.evals).sum();
    let starts_converged = runs
        .iter()
        .filter(|r| r.converged && r.f.is_finite())
        .count();
    // lowest objective; ties go to the earliest start
    let (best_start, best) = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, &Minimum)>, |acc, (i, r)| match acc {
            Some((_, b)) if b.f <= r.f => acc,
            _ => Some((i, r)),
        })
        .expect("at least one start");
    if !best.f.is_finite() {
        return Err(InferenceError::NonConvergence(format!(
            "all {} starts diverged for {family}",
            runs.len()
        )));
    }
    let loglik = -best.f;
    Ok(FitResult {
        family,
        params: family.from_unconstrained(&best.x),
        loglik,
        bic: bic(loglik, family.dim(), data.len() as f64),
        n_obs: data.len(),
        n_evals,
        converged: best.converged,
        best_start,
        starts_converged,
    })
}

/// Weibull fit started from the exponential MLE (`kappa = 1`).
pub fn fit_weibull(data: &SurvivalDataset, cfg: &FitConfig) -> Result<FitResult, InferenceError> {
    let d = data.event_count();
    if d == 0 {
        return Err(InferenceError::NonConvergence("no events".into()));
    }
    let rate = d as f64 / data.total_time();
    mle_fit(ModelFamily::Weibull, data, &[rate, 1.0], cfg)
}

/// Log-normal fit started from the moments of `log t` over all rows.
pub fn fit_lognormal(data: &SurvivalDataset, cfg: &FitConfig) -> Result<FitResult, InferenceError> {
    if data.event_count() == 0 {
        return Err(InferenceError::NonConvergence("no events".into()));
    }
    if data.times().iter().any(|&t| t <= 0.0) {
        return Err(InferenceError::Data(
            "log-normal needs positive times".into(),
        ));
    }
    let logs: Vec<f64> = data.times().iter().map(|t| t.ln()).collect();
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let sd = (logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / n).sqrt();
    mle_fit(ModelFamily::LogNormal, data, &[mu, sd.max(1e-3)], cfg)
}
