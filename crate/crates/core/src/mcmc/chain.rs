//! Component-wise random-walk Metropolis in unconstrained coordinates with
//! Robbins–Monro scale adaptation during burn-in.

use super::prior::{log_posterior, PriorSpec};
use super::McmcError;
use crate::dataset::SurvivalDataset;
use crate::inference::ModelFamily;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Starting proposal SD in unconstrained coordinates.
    pub initial_scale: f64,
    pub target_acceptance: f64,
    /// Burn-in iterations per stall check; a window with no accepted move
    /// in any coordinate aborts the chain.
    pub adaptation_window: usize,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 60_000,
            burn_in: 10_000,
            thin: 5,
            initial_scale: 0.1,
            target_acceptance: 0.3,
            adaptation_window: 500,
            seed: 1,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), McmcError> {
        if self.burn_in >= self.iterations {
            return Err(McmcError::Config(format!(
                "burn-in {} must be below iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 || self.adaptation_window == 0 {
            return Err(McmcError::Config(
                "thin and adaptation window must be >= 1".into(),
            ));
        }
        if !(self.initial_scale > 0.0)
            || !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0)
        {
            return Err(McmcError::Config(format!("{self:?}")));
        }
        Ok(())
    }

    /// `(iterations - burn_in) / thin`.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorChain {
    pub family: ModelFamily,
    /// Retained draws, one row per kept iteration (constrained scale).
    pub draws: Vec<Vec<f64>>,
    /// Post-burn-in acceptance fraction over all component updates.
    pub acceptance_rate: f64,
    /// Frozen proposal scales used after burn-in.
    pub scales: Vec<f64>,
    pub init: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary {
    pub name: &'static str,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl PosteriorChain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|row| row[j]).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.family.dim())
            .map(|j| self.draws.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect()
    }

    /// Concatenates draws; the acceptance rate is length-weighted.
    pub fn merge(&self, other: &PosteriorChain) -> Result<PosteriorChain, McmcError> {
        if self.family != other.family {
            return Err(McmcError::Config(
                "cannot merge chains of different families".into(),
            ));
        }
        let (a, b) = (self.len() as f64, other.len() as f64);
        let mut draws = self.draws.clone();
        draws.extend(other.draws.iter().cloned());
        Ok(PosteriorChain {
            family: self.family,
            draws,
            acceptance_rate: (a * self.acceptance_rate + b * other.acceptance_rate) / (a + b),
            scales: self.scales.clone(),
            init: self.init.clone(),
        })
    }

    /// Split-chain check: difference of first- and second-half means in
    /// units of the pooled posterior SD, per parameter.
    pub fn split_mean_gap(&self) -> Vec<f64> {
        let half = self.len() / 2;
        let first = PosteriorChain {
            draws: self.draws[..half].to_vec(),
            ..self.clone()
        };
        let second = PosteriorChain {
            draws: self.draws[half..].to_vec(),
            ..self.clone()
        };
        let summaries = posterior_summary(self);
        first
            .means()
            .iter()
            .zip(second.means())
            .zip(summaries)
            .map(|((a, b), s)| {
                if s.sd > 0.0 {
                    (a - b).abs() / s.sd
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Mean, SD and 2.5/50/97.5% quantiles per parameter.
pub fn posterior_summary(chain: &PosteriorChain) -> Vec<ParamSummary> {
    let n = chain.len() as f64;
    chain
        .family
        .param_names()
        .iter()
        .enumerate()
        .map(|(j, &name)| {
            let mut col = chain.column(j);
            // Welford: exact for constant columns
            let (mut mean, mut m2) = (0.0, 0.0);
            for (k, &x) in col.iter().enumerate() {
                let d = x - mean;
                mean += d / (k + 1) as f64;
                m2 += d * (x - mean);
            }
            let var = if col.len() > 1 { m2 / (n - 1.0) } else { 0.0 };
            col.sort_by(f64::total_cmp);
            ParamSummary {
                name,
                mean,
                sd: var.sqrt(),
                q025: quantile_sorted(&col, 0.025),
                q50: quantile_sorted(&col, 0.5),
                q975: quantile_sorted(&col, 0.975),
            }
        })
        .collect()
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Output of [`adaptive_metropolis`], in the sampler's own coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RawChain {
    pub draws: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    pub scales: Vec<f64>,
}

/// Component-wise random-walk Metropolis on an arbitrary log-density.
///
/// During burn-in each coordinate's log proposal scale follows
/// `+= k^{-0.6} (a_k - target)` with `a_k` the Metropolis acceptance
/// probability; afterwards scales are frozen, so the retained part is a
/// fixed reversible kernel.
pub fn adaptive_metropolis<F: Fn(&[f64]) -> f64>(
    log_target: F,
    start: &[f64],
    cfg: &ChainConfig,
) -> Result<RawChain, McmcError> {
    cfg.validate()?;
    let dim = start.len();
    let mut y = start.to_vec();
    let mut current = log_target(&y);
    if !current.is_finite() {
        return Err(McmcError::InvalidStart(format!(
            "log-density at {start:?} is not finite"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut log_scale = vec![cfg.initial_scale.ln(); dim];
    let mut draws = Vec::with_capacity(cfg.retained());
    let mut accepted_post = 0usize;
    let mut window_accepts = 0usize;
    let mut proposal = y.clone();

    for iter in 0..cfg.iterations {
        let burning = iter < cfg.burn_in;
        for j in 0..dim {
            let step = log_scale[j].exp() * std_normal(&mut rng);
            proposal[j] = y[j] + step;
            let cand = log_target(&proposal);
            let log_ratio = cand - current;
            let u: f64 = rng.gen();
            let accept = log_ratio >= 0.0 || u.ln() < log_ratio;
            if accept {
                y[j] = proposal[j];
                current = cand;
                if burning {
                    window_accepts += 1;
                } else {
                    accepted_post += 1;
                }
            } else {
                proposal[j] = y[j];
            }
            if burning {
                let prob = if log_ratio.is_nan() {
                    0.0
                } else {
                    log_ratio.min(0.0).exp()
                };
                let gain = ((iter + 1) as f64).powf(-0.6);
                log_scale[j] += gain * (prob - cfg.target_acceptance);
            }
        }
        if burning && (iter + 1) % cfg.adaptation_window == 0 {
            if window_accepts == 0 {
                return Err(McmcError::Stuck {
                    iteration: iter + 1,
                    window: cfg.adaptation_window,
                });
            }
            window_accepts = 0;
        }
        if !burning && (iter + 1 - cfg.burn_in).is_multiple_of(cfg.thin) {
            draws.push(y.clone());
        }
    }

    let updates = (cfg.iterations - cfg.burn_in) * dim;
    Ok(RawChain {
        draws,
        acceptance_rate: accepted_post as f64 / updates as f64,
        scales: log_scale.iter().map(|s| s.exp()).collect(),
    })
}

/// Runs one posterior chain from `init` (constrained scale).
///
/// The sampler works in unconstrained coordinates `y` with target
/// `log p(x(y) | data) + sum log |dx/dy|`.
pub fn run_chain(
    family: ModelFamily,
    data: &SurvivalDataset,
    prior: &PriorSpec,
    init: &[f64],
    cfg: &ChainConfig,
) -> Result<PosteriorChain, McmcError> {
    let dim = family.dim();
    if init.len() != dim || prior.priors.len() != dim {
        return Err(McmcError::Config(format!(
            "{family} has {dim} parameters; got init {} and prior {}",
            init.len(),
            prior.priors.len()
        )));
    }
    let transforms = family.transforms();
    let target = |y: &[f64]| -> f64 {
        let x = family.from_unconstrained(y);
        let lp = log_posterior(family, &x, data, prior);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        lp + y
            .iter()
            .zip(transforms)
            .map(|(&yj, t)| t.log_jacobian(yj))
            .sum::<f64>()
    };
    let raw = adaptive_metropolis(target, &family.to_unconstrained(init), cfg)?;
    Ok(PosteriorChain {
        family,
        draws: raw
            .draws
            .iter()
            .map(|y| family.from_unconstrained(y))
            .collect(),
        acceptance_rate: raw.acceptance_rate,
        scales: raw.scales,
        init: init.to_vec(),
    })
}

/// Monte Carlo standard error of the mean by non-overlapping batch means
/// (`sqrt(n)` batches).
pub fn batch_means_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    let b = (n as f64).sqrt().floor() as usize;
    if b < 2 {
        return f64::NAN;
    }
    let size = n / b;
    let means: Vec<f64> = (0..b)
        .map(|k| xs[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_cfg(seed: u64) -> ChainConfig {
        ChainConfig {
            iterations: 6_000,
            burn_in: 1_000,
            thin: 1,
            seed,
            ..ChainConfig::default()
        }
    }

    #[test]
    fn retained_count_and_determinism() {
        let data =
            SurvivalDataset::new(vec![0.5, 1.2, 2.0, 0.3], vec![true, false, true, true]).unwrap();
        let prior = PriorSpec::default_for(ModelFamily::Constant);
        let cfg = small_cfg(3);
        let a = run_chain(ModelFamily::Constant, &data, &prior, &[0.5], &cfg).unwrap();
        let b = run_chain(ModelFamily::Constant, &data, &prior, &[0.5], &cfg).unwrap();
        assert_eq!(a.len(), cfg.retained());
        assert_eq!(a, b);
        assert!(a.acceptance_rate > 0.0 && a.acceptance_rate < 1.0);
        assert!(a.draws.iter().all(|r| r[0] > 0.0));
    }

    #[test]
    fn constant_chain_summary() {
        let chain = PosteriorChain {
            family: ModelFamily::Constant,
            draws: vec![vec![0.4]; 10],
            acceptance_rate: 0.5,
            scales: vec![0.1],
            init: vec![0.4],
        };
        let s = &posterior_summary(&chain)[0];
        assert_eq!(s.sd, 0.0);
        assert_eq!((s.q025, s.q50, s.q975), (0.4, 0.4, 0.4));
    }

    #[test]
    fn merged_mean_is_length_weighted() {
        let mk = |v: f64, n: usize, acc: f64| PosteriorChain {
            family: ModelFamily::Constant,
            draws: vec![vec![v]; n],
            acceptance_rate: acc,
            scales: vec![0.1],
            init: vec![v],
        };
        let merged = mk(1.0, 30, 0.2).merge(&mk(2.0, 10, 0.6)).unwrap();
        assert_abs_diff_eq!(merged.means()[0], 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(merged.acceptance_rate, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&xs, 0.5), 3.0);
        assert_eq!(quantile_sorted(&xs, 0.25), 2.0);
        assert_abs_diff_eq!(quantile_sorted(&xs, 0.1), 1.4, epsilon = 1e-15);
    }

    #[test]
    fn invalid_start_and_config_are_rejected() {
        let data = SurvivalDataset::new(vec![1.0], vec![true]).unwrap();
        let prior = PriorSpec::default_for(ModelFamily::Constant);
        assert!(matches!(
            run_chain(ModelFamily::Constant, &data, &prior, &[0.0], &small_cfg(1)),
            Err(McmcError::InvalidStart(_))
        ));
        let bad = ChainConfig {
            burn_in: 10,
            iterations: 10,
            ..ChainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn conjugate_constant_hazard_posterior() {
        // Gamma(2, 2) prior with uncensored exponential data: Gamma(2 + d, 2 + sum t)
        let times: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
        let data = SurvivalDataset::new(times.clone(), vec![true; 40]).unwrap();
        let (shape, rate) = (2.0 + 40.0, 2.0 + times.iter().sum::<f64>());
        let chain = run_chain(
            ModelFamily::Constant,
            &data,
            &PriorSpec::default_for(ModelFamily::Constant),
            &[1.0],
            &ChainConfig {
                iterations: 40_000,
                burn_in: 2_000,
                thin: 2,
                seed: 11,
                ..ChainConfig::default()
            },
        )
        .unwrap();
        let col = chain.column(0);
        let se = batch_means_se(&col);
        let mean = chain.means()[0];
        assert!(
            (mean - shape / rate).abs() < 3.0 * se + 1e-12,
            "{mean} vs {}",
            shape / rate
        );
        let sd = posterior_summary(&chain)[0].sd;
        assert!((sd - shape.sqrt() / rate).abs() / (shape.sqrt() / rate) < 0.05);
    }

    #[test]
    fn frozen_kernel_preserves_piecewise_constant_target() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let weights = [1.0, 2.0, 4.0, 2.0, 1.0];
        let target = |y: &[f64]| {
            if (0.0..5.0).contains(&y[0]) {
                f64::ln(weights[y[0] as usize])
            } else {
                f64::NEG_INFINITY
            }
        };
        let cfg = ChainConfig {
            iterations: 1_010_000,
            burn_in: 10_000,
            thin: 10,
            initial_scale: 1.0,
            seed: 5,
            ..ChainConfig::default()
        };
        let raw = adaptive_metropolis(target, &[2.5], &cfg).unwrap();
        let mut counts = [0.0; 5];
        for d in &raw.draws {
            counts[d[0] as usize] += 1.0;
        }
        let n = raw.draws.len() as f64;
        let total: f64 = weights.iter().sum();
        let chi2: f64 = counts
            .iter()
            .zip(weights)
            .map(|(&o, w)| {
                let e = n * w / total;
                (o - e).powi(2) / e
            })
            .sum();
        let p = 1.0 - ChiSquared::new(4.0).unwrap().cdf(chi2);
        assert!(p > 0.01, "chi2 = {chi2}, p = {p}");
    }

    #[test]
    fn batch_means_se_of_iid_sequence() {
        let rng = crate::rng::CounterRng::new(3);
        let xs: Vec<f64> = (0..10_000).map(|i| rng.uniform(0, i)).collect();
        let se = batch_means_se(&xs);
        let iid = (1.0f64 / 12.0 / 10_000.0).sqrt();
        assert!((se / iid - 1.0).abs() < 0.35, "{se} vs {iid}");
    }
}
