//! Replicated simulate → sample → summarise study.

use super::chain::{run_chain, ChainConfig};
use super::prior::{log_posterior, PriorSpec};
use super::McmcError;
use crate::inference::{mle_fit, FitConfig, ModelFamily, NelderMeadConfig};
use crate::rng::CounterRng;
use crate::sampling::{simulate_dataset, tune_cmax, Censoring, InversionConfig};
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub family: ModelFamily,
    pub truth: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    /// Target fraction of censored observations.
    pub censor_target: f64,
    pub seed: u64,
    /// Overrides the derived per-replication dataset seeds (reused for every n).
    pub replication_seeds: Option<Vec<u64>>,
    pub chain: ChainConfig,
    pub sampler: InversionConfig,
    /// Pilot size for tuning the censoring bound.
    pub pilot_size: usize,
}

impl StudyConfig {
    pub fn new(family: ModelFamily, truth: Vec<f64>, n_grid: Vec<usize>) -> Self {
        Self {
            family,
            truth,
            n_grid,
            replications: 50,
            censor_target: 0.25,
            seed: 2024,
            replication_seeds: None,
            chain: ChainConfig::default(),
            sampler: InversionConfig::default(),
            pilot_size: 20_000,
        }
    }

    fn seeds_for(&self, n_index: usize) -> Vec<u64> {
        match &self.replication_seeds {
            Some(s) => s.clone(),
            None => {
                let root = CounterRng::new(self.seed);
                (0..self.replications as u64)
                    .map(|r| root.child_seed(((n_index as u64) << 32) | r))
                    .collect()
            }
        }
    }
}

/// Where a chain started.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitSource {
    Mle,
    PriorMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub seed: u64,
    pub init: InitSource,
    pub posterior_mean: Vec<f64>,
    pub acceptance_rate: f64,
    pub censoring_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub c_max: f64,
    /// Average of posterior means across successful replications.
    pub mean: Vec<f64>,
    pub rmse: Vec<f64>,
    pub replications: Vec<ReplicationOutcome>,
    /// `(seed, message)` for excluded replications.
    pub failures: Vec<(u64, String)>,
}

impl StudyRow {
    pub fn bias(&self, truth: &[f64]) -> Vec<f64> {
        self.mean.iter().zip(truth).map(|(m, t)| m - t).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub family: ModelFamily,
    pub truth: Vec<f64>,
    pub rows: Vec<StudyRow>,
}

impl StudyResult {
    pub fn row(&self, n: usize) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// Rows are sample sizes; each cell is `mean (rmse)`.
    pub fn table(&self) -> String {
        let names = self.family.param_names();
        let mut out = String::new();
        let _ = write!(out, "{:>6}", "n");
        for (name, truth) in names.iter().zip(&self.truth) {
            let _ = write!(out, " {:>22}", format!("{name} ({truth})"));
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:>6}", row.n);
            for (m, r) in row.mean.iter().zip(&row.rmse) {
                let _ = write!(out, " {:>22}", format!("{m:.4} ({r:.4})"));
            }
            out.push('\n');
        }
        out
    }

    /// Long format: `n,param,truth,mean,rmse,replications,failures`.
    pub fn csv(&self) -> String {
        let mut out = String::from("n,param,truth,mean,rmse,replications,failures\n");
        for row in &self.rows {
            for (j, name) in self.family.param_names().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    row.n,
                    name,
                    self.truth[j],
                    row.mean[j],
                    row.rmse[j],
                    row.replications.len(),
                    row.failures.len()
                );
            }
        }
        out
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn replicate(
    cfg: &StudyConfig,
    prior: &PriorSpec,
    n: usize,
    c_max: f64,
    seed: u64,
) -> Result<ReplicationOutcome, String> {
    let family = cfg.family;
    let model = family
        .spec(&cfg.truth)
        .map_err(|e| e.to_string())?
        .ok_or_else(|| format!("{family} has no ODE model to simulate"))?;
    let data = simulate_dataset(&model, n, Censoring::Uniform { c_max }, seed, &cfg.sampler)
        .map_err(|e| e.to_string())?;

    // single polished simplex run from the truth; cheap relative to the chain
    let fit_cfg = FitConfig {
        restarts: 0,
        simplex: NelderMeadConfig {
            max_evals: 2000,
            ..NelderMeadConfig::default()
        },
        ..FitConfig::default()
    };
    let (init, source) = match mle_fit(family, &data, &cfg.truth, &fit_cfg) {
        Ok(fit)
            if fit.converged && log_posterior(family, &fit.params, &data, prior).is_finite() =>
        {
            (fit.params, InitSource::Mle)
        }
        _ => (prior.means(0.0), InitSource::PriorMean),
    };
    let chain_cfg = ChainConfig {
        seed: CounterRng::new(seed).child_seed(0),
        ..cfg.chain
    };
    let chain = run_chain(family, &data, prior, &init, &chain_cfg).map_err(|e| e.to_string())?;
    Ok(ReplicationOutcome {
        seed,
        init: source,
        posterior_mean: chain.means(),
        acceptance_rate: chain.acceptance_rate,
        censoring_rate: data.censoring_rate(),
    })
}

/// Runs the study with default priors; replications run in parallel.
pub fn monte_carlo_study(cfg: &StudyConfig) -> Result<StudyResult, McmcError> {
    let family = cfg.family;
    if cfg.truth.len() != family.dim() {
        return Err(McmcError::Config(format!(
            "{family} needs {} true values, got {}",
            family.dim(),
            cfg.truth.len()
        )));
    }
    let reps = cfg
        .replication_seeds
        .as_ref()
        .map_or(cfg.replications, Vec::len);
    if reps < 2 {
        return Err(McmcError::Config(
            "at least 2 replications are required".into(),
        ));
    }
    if cfg.n_grid.is_empty() || cfg.n_grid.contains(&0) {
        return Err(McmcError::Config("sample sizes must be positive".into()));
    }
    cfg.chain.validate()?;
    let model = family
        .spec(&cfg.truth)
        .map_err(|e| McmcError::Config(e.to_string()))?
        .ok_or_else(|| McmcError::Config(format!("{family} is not an ODE family")))?;
    let c_max = tune_cmax(
        &model,
        cfg.censor_target,
        cfg.pilot_size,
        cfg.seed,
        &cfg.sampler,
    )
    .map_err(|e| McmcError::Sampling(e.to_string()))?;
    let prior = PriorSpec::default_for(family);

    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (k, &n) in cfg.n_grid.iter().enumerate() {
        let seeds = cfg.seeds_for(k);
        let results: Vec<(u64, Result<ReplicationOutcome, String>)> = seeds
            .par_iter()
            .map(|&s| (s, replicate(cfg, &prior, n, c_max, s)))
            .collect();
        let mut ok = Vec::new();
        let mut failures = Vec::new();
        for (s, r) in results {
            match r {
                Ok(o) => ok.push(o),
                Err(e) => failures.push((s, e)),
            }
        }
        if failures.len() * 10 > seeds.len() || ok.is_empty() {
            return Err(McmcError::TooManyFailures {
                failed: failures.len(),
                total: seeds.len(),
                first: failures.first().map(|f| f.1.clone()).unwrap_or_default(),
            });
        }
        let m = ok.len() as f64;
        let dim = family.dim();
        let mean: Vec<f64> = (0..dim)
            .map(|j| compensated_sum(ok.iter().map(|o| o.posterior_mean[j])) / m)
            .collect();
        let rmse: Vec<f64> = (0..dim)
            .map(|j| {
                let t = cfg.truth[j];
                (compensated_sum(ok.iter().map(|o| (o.posterior_mean[j] - t).powi(2))) / m).sqrt()
            })
            .collect();
        rows.push(StudyRow {
            n,
            c_max,
            mean,
            rmse,
            replications: ok,
            failures,
        });
    }
    Ok(StudyResult {
        family,
        truth: cfg.truth.clone(),
        rows,
    })
}
