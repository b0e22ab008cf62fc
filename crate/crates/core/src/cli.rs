//! `hazode` command-line interface.
//!
//! Every command reads flat `key = value` settings from `--config` (if any),
//! overridden by repeated `--set key=value`. Output goes to `--out` or stdout.
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
//! 4 data error.

use crate::curves::select_curves;
use crate::dataset::{
    ingest_survival_data, DataError, StatusConvention, SurvivalDataset, TimeUnit,
};
use crate::inference::{
    fit_lognormal, fit_weibull, init_from_survival, mgf, mle_fit, FitConfig, FitResult,
    InferenceError, MgfConfig, ModelFamily, DEFAULT_WINDOW,
};
use crate::mcmc::{monte_carlo_study, ChainConfig, McmcError, StudyConfig};
use crate::models::{ModelError, ModelSpec};
use crate::ode::{OdeError, DEFAULT_DT};
use crate::sampling::{simulate_dataset, tune_cmax, Censoring, InversionConfig, SamplingError};
use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_DATA: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: msg.into(),
        }
    }
    pub fn data(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: msg.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Ode(OdeError::Blowup { .. }) | ModelError::NotPositive(_) => {
                Self::numeric(e.to_string())
            }
            _ => Self::config(e.to_string()),
        }
    }
}

impl From<SamplingError> for CliError {
    fn from(e: SamplingError) -> Self {
        match e {
            SamplingError::Config(_) | SamplingError::ImproperWithoutHorizon(_) => {
                Self::config(e.to_string())
            }
            SamplingError::Model(m) => m.into(),
            _ => Self::numeric(e.to_string()),
        }
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::Data(_) => Self::data(e.to_string()),
            InferenceError::InvalidInit(_) => Self::config(e.to_string()),
            InferenceError::Model(m) => m.into(),
            _ => Self::numeric(e.to_string()),
        }
    }
}

impl From<McmcError> for CliError {
    fn from(e: McmcError) -> Self {
        match e {
            McmcError::Config(_) | McmcError::InvalidStart(_) => Self::config(e.to_string()),
            _ => Self::numeric(e.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        Self::data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hazode",
    version,
    about = "Second-order ODE hazard models: curves, simulation, fitting, MGFs, studies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (directory for `curves`); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// ODE step size.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Starting values for `fit`: `auto` or a `key = value` file.
    #[arg(long, global = true, default_value = "auto")]
    pub init: String,
    /// Override one setting; repeatable.
    #[arg(long = "set", global = true, value_parser = parse_assignment)]
    pub set: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Status01,
    Status12,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    Native,
    Years,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write `t,h,S,H` tables for the reference parameter sets.
    Curves {
        /// `all`, a group (damped, logistic, sinusoidal, exp_boundary, exp_growth) or a curve name.
        #[arg(default_value = "all")]
        figure: String,
        /// Keep every k-th grid row.
        #[arg(long, default_value_t = 10)]
        stride: usize,
    },
    /// Simulate a right-censored dataset (`time,status`).
    Simulate,
    /// Maximum-likelihood fits with BIC.
    Fit {
        data: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "weibull,lognormal,sinusoidal"
        )]
        family: Vec<String>,
        #[arg(long, value_enum, default_value = "status01")]
        convention: Convention,
        #[arg(long, value_enum, default_value = "native")]
        unit: Unit,
    },
    /// Replicated simulate-and-sample study.
    Study,
    /// Moment generating function sweep (`s,value,divergent`).
    Mgf,
    /// Parse a dataset and print a summary.
    IngestCheck {
        data: PathBuf,
        #[arg(long, value_enum, default_value = "status12")]
        convention: Convention,
        #[arg(long, value_enum, default_value = "years")]
        unit: Unit,
    },
}

fn parse_assignment(raw: &str) -> Result<(String, String), String> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{raw}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            parse_assignment(line).map_err(|e| CliError::config(format!("line {}: {e}", i + 1)))?;
        map.insert(k, v);
    }
    Ok(map)
}

/// Settings resolved from `--config`, `--set` and the global flags.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub kv: BTreeMap<String, String>,
    pub seed: u64,
    pub dt: f64,
}

impl Settings {
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.kv
            .get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|_| CliError::config(format!("cannot parse `{key}` = `{raw}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.kv
            .get(key)
            .map(|raw| {
                raw.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<T>()
                            .map_err(|_| CliError::config(format!("cannot parse `{x}` in `{key}`")))
                    })
                    .collect()
            })
            .transpose()
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let mut kv = match &cli.config {
        Some(p) => parse_kv(&read_text(p)?)?,
        None => BTreeMap::new(),
    };
    for (k, v) in &cli.set {
        kv.insert(k.clone(), v.clone());
    }
    let dt = cli.dt.unwrap_or(DEFAULT_DT);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::config(format!("--dt {dt} must be positive")));
    }
    let seed = match cli.seed {
        Some(s) => s,
        None => kv
            .get("seed")
            .map(|s| {
                s.parse()
                    .map_err(|_| CliError::config(format!("bad seed `{s}`")))
            })
            .transpose()?
            .unwrap_or(1),
    };
    Ok(Settings { kv, seed, dt })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::config(format!("stdout: {e}")))
        }
    }
}

fn load_data(path: &Path, convention: Convention, unit: Unit) -> Result<SurvivalDataset, CliError> {
    let file =
        fs::File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let convention = match convention {
        Convention::Status01 => StatusConvention::Status01,
        Convention::Status12 => StatusConvention::Status12,
    };
    let unit = match unit {
        Unit::Native => TimeUnit::Native,
        Unit::Years => TimeUnit::DaysToYears,
    };
    Ok(ingest_survival_data(
        BufReader::new(file),
        convention,
        unit,
    )?)
}

/// Runs one parsed invocation.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        // a second call within one process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let s = settings(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Curves { figure, stride } => cmd_curves(&s, figure, *stride, out),
        Command::Simulate => emit(out, &cmd_simulate(&s, out)?),
        Command::Fit {
            data,
            family,
            convention,
            unit,
        } => {
            let data = load_data(data, *convention, *unit)?;
            let families = family
                .iter()
                .map(|f| {
                    f.parse::<ModelFamily>()
                        .map_err(|e| CliError::config(e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            emit(out, &cmd_fit(&s, &data, &families, &cli.init)?)
        }
        Command::Study => emit(out, &cmd_study(&s)?),
        Command::Mgf => emit(out, &cmd_mgf(&s)?),
        Command::IngestCheck {
            data,
            convention,
            unit,
        } => {
            let data = load_data(data, *convention, *unit)?;
            let mut text = data.meta_kv();
            let _ = writeln!(text, "events = {}", data.event_count());
            let _ = writeln!(text, "max_time = {}", data.max_time());
            emit(out, &text)
        }
    }
}

pub fn cmd_curves(
    s: &Settings,
    figure: &str,
    stride: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let curves = select_curves(figure);
    if curves.is_empty() {
        return Err(CliError::config(format!(
            "no reference curve matches `{figure}`"
        )));
    }
    let dir = out.unwrap_or(Path::new("curves"));
    fs::create_dir_all(dir).map_err(|e| CliError::config(format!("{}: {e}", dir.display())))?;
    for c in curves {
        let table = c.render(s.dt, stride)?;
        let path = dir.join(format!("{}.csv", c.name));
        fs::write(&path, table)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn sampler_config(s: &Settings) -> Result<InversionConfig, CliError> {
    let cfg = InversionConfig::default().with_dt(s.dt);
    Ok(InversionConfig {
        max_horizon: s.get_or("max_horizon", cfg.max_horizon)?,
        ..cfg
    })
}

/// Dataset CSV; metadata goes to `<out>.meta` when writing to a file.
pub fn cmd_simulate(s: &Settings, out: Option<&Path>) -> Result<String, CliError> {
    let model = ModelSpec::from_kv(&s.kv)?;
    let n: usize = s.get_or("n", 1000)?;
    let cfg = sampler_config(s)?;
    let censor = if let Some(target) = s.get::<f64>("censor")? {
        let pilot = s.get_or("pilot", 20_000)?;
        let c_max = tune_cmax(&model, target, pilot, s.seed, &cfg)?;
        Censoring::Uniform { c_max }
    } else if let Some(c_max) = s.get("c_max")? {
        Censoring::Uniform { c_max }
    } else if let Some(horizon) = s.get("horizon")? {
        Censoring::Administrative { horizon }
    } else {
        Censoring::None
    };
    let data = simulate_dataset(&model, n, censor, s.seed, &cfg)?;
    let mut buf = Vec::new();
    data.write_csv(&mut buf)?;
    if let Some(p) = out {
        let mut meta = data.meta_kv();
        if let Censoring::Administrative { horizon } = censor {
            let _ = writeln!(meta, "horizon = {horizon}");
        }
        let side = PathBuf::from(format!("{}.meta", p.display()));
        fs::write(&side, meta).map_err(|e| CliError::config(format!("{}: {e}", side.display())))?;
    }
    Ok(String::from_utf8(buf).expect("csv is ascii"))
}

/// Starting values for an ODE family: `auto` uses the survival-curve
/// scheme, otherwise `init` names a `key = value` file.
pub fn resolve_init(
    family: ModelFamily,
    data: &SurvivalDataset,
    init: &str,
    s: &Settings,
) -> Result<Vec<f64>, CliError> {
    if init == "auto" {
        let window = s.get_or("init_window", DEFAULT_WINDOW)?;
        let est = init_from_survival(data, window)?;
        return est
            .start_for(family)
            .ok_or_else(|| CliError::config(format!("{family} has no automatic start")));
    }
    let kv = parse_kv(&read_text(Path::new(init))?)?;
    family
        .param_names()
        .iter()
        .map(|&name| {
            kv.get(name)
                .ok_or_else(|| CliError::config(format!("init file lacks `{name}`")))?
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("init `{name}` is not a number")))
        })
        .collect()
}

pub fn fit_family(
    family: ModelFamily,
    data: &SurvivalDataset,
    init: &str,
    s: &Settings,
) -> Result<FitResult, CliError> {
    let cfg = FitConfig {
        restarts: s.get_or("restarts", FitConfig::default().restarts)?,
        seed: s.seed,
        ..FitConfig::default()
    };
    Ok(match family {
        ModelFamily::Weibull => fit_weibull(data, &cfg)?,
        ModelFamily::LogNormal => fit_lognormal(data, &cfg)?,
        _ => {
            let start = resolve_init(family, data, init, s)?;
            mle_fit(family, data, &start, &cfg)?
        }
    })
}

pub fn cmd_fit(
    s: &Settings,
    data: &SurvivalDataset,
    families: &[ModelFamily],
    init: &str,
) -> Result<String, CliError> {
    let mut out = String::new();
    for &family in families {
        let fit = fit_family(family, data, init, s)?;
        out.push_str(&fit.report());
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_mgf(s: &Settings) -> Result<String, CliError> {
    let model = ModelSpec::from_kv(&s.kv)?;
    let grid: Vec<f64> = match s.list::<f64>("s")? {
        Some(g) => g,
        None => {
            let lo: f64 = s.get_or("s_min", -1.0)?;
            let hi: f64 = s.get_or("s_max", 0.5)?;
            let steps: usize = s.get_or("s_steps", 16)?;
            if steps == 0 || !(hi >= lo) {
                return Err(CliError::config("need s_min <= s_max and s_steps >= 1"));
            }
            (0..=steps)
                .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
                .collect()
        }
    };
    let cfg = MgfConfig {
        dt: s.dt,
        tail_tolerance: s.get_or("tail_tolerance", MgfConfig::default().tail_tolerance)?,
        ..MgfConfig::default()
    };
    let mut out = String::from("s,value,divergent\n");
    for v in grid {
        let _ = writeln!(out, "{}", mgf(&model, v, &cfg)?.row());
    }
    Ok(out)
}

/// Study settings: `family`, the family's parameter names for the truth,
/// `n` (comma list), `replications`, `iterations`, `burn_in`, `thin`,
/// `censor`, `format` (`table` or `csv`).
pub fn study_config(s: &Settings) -> Result<StudyConfig, CliError> {
    let family: ModelFamily = s
        .get::<String>("family")?
        .unwrap_or_else(|| "damped".into())
        .parse()
        .map_err(|e: ModelError| CliError::config(e.to_string()))?;
    let truth = family
        .param_names()
        .iter()
        .map(|&name| {
            s.get::<f64>(name)?
                .ok_or_else(|| CliError::config(format!("missing true `{name}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut cfg = StudyConfig::new(family, truth, s.list("n")?.unwrap_or_else(|| vec![2000]));
    let d = ChainConfig::default();
    cfg.replications = s.get_or("replications", cfg.replications)?;
    cfg.censor_target = s.get_or("censor", cfg.censor_target)?;
    cfg.seed = s.seed;
    cfg.replication_seeds = s.list("replication_seeds")?;
    cfg.chain = ChainConfig {
        iterations: s.get_or("iterations", d.iterations)?,
        burn_in: s.get_or("burn_in", d.burn_in)?,
        thin: s.get_or("thin", d.thin)?,
        initial_scale: s.get_or("proposal_scale", d.initial_scale)?,
        adaptation_window: s.get_or("adaptation_window", d.adaptation_window)?,
        ..d
    };
    cfg.sampler = sampler_config(s)?;
    Ok(cfg)
}

pub fn cmd_study(s: &Settings) -> Result<String, CliError> {
    let cfg = study_config(s)?;
    let res = monte_carlo_study(&cfg)?;
    Ok(match s.get::<String>("format")?.as_deref() {
        Some("csv") => res.csv(),
        _ => res.table(),
    })
}
