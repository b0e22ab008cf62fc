//! Right-censored survival data and its delimited-text format.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("empty input")]
    Empty,
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unknown status codes on lines {lines:?} (convention {convention})")]
    UnknownStatus {
        lines: Vec<usize>,
        convention: &'static str,
    },
    #[error("dataset is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How the status column encodes events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatusConvention {
    /// `1` = event, `0` = censored.
    Status01,
    /// `2` = dead, `1` = censored.
    Status12,
}

impl StatusConvention {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Status01 => "status01",
            Self::Status12 => "status12",
        }
    }

    fn decode(&self, code: &str) -> Option<bool> {
        match (self, code.trim()) {
            (Self::Status01, "1") | (Self::Status12, "2") => Some(true),
            (Self::Status01, "0") | (Self::Status12, "1") => Some(false),
            _ => None,
        }
    }
}

/// Days per year used when ingesting day-valued times.
pub const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    Native,
    DaysToYears,
}

impl TimeUnit {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Native => "native",
            Self::DaysToYears => "years (days/365.25)",
        }
    }

    fn convert(&self, t: f64) -> f64 {
        match self {
            Self::Native => t,
            Self::DaysToYears => t / DAYS_PER_YEAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetMeta {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub c_max: Option<f64>,
    pub time_unit: Option<String>,
    pub dropped_rows: usize,
}

/// Observed times `t_i = min(T_i, C_i)` with event indicators `T_i <= C_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    events: Vec<bool>,
    pub meta: DatasetMeta,
}

impl SurvivalDataset {
    pub fn new(times: Vec<f64>, events: Vec<bool>) -> Result<Self, DataError> {
        if times.len() != events.len() {
            return Err(DataError::Inconsistent(format!(
                "{} times but {} indicators",
                times.len(),
                events.len()
            )));
        }
        if let Some(bad) = times.iter().find(|t| !(**t >= 0.0) || t.is_infinite()) {
            return Err(DataError::Inconsistent(format!(
                "invalid observed time {bad}"
            )));
        }
        Ok(Self {
            times,
            events,
            meta: DatasetMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: DatasetMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.events.iter().filter(|&&d| d).count()
    }

    pub fn total_time(&self) -> f64 {
        self.times.iter().sum()
    }

    pub fn max_time(&self) -> f64 {
        self.times.iter().copied().fold(0.0, f64::max)
    }

    /// `1 - mean(delta)`.
    pub fn censoring_rate(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        1.0 - self.event_count() as f64 / self.len() as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, bool)> + '_ {
        self.times.iter().copied().zip(self.events.iter().copied())
    }

    /// Times multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, DataError> {
        Ok(Self::new(
            self.times.iter().map(|t| t * factor).collect(),
            self.events.clone(),
        )?
        .with_meta(self.meta.clone()))
    }

    /// Writes `time,status` rows (status 1 = event). Times use the shortest
    /// representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), DataError> {
        let mut buf = String::with_capacity(24 * (self.len() + 1));
        buf.push_str("time,status\n");
        for (t, d) in self.iter() {
            let _ = writeln!(buf, "{t},{}", u8::from(d));
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Metadata as `key = value` lines.
    pub fn meta_kv(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        if let Some(model) = &m.model {
            let _ = writeln!(out, "model = {model}");
        }
        if let Some(seed) = m.seed {
            let _ = writeln!(out, "seed = {seed}");
        }
        if let Some(c_max) = m.c_max {
            let _ = writeln!(out, "c_max = {c_max}");
        }
        if let Some(unit) = &m.time_unit {
            let _ = writeln!(out, "time_unit = {unit}");
        }
        let _ = writeln!(out, "n = {}", self.len());
        let _ = writeln!(out, "censoring_rate = {}", self.censoring_rate());
        let _ = writeln!(out, "dropped_rows = {}", m.dropped_rows);
        out
    }
}

fn split_row(line: &str) -> Vec<&str> {
    line.split(',')
        .map(|f| f.trim().trim_matches('"'))
        .collect()
}

/// Reads a comma-delimited file with (at least) `time` and `status` columns.
///
/// Rows with a missing time (`NA` or empty) are dropped and counted; any
/// status code outside the convention is an error listing every offending
/// line.
pub fn ingest_survival_data<R: BufRead>(
    input: R,
    convention: StatusConvention,
    unit: TimeUnit,
) -> Result<SurvivalDataset, DataError> {
    let mut lines = input.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(DataError::Empty),
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let columns = split_row(&header);
    let find = |name: &'static str| {
        columns
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
            .ok_or(DataError::MissingColumn(name))
    };
    let (time_col, status_col) = (find("time")?, find("status")?);

    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut bad_status = Vec::new();
    let mut dropped = 0;
    for (idx, line) in lines {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_row(&line);
        let field = |col: usize| fields.get(col).copied().unwrap_or("");
        let raw_time = field(time_col);
        if raw_time.is_empty() || raw_time.eq_ignore_ascii_case("na") {
            dropped += 1;
            continue;
        }
        let t: f64 = raw_time.parse().map_err(|_| DataError::Parse {
            line: line_no,
            reason: format!("time `{raw_time}` is not a number"),
        })?;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(DataError::Parse {
                line: line_no,
                reason: format!("time {t} must be finite and non-negative"),
            });
        }
        match convention.decode(field(status_col)) {
            Some(d) => {
                times.push(unit.convert(t));
                events.push(d);
            }
            None => bad_status.push(line_no),
        }
    }
    if !bad_status.is_empty() {
        return Err(DataError::UnknownStatus {
            lines: bad_status,
            convention: convention.name(),
        });
    }
    if times.is_empty() {
        return Err(DataError::Empty);
    }
    let meta = DatasetMeta {
        time_unit: Some(unit.name().to_string()),
        dropped_rows: dropped,
        ..DatasetMeta::default()
    };
    Ok(SurvivalDataset::new(times, events)?.with_meta(meta))
}
