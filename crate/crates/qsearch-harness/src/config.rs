//! Experiment configuration: defaults, plain-text `key=value` config files,
//! and command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use qsearch_core::controller::{DynamicsMode, EngineKind};
use qsearch_core::problem::{ProblemError, SearchProblem};

use crate::stats::trials_for_half_width;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad flags or config values; maps to exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Filesystem failure; maps to exit code 3.
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn usage(msg: impl Into<String>) -> Self {
        HarnessError::Usage(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        HarnessError::Io { context: context.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Io { .. } => 3,
        }
    }
}

impl From<ProblemError> for HarnessError {
    fn from(e: ProblemError) -> Self {
        HarnessError::Usage(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Table1,
    Simulate,
    Audit,
    Scaling,
    Baseline,
}

impl ExperimentKind {
    fn default_trials(self) -> u64 {
        match self {
            ExperimentKind::Table1 => 100_000,
            ExperimentKind::Simulate => 1_000,
            ExperimentKind::Audit => 0, // auto-sized from the CI target
            ExperimentKind::Scaling => 400,
            ExperimentKind::Baseline => 1_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Optional values from a config file or the command line. Later sources win
/// field by field.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub mode: Option<DynamicsMode>,
    pub engine: Option<EngineKind>,
    pub set_val: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub n: Option<u32>,
    pub m: Option<u64>,
    pub p_grid: Option<Vec<f64>>,
    pub n_list: Option<Vec<u64>>,
    pub workers: Option<usize>,
}

impl Overrides {
    /// Layer `other` on top of `self`.
    pub fn merged_with(mut self, other: Overrides) -> Overrides {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field; })*
            };
        }
        take!(seed, trials, mode, engine, set_val, out, format, n, m, p_grid, n_list, workers);
        self
    }

    /// Parse a plain-text `key=value` config file. Blank lines and `#`
    /// comments are ignored.
    pub fn from_file(path: &Path) -> Result<Overrides, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::io(format!("reading config {}", path.display()), e))?;
        Self::from_key_values(&text)
    }

    pub fn from_key_values(text: &str) -> Result<Overrides, HarnessError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::usage(format!("config line {}: expected key=value, got {line:?}", lineno + 1)))?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut o = Overrides::default();
        for (key, value) in map {
            match key.as_str() {
                "seed" => o.seed = Some(parse(&key, &value)?),
                "trials" => o.trials = Some(parse(&key, &value)?),
                "mode" => o.mode = Some(parse_mode(&value)?),
                "engine" => o.engine = Some(parse_engine(&value)?),
                "set_val" => o.set_val = Some(parse(&key, &value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                "format" => o.format = Some(parse_format(&value)?),
                "n" => o.n = Some(parse(&key, &value)?),
                "m" => o.m = Some(parse(&key, &value)?),
                "p" => o.p_grid = Some(parse_list(&key, &value)?),
                "n_list" => o.n_list = Some(parse_list(&key, &value)?),
                "workers" => o.workers = Some(parse(&key, &value)?),
                other => return Err(HarnessError::usage(format!("unknown config key {other:?}"))),
            }
        }
        Ok(o)
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .parse()
        .map_err(|_| HarnessError::usage(format!("invalid value {value:?} for {key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, HarnessError> {
    value.split(',').map(|item| parse(key, item.trim())).collect()
}

pub fn parse_mode(value: &str) -> Result<DynamicsMode, HarnessError> {
    match value {
        "idealized" => Ok(DynamicsMode::Idealized),
        "physical" => Ok(DynamicsMode::Physical),
        other => Err(HarnessError::usage(format!(
            "invalid mode {other:?} (expected idealized|physical)"
        ))),
    }
}

pub fn parse_engine(value: &str) -> Result<EngineKind, HarnessError> {
    match value {
        "full" => Ok(EngineKind::Full),
        "compact" => Ok(EngineKind::Compact),
        other => Err(HarnessError::usage(format!(
            "invalid engine {other:?} (expected full|compact)"
        ))),
    }
}

pub fn parse_format(value: &str) -> Result<OutputFormat, HarnessError> {
    match value {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(HarnessError::usage(format!(
            "invalid format {other:?} (expected csv|json)"
        ))),
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub trials: u64,
    pub mode: DynamicsMode,
    pub engine: EngineKind,
    pub set_val: f64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub n: Option<u32>,
    pub m: Option<u64>,
    pub p_grid: Vec<f64>,
    pub n_list: Vec<u64>,
    pub workers: Option<usize>,
}

/// Default scaling sweep: `N = 2^10 .. 2^26` in factor-of-4 steps.
pub fn default_scaling_n_list() -> Vec<u64> {
    (10..=26).step_by(2).map(|k| 1u64 << k).collect()
}

impl ExperimentConfig {
    pub fn build(experiment: ExperimentKind, o: Overrides) -> Result<Self, HarnessError> {
        let set_val = o.set_val.unwrap_or(1.0);
        if !(set_val > 0.0) {
            return Err(HarnessError::usage(format!("set-val must be positive, got {set_val}")));
        }
        let trials = o.trials.unwrap_or_else(|| experiment.default_trials());
        if trials == 0 && experiment != ExperimentKind::Audit {
            return Err(HarnessError::usage("trials must be at least 1"));
        }
        if let Some(grid) = &o.p_grid {
            for &p in grid {
                if !(p > 0.0 && p < 1.0) {
                    return Err(HarnessError::usage(format!("p value {p} outside (0, 1)")));
                }
            }
        }
        Ok(Self {
            experiment,
            seed: o.seed.unwrap_or(0),
            trials,
            mode: o.mode.unwrap_or(DynamicsMode::Idealized),
            engine: o.engine.unwrap_or(EngineKind::Compact),
            set_val,
            out: o.out,
            format: o.format.unwrap_or(OutputFormat::Csv),
            n: o.n,
            m: o.m,
            p_grid: o.p_grid.unwrap_or_default(),
            n_list: o.n_list.unwrap_or_else(default_scaling_n_list),
            workers: o.workers,
        })
    }

    /// Trial count for the audit: at least enough for the CI width target.
    pub fn audit_trials(&self) -> u64 {
        self.trials.max(trials_for_half_width(0.01))
    }

    /// The search instance from `--n/--m`, or from a single `--p` value.
    pub fn problem(&self) -> Result<SearchProblem, HarnessError> {
        match (self.n, self.m) {
            (Some(n), m) => {
                let m = m.unwrap_or(1);
                Ok(SearchProblem::new(n, 0..m)?)
            }
            (None, Some(_)) => Err(HarnessError::usage("--m requires --n")),
            (None, None) => match self.p_grid.as_slice() {
                [p] => problem_for_fraction(*p),
                [] => Err(HarnessError::usage("specify --n [--m] or a single --p value")),
                _ => Err(HarnessError::usage(
                    "this experiment takes one instance; give --n [--m] or a single --p",
                )),
            },
        }
    }
}

/// Build an instance whose target fraction is (as close as representable to)
/// `p`, preferring an exact dyadic representation.
pub fn problem_for_fraction(p: f64) -> Result<SearchProblem, HarnessError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(HarnessError::usage(format!("p value {p} outside (0, 1)")));
    }
    for n in 1..=30u32 {
        let n_states = (1u64 << n) as f64;
        let m = (p * n_states).round();
        if m >= 1.0 && m < n_states && (m / n_states - p).abs() < 1e-12 {
            return Ok(SearchProblem::new(n, 0..m as u64)?);
        }
    }
    // no dyadic match; approximate on a fixed 2^20 grid
    let n = 20u32;
    let n_states = 1u64 << n;
    let m = ((p * n_states as f64).round() as u64).clamp(1, n_states - 1);
    Ok(SearchProblem::new(n, 0..m)?)
}
