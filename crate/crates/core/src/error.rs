//! Error types shared across the simulator.

use thiserror::Error;

/// Configuration problems: parse failures, unknown keys, constraint violations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("failed to parse config: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {constraint}")]
    Constraint { key: String, constraint: String },
    #[error("malformed override `{0}` (expected key=value)")]
    BadOverride(String),
    #[error("no valid step size above 1e-12 s for periods {periods:?} (requested {requested:e} s)")]
    NoValidStep { requested: f64, periods: Vec<f64> },
}

impl ConfigError {
    pub(crate) fn constraint(key: &str, constraint: impl Into<String>) -> Self {
        ConfigError::Constraint {
            key: key.to_string(),
            constraint: constraint.into(),
        }
    }
}

/// Numerical failures during a transient run.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("non-finite derivative at t = {t:e} s (state {state:?})")]
    NonFinite { t: f64, state: Vec<f64> },
    #[error("invalid bridge gate combination {0:?}")]
    GateInvariant([bool; 4]),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Post-processing failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("trace too short: {have:.6} s available, {need:.6} s required")]
    TraceTooShort { have: f64, need: f64 },
    #[error("window of {samples} samples at dt = {dt:e} s is not an integer number of {f0} Hz periods")]
    NonIntegerPeriods { samples: usize, dt: f64, f0: f64 },
    #[error("empty analysis window")]
    EmptyWindow,
    #[error("duty ratio {0} outside (0,1)")]
    DutyDomain(f64),
    #[error("mean input power {0} W is not positive")]
    NoInputPower(f64),
    #[error("trace has no column `{0}`")]
    MissingColumn(String),
    #[error("malformed trace: {0}")]
    Malformed(String),
}

/// Top-level error for scenario runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
