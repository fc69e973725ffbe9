//! Scenario configuration: TOML key tree, layered overrides and validation.
//!
//! Resolution order is built-in defaults (the `paper-tables` profile), then
//! the config file, then the file's own `overrides` list, then command-line
//! `--set key=value` pairs. Any key that does not exist in the default tree
//! is rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::engine::SolverConfig;
use crate::error::ConfigError;
use crate::inverter::InverterParams;
use crate::source::{PmsgParams, WaveParams};
use crate::zeta::ZetaParams;

/// Name of the built-in default profile.
pub const DEFAULT_PROFILE: &str = "paper-tables";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    FullChain,
    ZetaOnly,
    InverterOnly,
    SourceOnly,
    DutySweep,
}

impl Scenario {
    pub fn has_source(self) -> bool {
        matches!(self, Scenario::FullChain | Scenario::SourceOnly)
    }

    pub fn has_zeta(self) -> bool {
        matches!(self, Scenario::FullChain | Scenario::ZetaOnly)
    }

    pub fn has_inverter(self) -> bool {
        matches!(self, Scenario::FullChain | Scenario::InverterOnly)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::FullChain => "full_chain",
            Scenario::ZetaOnly => "zeta_only",
            Scenario::InverterOnly => "inverter_only",
            Scenario::SourceOnly => "source_only",
            Scenario::DutySweep => "duty_sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Scenario::FullChain,
            Scenario::ZetaOnly,
            Scenario::InverterOnly,
            Scenario::SourceOnly,
            Scenario::DutySweep,
        ]
        .into_iter()
        .find(|sc| sc.name() == s)
    }
}

/// Ideal sources used by the stage-isolated scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StageInputs {
    /// Fixed Zeta input voltage for `zeta_only`, V.
    pub vs: f64,
    /// Fixed DC bus voltage for `inverter_only`, V.
    pub vdc: f64,
}

impl Default for StageInputs {
    fn default() -> Self {
        Self { vs: 30.0, vdc: 120.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Analytic,
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub d_values: Vec<f64>,
    pub mode: SweepMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d_values: (1..=9).map(|i| f64::from(i) / 10.0).collect(),
            mode: SweepMode::Analytic,
        }
    }
}

/// Where input power is measured for the efficiency figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerBoundary {
    /// Rectifier output, i.e. Zeta input terminals.
    ZetaInput,
    /// Generator EMF, so stator copper loss counts against efficiency.
    PmsgTerminals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Per-period mean drift tolerated by the settling check.
    pub settle_tol: f64,
    pub n_harmonics: usize,
    pub power_boundary: PowerBoundary,
    /// Steady-state window length in fundamental periods.
    pub window_periods: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            settle_tol: 0.01,
            n_harmonics: 50,
            power_boundary: PowerBoundary::ZetaInput,
            window_periods: 2,
        }
    }
}

/// Everything needed for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub output_dir: String,
    /// `key=value` overrides applied after the file body.
    pub overrides: Vec<String>,
    pub wave: WaveParams,
    pub pmsg: PmsgParams,
    pub zeta: ZetaParams,
    pub inverter: InverterParams,
    pub solver: SolverConfig,
    pub stage: StageInputs,
    pub sweep: SweepConfig,
    pub analysis: AnalysisConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::FullChain,
            output_dir: "out".to_string(),
            overrides: Vec::new(),
            wave: WaveParams::default(),
            pmsg: PmsgParams::default(),
            zeta: ZetaParams::default(),
            inverter: InverterParams::default(),
            solver: SolverConfig::default(),
            stage: StageInputs::default(),
            sweep: SweepConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Resolve a config from TOML text plus command-line overrides.
    pub fn from_toml_str(text: &str, cli_overrides: &[String]) -> Result<Self, ConfigError> {
        let file: Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let defaults = default_tree();
        check_known_keys(&file, &defaults, "")?;

        let mut merged = defaults.clone();
        merge(&mut merged, &file);

        let mut applied: Vec<String> = match merged.get("overrides") {
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.clone()),
                    other => Err(ConfigError::BadOverride(other.to_string())),
                })
                .collect::<Result<_, _>>()?,
            _ => Vec::new(),
        };
        for raw in &applied {
            apply_override(&mut merged, &defaults, raw)?;
        }
        for raw in cli_overrides {
            apply_override(&mut merged, &defaults, raw)?;
            if !applied.contains(raw) {
                applied.push(raw.clone());
            }
        }
        merged.insert(
            "overrides".into(),
            Value::Array(applied.into_iter().map(Value::String).collect()),
        );

        let cfg: ScenarioConfig = Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fully resolved values as TOML; loading this text yields the same config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the resolved TOML echo.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Check every sub-config invariant; errors name the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let w = &self.wave;
        positive("wave.H", w.height)?;
        positive("wave.T", w.period)?;
        finite("wave.Kgc", w.kgc)?;
        finite("wave.k", w.wave_number)?;
        positive("wave.omega_m0", w.omega_m0)?;
        if !(0.0..1.0).contains(&w.mod_depth) {
            return Err(ConfigError::constraint("wave.mod_depth", "must lie in [0,1)"));
        }

        let p = &self.pmsg;
        positive("pmsg.Rph", p.rph)?;
        positive("pmsg.La", p.la)?;
        positive("pmsg.lambda", p.flux_linkage)?;
        if p.pole_pairs == 0 {
            return Err(ConfigError::constraint("pmsg.pole_pairs", "must be a positive integer"));
        }

        let z = &self.zeta;
        positive("zeta.L1", z.l1)?;
        positive("zeta.L2", z.l2)?;
        positive("zeta.C1", z.c1)?;
        positive("zeta.C2", z.c2)?;
        positive("zeta.fs", z.fs)?;
        if !(z.duty > 0.0 && z.duty < 1.0) {
            return Err(ConfigError::constraint("zeta.D", "must lie in (0,1)"));
        }
        non_negative("zeta.Ron", z.ron)?;
        non_negative("zeta.Vf", z.vf)?;

        let i = &self.inverter;
        if !(0.0..=1.0).contains(&i.modulation_index) {
            return Err(ConfigError::constraint("inverter.M", "must lie in [0,1]"));
        }
        positive("inverter.f_out", i.f_out)?;
        positive("inverter.f_carrier", i.f_carrier)?;
        if i.f_carrier < 20.0 * i.f_out {
            return Err(ConfigError::constraint("inverter.f_carrier", "must be at least 20 * f_out"));
        }
        positive("inverter.Lf", i.lf)?;
        positive("inverter.Cf", i.cf)?;
        positive("inverter.Rload", i.rload)?;

        let s = &self.solver;
        positive("solver.dt", s.dt)?;
        if s.t_end.is_nan() || s.t_end <= s.dt {
            return Err(ConfigError::constraint("solver.t_end", "must exceed solver.dt"));
        }
        if s.record_every == 0 {
            return Err(ConfigError::constraint("solver.record_every", "must be >= 1"));
        }
        if !(s.t_record_start >= 0.0 && s.t_record_start < s.t_end) {
            return Err(ConfigError::constraint("solver.t_record_start", "must lie in [0, t_end)"));
        }

        non_negative("stage.vs", self.stage.vs)?;
        non_negative("stage.vdc", self.stage.vdc)?;

        if self.scenario == Scenario::DutySweep && self.sweep.d_values.is_empty() {
            return Err(ConfigError::constraint("sweep.d_values", "must not be empty"));
        }
        for d in &self.sweep.d_values {
            if !(*d > 0.0 && *d < 1.0) {
                return Err(ConfigError::constraint("sweep.d_values", "every entry must lie in (0,1)"));
            }
        }

        let a = &self.analysis;
        positive("analysis.settle_tol", a.settle_tol)?;
        if a.n_harmonics < 2 {
            return Err(ConfigError::constraint("analysis.n_harmonics", "must be >= 2"));
        }
        if a.window_periods == 0 {
            return Err(ConfigError::constraint("analysis.window_periods", "must be >= 1"));
        }
        Ok(())
    }

    /// Switching periods every step-size candidate must divide. Includes the
    /// Q1 on-time so the trailing PWM edge lands on the grid.
    pub fn grid_periods(&self) -> Vec<f64> {
        let mut periods = Vec::new();
        if self.scenario.has_zeta() {
            periods.push(1.0 / self.zeta.fs);
            periods.push(self.zeta.duty / self.zeta.fs);
        }
        if self.scenario.has_inverter() {
            periods.push(1.0 / self.inverter.f_carrier);
        }
        periods.push(1.0 / self.inverter.f_out);
        periods
    }
}

/// Load and resolve a config file; `None` means defaults only.
pub fn load_config(path: Option<&Path>, cli_overrides: &[String]) -> crate::Result<ScenarioConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| crate::Error::Io {
            path: p.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    Ok(ScenarioConfig::from_toml_str(&text, cli_overrides)?)
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::constraint(key, "must be finite and > 0"))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::constraint(key, "must be finite and >= 0"))
    }
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::constraint(key, "must be finite"))
    }
}

fn default_tree() -> Table {
    match Value::try_from(ScenarioConfig::default()).expect("defaults serialize") {
        Value::Table(t) => t,
        _ => unreachable!("config serializes to a table"),
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn check_known_keys(given: &Table, known: &Table, prefix: &str) -> Result<(), ConfigError> {
    for (k, v) in given {
        let path = join(prefix, k);
        match (v, known.get(k)) {
            (_, None) => return Err(ConfigError::UnknownKey(path)),
            (Value::Table(sub), Some(Value::Table(ksub))) => check_known_keys(sub, ksub, &path)?,
            (Value::Table(_), Some(_)) => return Err(ConfigError::UnknownKey(path)),
            _ => {}
        }
    }
    Ok(())
}

fn merge(into: &mut Table, from: &Table) {
    for (k, v) in from {
        match (into.get_mut(k), v) {
            (Some(Value::Table(dst)), Value::Table(src)) => merge(dst, src),
            _ => {
                into.insert(k.clone(), v.clone());
            }
        }
    }
}

/// Parse the right-hand side of `--set`, coerced to the type of the default.
fn parse_override_value(raw: &str, template: &Value) -> Value {
    let parsed = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    match (template, parsed) {
        (Value::Float(_), Value::Integer(i)) => Value::Float(i as f64),
        (Value::Array(_), Value::Array(items)) => Value::Array(
            items
                .into_iter()
                .map(|v| match v {
                    Value::Integer(i) => Value::Float(i as f64),
                    other => other,
                })
                .collect(),
        ),
        (_, v) => v,
    }
}

fn apply_override(tree: &mut Table, defaults: &Table, raw: &str) -> Result<(), ConfigError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride(raw.to_string()))?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::BadOverride(raw.to_string()));
    }

    let mut known = defaults;
    let mut node = tree;
    for part in &parts[..parts.len() - 1] {
        known = match known.get(*part) {
            Some(Value::Table(t)) => t,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        };
        node = match node.get_mut(*part) {
            Some(Value::Table(t)) => t,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        };
    }
    let leaf = parts[parts.len() - 1];
    let template = match known.get(leaf) {
        Some(Value::Table(_)) | None => return Err(ConfigError::UnknownKey(key.to_string())),
        Some(v) => v,
    };
    node.insert(leaf.to_string(), parse_override_value(value.trim(), template));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_table_values() {
        let cfg = ScenarioConfig::from_toml_str("", &[]).unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.wave.height, 1.0);
        assert_eq!(cfg.wave.period, 10.0);
        assert_eq!(cfg.wave.kgc, 1.5);
        assert_eq!(cfg.wave.wave_number, 0.408);
        assert_eq!(cfg.pmsg.rph, 0.0484);
        assert_eq!(cfg.pmsg.la, 3.95e-4);
        assert_eq!(cfg.pmsg.flux_linkage, 0.1194);
        assert_eq!(cfg.pmsg.pole_pairs, 8);
        assert_eq!((cfg.zeta.l1, cfg.zeta.l2), (1.6e-3, 1.6e-3));
        assert_eq!((cfg.zeta.c1, cfg.zeta.c2), (0.159e-6, 4e-4));
        assert_eq!((cfg.zeta.duty, cfg.zeta.fs), (0.697, 1e5));
        let i = &cfg.inverter;
        assert_eq!((i.modulation_index, i.f_out, i.f_carrier), (1.0, 50.0, 1e5));
        assert_eq!((i.lf, i.cf, i.rload), (3e-3, 20e-6, 15.0));
    }

    #[test]
    fn out_of_range_duty_names_key() {
        let err = ScenarioConfig::from_toml_str("", &["zeta.D=1.2".into()]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("zeta.D") && msg.contains("(0,1)"), "{msg}");
    }

    #[test]
    fn cli_overrides_file() {
        let cfg = ScenarioConfig::from_toml_str("[zeta]\nD = 0.697\n", &["zeta.D=0.8".into()]).unwrap();
        assert_eq!(cfg.zeta.duty, 0.8);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ScenarioConfig::from_toml_str("[zeta]\nDuty = 0.5\n", &[]).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("zeta.Duty".into()));
        let err = ScenarioConfig::from_toml_str("bogus = 1\n", &[]).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("bogus".into()));
        let err = ScenarioConfig::from_toml_str("", &["inverter.X=3".into()]).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("inverter.X".into()));
        let err = ScenarioConfig::from_toml_str("", &["zeta=3".into()]).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("zeta".into()));
    }

    #[test]
    fn override_coercions() {
        let cfg = ScenarioConfig::from_toml_str(
            "",
            &[
                "inverter.Rload=10".into(),
                "scenario=zeta_only".into(),
                "sweep.d_values=[0.25, 0.5]".into(),
                "solver.record_every=5".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.inverter.rload, 10.0);
        assert_eq!(cfg.scenario, Scenario::ZetaOnly);
        assert_eq!(cfg.sweep.d_values, vec![0.25, 0.5]);
        assert_eq!(cfg.solver.record_every, 5);
        assert!(cfg.overrides.contains(&"inverter.Rload=10".to_string()));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = ScenarioConfig::from_toml_str("[zeta]\nD = 0.6\n", &["zeta.C1=1e-6".into()]).unwrap();
        let again = ScenarioConfig::from_toml_str(&cfg.to_toml(), &[]).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.digest(), again.digest());
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            ScenarioConfig::from_toml_str("[zeta", &[]),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_toml_str("", &["zeta.D".into()]),
            Err(ConfigError::BadOverride(_))
        ));
        let err = ScenarioConfig::from_toml_str("", &["inverter.M=1.5".into()]).unwrap_err();
        assert!(err.to_string().contains("inverter.M"));
        let err = ScenarioConfig::from_toml_str("", &["wave.mod_depth=1.0".into(), "wave.speed_mode=wave_modulated".into()]).unwrap_err();
        assert!(err.to_string().contains("wave.mod_depth"));
    }
}
