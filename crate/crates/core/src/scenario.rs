//! Scenario orchestration and file emission.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, duty_sweep, sweep_csv, SweepRow};
use crate::config::{Scenario, ScenarioConfig, SweepMode};
use crate::engine;
use crate::error::{Error, Result, SimError};
use crate::report::{SummaryReport, Warning};
use crate::trace::{Signal, WaveformTrace};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const NOT_SETTLED: i32 = 4;
}

/// Exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Sim(SimError::Config(_)) => exit::CONFIG,
        Error::Sim(_) | Error::Analysis(_) => exit::NUMERICAL,
        Error::Io { .. } => exit::IO,
    }
}

/// Record of one run, written last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub scenario: String,
    /// SHA-256 of the input config file bytes (empty input when none).
    pub input_digest: String,
    /// SHA-256 of `config`.
    pub config_digest: String,
    /// Fully resolved config as TOML; loading it reproduces `config_digest`.
    pub config: String,
    pub files: Vec<String>,
    pub warnings: Vec<Warning>,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Option<SummaryReport>,
    pub sweep: Option<Vec<SweepRow>>,
    pub manifest: RunManifest,
    pub exit_code: i32,
}

pub fn input_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Per-figure column sets: file stem and the signals it carries.
const FIGURES: &[(&str, &[Signal])] = &[
    ("fig07_pmsg_voltage", &[Signal::Ea, Signal::Eb, Signal::Ec]),
    ("fig08_rectifier_output", &[Signal::VRect]),
    ("fig09_zeta_output", &[Signal::VZetaOut]),
    ("fig10_diode_voltage", &[Signal::VDiode]),
    ("fig11_il2_current", &[Signal::IL2]),
    ("fig12_il1_current", &[Signal::IL1]),
    ("fig13_switch_voltage", &[Signal::VSwQ1]),
    ("fig14_inverter_voltage_unfiltered", &[Signal::VInvRaw]),
    ("fig15_inverter_current_unfiltered", &[Signal::IInvRaw]),
    ("fig16_load_current", &[Signal::ILoad]),
    ("fig17_s1_voltage", &[Signal::VSwS1]),
    ("fig18_load_voltage", &[Signal::VLoad]),
];

fn figure_applies(stem: &str, sc: Scenario) -> bool {
    match &stem[..5] {
        "fig07" | "fig08" => sc.has_source() || (sc.has_zeta() && stem.starts_with("fig08")),
        "fig09" | "fig10" | "fig11" | "fig12" | "fig13" => sc.has_zeta(),
        _ => sc.has_inverter(),
    }
}

/// Collects written files so an aborted run can clean up after itself.
struct Emitter {
    dir: PathBuf,
    files: Vec<String>,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn remove_all(&self) {
        for f in &self.files {
            let _ = std::fs::remove_file(self.dir.join(f));
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Run `cfg` and write all outputs into `out_dir`.
///
/// On any error every file this run wrote is removed. A run that completes
/// but does not settle still writes its outputs and reports exit code 4.
pub fn run(cfg: &ScenarioConfig, out_dir: &Path, input_digest: &str) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut em = Emitter::new(out_dir)?;
    match emit(cfg, &mut em, input_digest) {
        Ok(outcome) => Ok(outcome),
        Err(e) => {
            em.remove_all();
            Err(e)
        }
    }
}

fn emit(cfg: &ScenarioConfig, em: &mut Emitter, input_digest: &str) -> Result<RunOutcome> {
    let (summary, sweep, mut warnings) = if cfg.scenario == Scenario::DutySweep {
        let rows = duty_sweep(&cfg.sweep.d_values, cfg, cfg.sweep.mode)?;
        let mut warnings = vec![Warning::boost_ordering()];
        for r in &rows {
            if let Some(e) = &r.error {
                warnings.push(Warning::sweep_point_failed(r.duty, e));
            }
        }
        em.write("fig19a_gain_sweep.csv", &sweep_csv(&rows))?;
        em.write("sweep.json", &to_json(&rows))?;
        (None, Some(rows), warnings)
    } else {
        let run = engine::integrate(cfg)?;
        let summary = analysis::summarize(cfg, &run)?;
        write_trace_files(cfg, &run.trace, em)?;
        if cfg.scenario.has_zeta() {
            let rows = duty_sweep(&cfg.sweep.d_values, cfg, SweepMode::Analytic)?;
            em.write("fig19a_gain_sweep.csv", &sweep_csv(&rows))?;
        }
        em.write("summary.json", &to_json(&summary))?;
        let warnings = summary.warnings.clone();
        (Some(summary), None, warnings)
    };
    warnings.dedup();

    let config = cfg.to_toml();
    em.write("resolved_config.toml", &config)?;
    let mut files = em.files.clone();
    files.push("manifest.json".into());
    let manifest = RunManifest {
        version: VERSION.to_string(),
        scenario: cfg.scenario.name().to_string(),
        input_digest: input_digest.to_string(),
        config_digest: cfg.digest(),
        config,
        files,
        warnings,
    };
    em.write("manifest.json", &to_json(&manifest))?;

    let exit_code = match &summary {
        Some(s) if !s.settled => exit::NOT_SETTLED,
        _ => exit::OK,
    };
    Ok(RunOutcome {
        summary,
        sweep,
        manifest,
        exit_code,
    })
}

fn write_trace_files(cfg: &ScenarioConfig, trace: &WaveformTrace, em: &mut Emitter) -> Result<()> {
    em.write("trace.csv", &trace.to_csv())?;
    for (stem, signals) in FIGURES {
        if figure_applies(stem, cfg.scenario) {
            em.write(&format!("{stem}.csv"), &trace.to_csv_columns(signals))?;
        }
    }
    if cfg.scenario.has_inverter() {
        let a = &cfg.analysis;
        let f0 = cfg.inverter.f_out;
        let w = analysis::steady_window(trace, Signal::VLoad, f0, a.window_periods, a.settle_tol)?;
        let i = analysis::window_spectrum(trace, Signal::ILoad, &w, f0, a.n_harmonics)?;
        let v = analysis::window_spectrum(trace, Signal::VLoad, &w, f0, a.n_harmonics)?;
        em.write("fig19b_load_current_harmonics.csv", &i.to_csv("A"))?;
        em.write("fig19c_load_voltage_harmonics.csv", &v.to_csv("V"))?;
    }
    Ok(())
}

/// Re-run the analysis on a stored trace.
pub fn analyze_trace(cfg: &ScenarioConfig, trace_csv: &str) -> Result<SummaryReport> {
    let trace = WaveformTrace::from_csv(trace_csv)?;
    let dcm = trace.get(Signal::Dcm).iter().filter(|&&d| d != 0.0).count() as u64;
    Ok(analysis::summarize_trace(cfg, &trace, None, dcm, Vec::new())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_selection() {
        assert!(figure_applies("fig07_pmsg_voltage", Scenario::FullChain));
        assert!(!figure_applies("fig07_pmsg_voltage", Scenario::ZetaOnly));
        assert!(figure_applies("fig08_rectifier_output", Scenario::ZetaOnly));
        assert!(!figure_applies("fig18_load_voltage", Scenario::ZetaOnly));
        assert!(figure_applies("fig18_load_voltage", Scenario::InverterOnly));
        assert!(!figure_applies("fig13_switch_voltage", Scenario::SourceOnly));
    }

    #[test]
    fn exit_codes() {
        let cfg_err = Error::Config(crate::error::ConfigError::UnknownKey("x".into()));
        assert_eq!(exit_code(&cfg_err), exit::CONFIG);
        let sim = Error::Sim(SimError::NonFinite { t: 0.0, state: vec![] });
        assert_eq!(exit_code(&sim), exit::NUMERICAL);
    }

    #[test]
    fn sweep_run_writes_manifest_last() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig {
            scenario: Scenario::DutySweep,
            ..ScenarioConfig::default()
        };
        let out = run(&cfg, dir.path(), &input_digest(b"")).unwrap();
        assert_eq!(out.exit_code, exit::OK);
        assert_eq!(out.manifest.files.last().unwrap(), "manifest.json");
        for f in &out.manifest.files {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        assert!(out.manifest.warnings.iter().any(|w| w.code == "boost_ordering"));
    }
}
