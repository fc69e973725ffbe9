//! Transient simulation of a wave-driven PMSG feeding a six-pulse rectifier,
//! a Zeta DC-DC boost stage and a bipolar SPWM H-bridge inverter with an LC
//! filter and resistive load.
//!
//! ```
//! use wecsim_core::{zeta_dc_gain, ScenarioConfig};
//!
//! let cfg = ScenarioConfig::from_toml_str("[zeta]\nD = 0.8\n", &[]).unwrap();
//! assert!((zeta_dc_gain(cfg.zeta.duty).unwrap() - 4.0).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod config;
pub mod engine;
pub mod error;
pub mod inverter;
pub mod report;
pub mod scenario;
pub mod source;
pub mod trace;
pub mod zeta;

pub use analysis::{
    basic_stats, duty_sweep, efficiency, energy_audit, fft_spectrum, steady_window, summarize, HarmonicSpectrum,
    Stats, SweepRow, Window,
};
pub use config::{load_config, Scenario, ScenarioConfig, SweepMode};
pub use engine::{align_dt, integrate, rk4_step, CircuitState, SimRun, SolverConfig};
pub use error::{AnalysisError, ConfigError, Error, Result, SimError};
pub use inverter::{InverterParams, Modulation};
pub use report::{SummaryReport, Warning};
pub use scenario::{run, RunManifest, RunOutcome};
pub use source::{PmsgParams, SpeedMode, WaveParams};
pub use trace::{Signal, WaveformTrace};
pub use zeta::{boost_dc_gain, zeta_dc_gain, ZetaParams};
