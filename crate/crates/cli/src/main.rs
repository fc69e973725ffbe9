use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wecsim_core::scenario::{self, exit};
use wecsim_core::{Error, ScenarioConfig};

/// Output directory used when `--out` is not given.
const OUT_DIR_ENV: &str = "WECSIM_OUT_DIR";

#[derive(Parser)]
#[command(name = "wecsim", version, about = "Wave-energy PMSG, Zeta boost and H-bridge inverter simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace, summary, figure data and manifest.
    Run(Common),
    /// Tabulate Zeta and boost gain versus duty ratio.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Recompute the summary from an existing trace CSV.
    Analyze {
        trace: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print the resolved configuration.
    PrintConfig(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config file; defaults apply to anything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set zeta.D=0.8 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "t-end", value_name = "SECONDS")]
    t_end: Option<f64>,
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    #[arg(long)]
    scenario: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Analytic,
    Simulated,
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut o = self.set.clone();
        if let Some(s) = &self.scenario {
            o.push(format!("scenario=\"{s}\""));
        }
        if let Some(t) = self.t_end {
            o.push(format!("solver.t_end={t:?}"));
        }
        if let Some(dt) = self.dt {
            o.push(format!("solver.dt={dt:?}"));
        }
        o
    }

    fn load(&self, extra: &[String]) -> Result<(ScenarioConfig, String), Error> {
        let mut overrides = self.overrides();
        overrides.extend_from_slice(extra);
        let bytes = match &self.config {
            Some(p) => std::fs::read(p).map_err(|source| Error::Io {
                path: p.display().to_string(),
                source,
            })?,
            None => Vec::new(),
        };
        let text = String::from_utf8_lossy(&bytes);
        let cfg = ScenarioConfig::from_toml_str(&text, &overrides)?;
        Ok((cfg, scenario::input_digest(&bytes)))
    }

    fn out_dir(&self, cfg: &ScenarioConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(&cfg.output_dir))
    }
}

fn run_and_report(common: &Common, extra: &[String]) -> Result<i32, Error> {
    let (cfg, digest) = common.load(extra)?;
    let dir = common.out_dir(&cfg);
    let outcome = scenario::run(&cfg, &dir, &digest)?;
    for w in &outcome.manifest.warnings {
        eprintln!("warning [{}]: {}", w.code, w.message);
    }
    if let Some(s) = &outcome.summary {
        println!("{}", serde_json::to_string_pretty(s).expect("summary serializes"));
    }
    eprintln!(
        "wrote {} files to {}",
        outcome.manifest.files.len(),
        dir.display()
    );
    Ok(outcome.exit_code)
}

fn analyze(trace: &Path, common: &Common) -> Result<i32, Error> {
    let (cfg, _) = common.load(&[])?;
    let text = std::fs::read_to_string(trace).map_err(|source| Error::Io {
        path: trace.display().to_string(),
        source,
    })?;
    let summary = scenario::analyze_trace(&cfg, &text)?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(dir.join("summary.json"), format!("{json}\n")))
            .map_err(|source| Error::Io {
                path: dir.display().to_string(),
                source,
            })?;
    }
    println!("{json}");
    Ok(if summary.settled { exit::OK } else { exit::NOT_SETTLED })
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run(common) => run_and_report(&common, &[]),
        Command::Sweep { common, mode } => {
            let mut extra = vec!["scenario=\"duty_sweep\"".to_string()];
            if let Some(m) = mode {
                let name = match m {
                    Mode::Analytic => "analytic",
                    Mode::Simulated => "simulated",
                };
                extra.push(format!("sweep.mode=\"{name}\""));
            }
            run_and_report(&common, &extra)
        }
        Command::Analyze { trace, common } => analyze(&trace, &common),
        Command::PrintConfig(common) => {
            let (cfg, _) = common.load(&[])?;
            print!("{}", cfg.to_toml());
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            scenario::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
