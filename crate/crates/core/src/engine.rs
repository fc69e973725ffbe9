//! Fixed-step RK4 integration of the switched circuit with switching edges
//! aligned to the step grid.
//!
//! Switch, gate and diode states are sampled at the start of each step and
//! held for the whole step. The step size is chosen so every switching
//! period (and the Q1 on-time) is an integer number of steps, which keeps
//! PWM edges on grid points.

use serde::{Deserialize, Serialize};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::{ConfigError, SimError};
use crate::inverter::{self, BridgeGates};
use crate::report::Warning;
use crate::source;
use crate::trace::{Signal, WaveformTrace, SIGNAL_COUNT};
use crate::zeta::{self, ZetaMode};

/// Step-size and recording settings.
///
/// `record_every` is a decimation factor relative to the requested `dt`; when
/// alignment shrinks the step, decimation is scaled so the recorded spacing
/// stays close to `dt * record_every` while still dividing the fundamental
/// period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub t_record_start: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-7,
            t_end: 0.3,
            record_every: 10,
            t_record_start: 0.0,
        }
    }
}

/// Complete continuous state of the circuit plus the freewheel diode flag.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CircuitState {
    pub i_l1: f64,
    pub i_l2: f64,
    pub v_c1: f64,
    pub v_c2: f64,
    pub i_lf: f64,
    pub v_cf: f64,
    /// PMSG electrical angle, wrapped into [0, 2π).
    pub theta_e: f64,
    pub diode_conducting: bool,
}

/// Number of integrated quantities: six circuit states, the rotor angle and
/// three energy accumulators.
const N: usize = 10;
type Vector = [f64; N];

const E_IN: usize = 7;
const E_OUT: usize = 8;
const E_SRC: usize = 9;

impl CircuitState {
    fn to_vector(self) -> Vector {
        [
            self.i_l1, self.i_l2, self.v_c1, self.v_c2, self.i_lf, self.v_cf, self.theta_e, 0.0, 0.0, 0.0,
        ]
    }

    fn from_vector(x: &Vector, diode_conducting: bool) -> Self {
        Self {
            i_l1: x[0],
            i_l2: x[1],
            v_c1: x[2],
            v_c2: x[3],
            i_lf: x[4],
            v_cf: x[5],
            theta_e: x[6],
            diode_conducting,
        }
    }
}

/// Magnetic plus electric energy stored in all reactive elements, J.
pub fn stored_energy(cfg: &ScenarioConfig, s: &CircuitState) -> f64 {
    let z = &cfg.zeta;
    let inv = &cfg.inverter;
    0.5 * (z.l1 * s.i_l1 * s.i_l1
        + z.l2 * s.i_l2 * s.i_l2
        + z.c1 * s.v_c1 * s.v_c1
        + z.c2 * s.v_c2 * s.v_c2
        + inv.lf * s.i_lf * s.i_lf
        + inv.cf * s.v_cf * s.v_cf)
}

const TICKS_PER_SECOND: f64 = 1e12;
const ALIGN_REL_TOL: f64 = 1e-9;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Largest step ≤ `dt_requested` that divides every period.
///
/// Candidates live on a 1 ps grid, so the result is also exactly
/// representable as an integer tick count.
pub fn align_dt(dt_requested: f64, periods: &[f64]) -> Result<f64, ConfigError> {
    let fail = || ConfigError::NoValidStep {
        requested: dt_requested,
        periods: periods.to_vec(),
    };
    if !(dt_requested.is_finite() && dt_requested > 0.0) {
        return Err(fail());
    }
    let max_ticks = (dt_requested * TICKS_PER_SECOND * (1.0 + ALIGN_REL_TOL)).floor();
    if max_ticks < 1.0 {
        return Err(fail());
    }
    let max_ticks = max_ticks as u64;

    let mut g = 0u64;
    for &p in periods {
        if !(p.is_finite() && p > 0.0) {
            return Err(fail());
        }
        let ticks = (p * TICKS_PER_SECOND).round();
        if !(1.0..=9.0e18).contains(&ticks) || ((ticks / TICKS_PER_SECOND - p) / p).abs() > ALIGN_REL_TOL {
            return Err(fail());
        }
        g = gcd(g, ticks as u64);
    }
    if g == 0 {
        return Ok(dt_requested);
    }
    if g <= max_ticks {
        return Ok(g as f64 / TICKS_PER_SECOND);
    }
    let mut best = 1u64;
    let mut d = 1u64;
    while d * d <= g {
        if g.is_multiple_of(d) {
            let q = g / d;
            if d <= max_ticks {
                best = best.max(d);
            }
            if q <= max_ticks {
                best = best.max(q);
            }
        }
        d += 1;
    }
    Ok(best as f64 / TICKS_PER_SECOND)
}

/// One classical fourth-order Runge–Kutta step.
///
/// Any non-finite stage derivative aborts with the time and state.
pub fn rk4_step<const M: usize, F>(mut derivs: F, x: &[f64; M], t: f64, dt: f64) -> Result<[f64; M], SimError>
where
    F: FnMut(f64, &[f64; M]) -> [f64; M],
{
    let check = |k: &[f64; M], tk: f64| -> Result<(), SimError> {
        if k.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(SimError::NonFinite { t: tk, state: x.to_vec() })
        }
    };
    let offset = |k: &[f64; M], h: f64| -> [f64; M] { std::array::from_fn(|i| x[i] + h * k[i]) };

    let k1 = derivs(t, x);
    check(&k1, t)?;
    let k2 = derivs(t + 0.5 * dt, &offset(&k1, 0.5 * dt));
    check(&k2, t + 0.5 * dt)?;
    let k3 = derivs(t + 0.5 * dt, &offset(&k2, 0.5 * dt));
    check(&k3, t + 0.5 * dt)?;
    let k4 = derivs(t + dt, &offset(&k3, dt));
    check(&k4, t + dt)?;

    Ok(std::array::from_fn(|i| {
        x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Switch states frozen over one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switches {
    pub gate_q1: bool,
    pub diode: bool,
    pub bridge: BridgeGates,
}

impl Switches {
    fn zeta_mode(&self) -> ZetaMode {
        ZetaMode::from_switches(self.gate_q1, self.diode)
    }
}

/// Instantaneous electrical quantities for a given state and switch set.
#[derive(Debug, Clone, Copy)]
struct OperatingPoint {
    emf: (f64, f64, f64),
    omega_e: f64,
    envelope: f64,
    v_rect: f64,
    i_in: f64,
    nodes: zeta::ZetaNodes,
    vdc: f64,
    vab: f64,
    i_inv: f64,
    i_out: f64,
    p_load: f64,
}

/// The composed source → Zeta → inverter system for one scenario.
struct Plant<'a> {
    cfg: &'a ScenarioConfig,
    scenario: Scenario,
}

impl<'a> Plant<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Self {
        Self {
            cfg,
            scenario: cfg.scenario,
        }
    }

    fn switches(&self, t: f64, s: &CircuitState) -> Switches {
        let z = &self.cfg.zeta;
        let gate_q1 = self.scenario.has_zeta() && zeta::pwm_gate(t, z.fs, z.duty);
        let diode = self.scenario.has_zeta() && zeta::resolve_diode(s, gate_q1);
        let bridge = if self.scenario.has_inverter() {
            inverter::spwm_gates(t, &self.cfg.inverter)
        } else {
            BridgeGates { s1: false, s2: true, s3: false, s4: true }
        };
        Switches { gate_q1, diode, bridge }
    }

    fn operating_point(&self, t: f64, s: &CircuitState, sw: &Switches) -> Result<OperatingPoint, SimError> {
        let cfg = self.cfg;
        let sc = self.scenario;
        let i_in = if sc.has_zeta() && sw.gate_q1 { s.i_l1 + s.i_l2 } else { 0.0 };

        let (emf, omega_e, envelope, v_rect) = if sc.has_source() {
            let omega_e = source::electrical_speed(t, &cfg.wave, &cfg.pmsg);
            let (ea, eb, ec) = source::pmsg_emf(s.theta_e, omega_e, &cfg.pmsg);
            let v_rect = source::rectifier_output(ea, eb, ec, i_in, &cfg.pmsg);
            ((ea, eb, ec), omega_e, source::bridge_envelope(ea, eb, ec), v_rect)
        } else if sc.has_zeta() {
            ((0.0, 0.0, 0.0), 0.0, cfg.stage.vs, cfg.stage.vs)
        } else {
            ((0.0, 0.0, 0.0), 0.0, 0.0, 0.0)
        };

        let nodes = zeta::zeta_nodes(s, v_rect, sw.zeta_mode(), &cfg.zeta);
        let vdc = if sc == Scenario::InverterOnly { cfg.stage.vdc } else { s.v_c2 };

        let (vab, i_inv) = if sc.has_inverter() {
            (
                inverter::hbridge_voltage(vdc, sw.bridge)?,
                inverter::inverter_input_current(sw.bridge, s.i_lf)?,
            )
        } else {
            (0.0, 0.0)
        };

        let rload = cfg.inverter.rload;
        let (i_out, p_load) = match sc {
            Scenario::FullChain => (i_inv, s.v_cf * s.v_cf / rload),
            Scenario::ZetaOnly => (s.v_c2 / rload, s.v_c2 * s.v_c2 / rload),
            Scenario::InverterOnly => (0.0, s.v_cf * s.v_cf / rload),
            Scenario::SourceOnly | Scenario::DutySweep => (0.0, 0.0),
        };

        Ok(OperatingPoint {
            emf,
            omega_e,
            envelope,
            v_rect,
            i_in,
            nodes,
            vdc,
            vab,
            i_inv,
            i_out,
            p_load,
        })
    }

    fn derivs(&self, t: f64, x: &Vector, sw: &Switches) -> Result<Vector, SimError> {
        let s = CircuitState::from_vector(x, sw.diode);
        let op = self.operating_point(t, &s, sw)?;
        let mut dx = [0.0; N];
        let sc = self.scenario;
        if sc.has_zeta() {
            let d = zeta::zeta_derivs(&s, op.v_rect, sw.gate_q1, &self.cfg.zeta, op.i_out);
            dx[0] = d.di_l1;
            dx[1] = d.di_l2;
            dx[2] = d.dv_c1;
            dx[3] = d.dv_c2;
        }
        if sc.has_inverter() {
            let (di, dv) = inverter::filter_derivs(s.i_lf, s.v_cf, op.vab, &self.cfg.inverter);
            dx[4] = di;
            dx[5] = dv;
        }
        dx[6] = op.omega_e;
        let p_in = if sc == Scenario::InverterOnly {
            op.vdc * op.i_inv
        } else {
            op.v_rect * op.i_in
        };
        dx[E_IN] = p_in;
        dx[E_OUT] = op.p_load;
        dx[E_SRC] = if sc.has_source() { op.envelope * op.i_in } else { p_in };
        Ok(dx)
    }

    /// Signal values at an instant, except the interval-averaged power and
    /// DCM columns which the recorder fills in.
    fn observe(&self, t: f64, x: &Vector, sw: &Switches) -> Result<[f64; SIGNAL_COUNT], SimError> {
        let s = CircuitState::from_vector(x, sw.diode);
        let op = self.operating_point(t, &s, sw)?;
        let has_zeta = self.scenario.has_zeta();
        let has_inv = self.scenario.has_inverter();
        let mut row = [0.0; SIGNAL_COUNT];
        row[Signal::Ea as usize] = op.emf.0;
        row[Signal::Eb as usize] = op.emf.1;
        row[Signal::Ec as usize] = op.emf.2;
        row[Signal::VRect as usize] = op.v_rect;
        row[Signal::GateQ1 as usize] = f64::from(u8::from(sw.gate_q1));
        row[Signal::IL1 as usize] = s.i_l1;
        row[Signal::IL2 as usize] = s.i_l2;
        row[Signal::VC1 as usize] = s.v_c1;
        row[Signal::VC2 as usize] = s.v_c2;
        row[Signal::VZetaOut as usize] = if has_zeta { s.v_c2 } else { op.vdc };
        if has_zeta {
            row[Signal::VSwQ1 as usize] = zeta::switch_voltage(&op.nodes, op.v_rect);
            row[Signal::VDiode as usize] = zeta::diode_voltage(&op.nodes);
        }
        if has_inv {
            row[Signal::VInvRaw as usize] = op.vab;
            row[Signal::IInvRaw as usize] = s.i_lf;
            row[Signal::IInvDc as usize] = op.i_inv;
            row[Signal::VSwS1 as usize] = inverter::s1_voltage(op.vdc, sw.bridge);
            row[Signal::VLoad as usize] = s.v_cf;
            row[Signal::ILoad as usize] = s.v_cf / self.cfg.inverter.rload;
        }
        Ok(row)
    }
}

/// Peak device voltages over the trailing analysis window, tracked at every
/// step (both edges) rather than from the decimated trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DevicePeaks {
    pub t_start: f64,
    pub v_sw_q1: f64,
    pub v_diode: f64,
    pub v_sw_s1: f64,
}

impl DevicePeaks {
    fn update(&mut self, row: &[f64; SIGNAL_COUNT]) {
        self.v_sw_q1 = self.v_sw_q1.max(row[Signal::VSwQ1 as usize]);
        self.v_diode = self.v_diode.max(row[Signal::VDiode as usize]);
        self.v_sw_s1 = self.v_sw_s1.max(row[Signal::VSwS1 as usize]);
    }
}

/// Output of one transient run.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub trace: WaveformTrace,
    /// Aligned step actually used.
    pub dt: f64,
    pub record_every: usize,
    pub steps: u64,
    /// Steps spent with Q1 off and the diode blocked.
    pub dcm_steps: u64,
    pub peaks: DevicePeaks,
    pub final_state: CircuitState,
    pub warnings: Vec<Warning>,
}

/// Largest divisor of `n` not exceeding `target` (at least 1).
fn divisor_at_most(n: u64, target: u64) -> u64 {
    (1..=target.min(n).max(1)).rev().find(|d| n.is_multiple_of(*d)).unwrap_or(1)
}

/// Pick the step, preferring one that puts the Q1 turn-off edge on the grid.
fn choose_step(cfg: &ScenarioConfig, warnings: &mut Vec<Warning>) -> Result<f64, ConfigError> {
    let req = cfg.solver.dt;
    let dt = align_dt(req, &cfg.grid_periods())?;
    if dt >= req / 100.0 || !cfg.scenario.has_zeta() {
        return Ok(dt);
    }
    // an awkward duty would force a tiny step; fall back to quantizing it
    let periods: Vec<f64> = cfg
        .grid_periods()
        .into_iter()
        .filter(|p| (p - cfg.zeta.duty / cfg.zeta.fs).abs() > 1e-18)
        .collect();
    let dt = align_dt(req, &periods)?;
    let n = (1.0 / (cfg.zeta.fs * dt)).round();
    let on = (0..n as u64)
        .filter(|k| zeta::pwm_gate(*k as f64 * dt, cfg.zeta.fs, cfg.zeta.duty))
        .count();
    warnings.push(Warning::duty_quantized(cfg.zeta.duty, on as f64 / n));
    Ok(dt)
}

/// Run the configured scenario from a cold start.
pub fn integrate(cfg: &ScenarioConfig) -> Result<SimRun, SimError> {
    let mut warnings = Vec::new();
    let dt = choose_step(cfg, &mut warnings)?;
    let solver = &cfg.solver;

    let n_steps = (solver.t_end / dt).round() as u64;
    let steps_per_fund = (1.0 / (cfg.inverter.f_out * dt)).round() as u64;
    let target = ((solver.record_every as f64) * solver.dt / dt).round().max(1.0) as u64;
    let rec = divisor_at_most(steps_per_fund, target);

    let window_len = cfg.analysis.window_periods as f64 / cfg.inverter.f_out;
    let peak_from = n_steps.saturating_sub((window_len / dt).round() as u64);
    let record_from = (solver.t_record_start / dt - 1e-6).ceil().max(0.0) as u64;

    let plant = Plant::new(cfg);
    let mut trace = WaveformTrace::with_capacity(((n_steps - record_from.min(n_steps)) / rec + 1) as usize);
    let mut x = CircuitState::default().to_vector();
    let mut diode = false;
    let mut dcm_steps = 0u64;
    let mut dcm_in_interval = false;
    let mut peaks = DevicePeaks {
        t_start: peak_from as f64 * dt,
        v_sw_q1: 0.0,
        v_diode: 0.0,
        v_sw_s1: 0.0,
    };
    let mut last_boundary: Option<(f64, [f64; 3])> = None;

    for n in 0..=n_steps {
        let t = n as f64 * dt;
        let state = CircuitState::from_vector(&x, diode);
        let sw = plant.switches(t, &state);
        diode = sw.diode;

        if n % rec == 0 {
            let energies = [x[E_IN], x[E_OUT], x[E_SRC]];
            if n >= record_from {
                let mut row = plant.observe(t, &x, &sw)?;
                let powers = match last_boundary {
                    Some((t0, e0)) => std::array::from_fn(|i| (energies[i] - e0[i]) / (t - t0)),
                    None => {
                        let dx = plant.derivs(t, &x, &sw)?;
                        [dx[E_IN], dx[E_OUT], dx[E_SRC]]
                    }
                };
                row[Signal::PIn as usize] = powers[0];
                row[Signal::POut as usize] = powers[1];
                row[Signal::PSrc as usize] = powers[2];
                row[Signal::Dcm as usize] = f64::from(u8::from(dcm_in_interval));
                trace.push(t, &row);
            }
            last_boundary = Some((t, energies));
            dcm_in_interval = false;
        }
        if n == n_steps {
            break;
        }

        if sw.zeta_mode() == ZetaMode::Discontinuous && cfg.scenario.has_zeta() {
            dcm_steps += 1;
            dcm_in_interval = true;
            // diode blocked: the series loop forces i_l1 + i_l2 = 0; keep loop flux
            let z = &cfg.zeta;
            let i = (z.l1 * x[0] - z.l2 * x[1]) / (z.l1 + z.l2);
            x[0] = i;
            x[1] = -i;
        }

        if n >= peak_from {
            peaks.update(&plant.observe(t, &x, &sw)?);
        }

        let mut failure = None;
        let next = rk4_step(
            |tt, xx| match plant.derivs(tt, xx, &sw) {
                Ok(d) => d,
                Err(e) => {
                    failure = Some(e);
                    [f64::NAN; N]
                }
            },
            &x,
            t,
            dt,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        x = next?;

        if n >= peak_from {
            // left limit at the end of the step, switches still frozen
            peaks.update(&plant.observe(t + dt, &x, &sw)?);
        }
        x[6] = x[6].rem_euclid(std::f64::consts::TAU);
    }

    if dcm_steps > 0 {
        warnings.push(Warning::dcm_entered(dcm_steps));
    }

    Ok(SimRun {
        trace,
        dt,
        record_every: rec as usize,
        steps: n_steps,
        dcm_steps,
        peaks,
        final_state: CircuitState::from_vector(&x, diode),
        warnings,
    })
}
