//! Zeta DC-DC converter: switched state-space model, PWM gate and the
//! analytic gain/stress predictors.
//!
//! Topology: switch Q1 from the input to node n1, L1 from n1 to ground, C1
//! from n1 to n2, freewheel diode from ground (anode) to n2, L2 from n2 to
//! the output node, C2 across the output. `v_c1` is taken positive with n2
//! above n1, so in steady state `v_c1 ≈ v_out`.
//!
//! Three topological modes:
//! * gate on: n1 = vs, diode blocked.
//! * gate off, diode on: n2 = 0, L1 and L2 freewheel through the diode.
//! * gate off, diode off (DCM): L1, C1 and L2 form a series loop through the
//!   output with `i_l1 + i_l2 = 0`.

use serde::{Deserialize, Serialize};

use crate::engine::CircuitState;
use crate::error::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZetaParams {
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    /// Duty ratio of Q1.
    #[serde(rename = "D")]
    pub duty: f64,
    /// Switching frequency, Hz.
    pub fs: f64,
    /// Optional switch on-resistance, Ω (0 = ideal).
    #[serde(rename = "Ron")]
    pub ron: f64,
    /// Optional diode forward drop, V (0 = ideal).
    #[serde(rename = "Vf")]
    pub vf: f64,
}

impl Default for ZetaParams {
    fn default() -> Self {
        Self {
            l1: 1.6e-3,
            l2: 1.6e-3,
            c1: 0.159e-6,
            c2: 4e-4,
            duty: 0.697,
            fs: 1e5,
            ron: 0.0,
            vf: 0.0,
        }
    }
}

/// Converter conduction mode for one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaMode {
    /// Q1 on.
    SwitchOn,
    /// Q1 off, diode freewheeling.
    Freewheel,
    /// Q1 off, diode blocked.
    Discontinuous,
}

impl ZetaMode {
    pub fn from_switches(gate_on: bool, diode_conducting: bool) -> Self {
        match (gate_on, diode_conducting) {
            (true, _) => ZetaMode::SwitchOn,
            (false, true) => ZetaMode::Freewheel,
            (false, false) => ZetaMode::Discontinuous,
        }
    }
}

/// Time derivatives of the four converter states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZetaDerivs {
    pub di_l1: f64,
    pub di_l2: f64,
    pub dv_c1: f64,
    pub dv_c2: f64,
}

/// Node voltages n1 (switch/L1/C1 junction) and n2 (C1/L2/diode junction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaNodes {
    pub n1: f64,
    pub n2: f64,
}

const EDGE_EPS: f64 = 1e-9;

/// Fractional part of `x`, snapping values within 1e-9 of an integer to 0 so
/// that grid times like 100·1e-7·1e5 are not misread as 0.99999….
pub(crate) fn snapped_frac(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < EDGE_EPS {
        0.0
    } else {
        x - x.floor()
    }
}

/// Trailing-edge PWM: on while frac(t·fs) < D. An edge that falls exactly on
/// `t` belongs to the off interval.
pub fn pwm_gate(t: f64, fs: f64, duty: f64) -> bool {
    snapped_frac(t * fs) + EDGE_EPS < duty
}

/// Freewheel diode state at a step boundary.
pub fn resolve_diode(state: &CircuitState, gate_on: bool) -> bool {
    !gate_on && state.i_l1 + state.i_l2 > 0.0
}

/// Node voltages for the given mode.
pub fn zeta_nodes(state: &CircuitState, vs: f64, mode: ZetaMode, zp: &ZetaParams) -> ZetaNodes {
    match mode {
        ZetaMode::SwitchOn => {
            let n1 = vs - zp.ron * (state.i_l1 + state.i_l2);
            ZetaNodes {
                n1,
                n2: n1 + state.v_c1,
            }
        }
        ZetaMode::Freewheel => ZetaNodes {
            n1: -zp.vf - state.v_c1,
            n2: -zp.vf,
        },
        ZetaMode::Discontinuous => {
            // series loop L1 -> C1 -> L2 -> C2: L1·di = n1, L2·(-di) = n1 + vC1 - vC2
            let n1 = zp.l1 * (state.v_c2 - state.v_c1) / (zp.l1 + zp.l2);
            ZetaNodes {
                n1,
                n2: n1 + state.v_c1,
            }
        }
    }
}

/// Converter state derivatives with switch states frozen.
///
/// `i_out` is the current drawn from the output capacitor by the next stage.
pub fn zeta_derivs(
    state: &CircuitState,
    vs: f64,
    gate_on: bool,
    zp: &ZetaParams,
    i_out: f64,
) -> ZetaDerivs {
    let mode = ZetaMode::from_switches(gate_on, state.diode_conducting);
    let nodes = zeta_nodes(state, vs, mode, zp);
    let di_l1 = nodes.n1 / zp.l1;
    let di_l2 = (nodes.n2 - state.v_c2) / zp.l2;
    let dv_c1 = match mode {
        // C1 carries i_l2 from n1 to n2
        ZetaMode::SwitchOn | ZetaMode::Discontinuous => -state.i_l2 / zp.c1,
        // C1 carries i_l1 from n2 to n1
        ZetaMode::Freewheel => state.i_l1 / zp.c1,
    };
    ZetaDerivs {
        di_l1,
        di_l2,
        dv_c1,
        dv_c2: (state.i_l2 - i_out) / zp.c2,
    }
}

/// Voltage across Q1: the on-state drop while conducting, the blocking
/// voltage vs − n1 otherwise.
pub fn switch_voltage(nodes: &ZetaNodes, vs: f64) -> f64 {
    vs - nodes.n1
}

/// Reverse (blocking) voltage across the freewheel diode, cathode n2 minus
/// grounded anode.
pub fn diode_voltage(nodes: &ZetaNodes) -> f64 {
    nodes.n2
}

fn check_duty(duty: f64) -> Result<(), AnalysisError> {
    if duty > 0.0 && duty < 1.0 {
        Ok(())
    } else {
        Err(AnalysisError::DutyDomain(duty))
    }
}

/// Ideal CCM Zeta gain D/(1−D).
pub fn zeta_dc_gain(duty: f64) -> Result<f64, AnalysisError> {
    check_duty(duty)?;
    Ok(duty / (1.0 - duty))
}

/// Conventional boost gain 1/(1−D), for comparison.
pub fn boost_dc_gain(duty: f64) -> Result<f64, AnalysisError> {
    check_duty(duty)?;
    Ok(1.0 / (1.0 - duty))
}

/// CCM off-state blocking voltage of Q1 and of the diode: vs + vo = vs/(1−D).
pub fn stress_predictions(zp: &ZetaParams, vs: f64) -> (f64, f64) {
    let v = vs + vs * zp.duty / (1.0 - zp.duty);
    (v, v)
}
