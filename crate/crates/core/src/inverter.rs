//! SPWM H-bridge, LC output filter and resistive load.

use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::zeta::snapped_frac;

/// Sine/triangle comparison scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    /// One comparison drives both diagonals; two-level output.
    Bipolar,
    /// Each leg has its own comparison (±reference); three-level output.
    Unipolar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InverterParams {
    /// Modulation index.
    #[serde(rename = "M")]
    pub modulation_index: f64,
    pub f_out: f64,
    pub f_carrier: f64,
    #[serde(rename = "Lf")]
    pub lf: f64,
    #[serde(rename = "Cf")]
    pub cf: f64,
    #[serde(rename = "Rload")]
    pub rload: f64,
    pub modulation: Modulation,
}

impl Default for InverterParams {
    fn default() -> Self {
        Self {
            modulation_index: 1.0,
            f_out: 50.0,
            f_carrier: 1e5,
            lf: 3e-3,
            cf: 20e-6,
            rload: 15.0,
            modulation: Modulation::Bipolar,
        }
    }
}

/// Gate commands for S1..S4. S1/S2 form leg A (S1 high side), S3/S4 leg B
/// (S3 high side); the load sits between the two leg midpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeGates {
    pub s1: bool,
    pub s2: bool,
    pub s3: bool,
    pub s4: bool,
}

impl BridgeGates {
    /// Legal iff each leg has exactly one switch on.
    pub fn is_valid(&self) -> bool {
        self.s1 != self.s2 && self.s3 != self.s4
    }

    fn check(&self) -> Result<(), SimError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(SimError::GateInvariant([self.s1, self.s2, self.s3, self.s4]))
        }
    }

    /// Bridge output polarity: +1, 0 or −1.
    fn polarity(&self) -> f64 {
        f64::from(u8::from(self.s1)) - f64::from(u8::from(self.s3))
    }
}

/// Sinusoidal reference M·sin(2π·f_out·t).
pub fn reference(t: f64, ip: &InverterParams) -> f64 {
    ip.modulation_index * (TAU * ip.f_out * t).sin()
}

/// Symmetric triangle carrier on [−1, 1], starting at a trough at t = 0.
pub fn carrier(t: f64, f_carrier: f64) -> f64 {
    1.0 - 4.0 * (snapped_frac(t * f_carrier) - 0.5).abs()
}

/// Gate pattern at time `t`.
pub fn spwm_gates(t: f64, ip: &InverterParams) -> BridgeGates {
    let r = reference(t, ip);
    let c = carrier(t, ip.f_carrier);
    match ip.modulation {
        Modulation::Bipolar => {
            let pos = r > c;
            BridgeGates {
                s1: pos,
                s2: !pos,
                s3: !pos,
                s4: pos,
            }
        }
        Modulation::Unipolar => {
            let a = r > c;
            let b = -r > c;
            BridgeGates {
                s1: a,
                s2: !a,
                s3: b,
                s4: !b,
            }
        }
    }
}

/// Bridge output voltage v_ab.
pub fn hbridge_voltage(vdc: f64, gates: BridgeGates) -> Result<f64, SimError> {
    gates.check()?;
    Ok(vdc * gates.polarity())
}

/// Current drawn from the DC bus by the bridge.
pub fn inverter_input_current(gates: BridgeGates, i_lf: f64) -> Result<f64, SimError> {
    gates.check()?;
    Ok(i_lf * gates.polarity())
}

/// Blocking voltage across S1: the bus voltage while S2 conducts.
pub fn s1_voltage(vdc: f64, gates: BridgeGates) -> f64 {
    if gates.s1 {
        0.0
    } else {
        vdc
    }
}

/// LC filter and load derivatives (di_lf, dv_cf).
pub fn filter_derivs(i_lf: f64, v_cf: f64, vab: f64, ip: &InverterParams) -> (f64, f64) {
    (
        (vab - v_cf) / ip.lf,
        (i_lf - v_cf / ip.rload) / ip.cf,
    )
}

/// Filter corner frequency 1/(2π√(LfCf)).
pub fn filter_corner(ip: &InverterParams) -> f64 {
    1.0 / (TAU * (ip.lf * ip.cf).sqrt())
}

/// Peak AC voltage predictor M·B·vs/√2, exactly as commonly printed for this
/// topology. For bipolar SPWM the simulated fundamental is closer to M·B·vs;
/// the report shows both.
pub fn predicted_ac_peak(modulation_index: f64, boost: f64, vs: f64) -> f64 {
    modulation_index * boost * vs / SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn carrier_shape() {
        assert_eq!(carrier(0.0, 1e5), -1.0);
        assert!((carrier(5e-6, 1e5) - 1.0).abs() < 1e-9);
        assert!((carrier(2.5e-6, 1e5)).abs() < 1e-9);
        assert_eq!(carrier(1e-5, 1e5), -1.0);
    }

    #[test]
    fn zero_reference_is_half_duty() {
        let ip = InverterParams { modulation_index: 0.0, ..InverterParams::default() };
        let on = (0..100).filter(|&k| spwm_gates((k as f64 + 0.5) * 1e-7, &ip).s1).count();
        assert_eq!(on, 50);
    }

    #[test]
    fn positive_peak_drives_s1_s4() {
        let ip = InverterParams::default();
        // r = 1 at a quarter fundamental period; any carrier sample below 1
        let t = 0.005 + 1e-7;
        let g = spwm_gates(t, &ip);
        assert!(carrier(t, ip.f_carrier) < 1.0);
        assert_eq!((g.s1, g.s2, g.s3, g.s4), (true, false, false, true));
    }

    #[test]
    fn bridge_voltage_and_current() {
        let on = BridgeGates { s1: true, s2: false, s3: false, s4: true };
        let off = BridgeGates { s1: false, s2: true, s3: true, s4: false };
        assert_eq!(hbridge_voltage(120.0, on).unwrap(), 120.0);
        assert_eq!(hbridge_voltage(120.0, off).unwrap(), -120.0);
        assert_eq!(hbridge_voltage(0.0, off).unwrap(), 0.0);
        assert_eq!(inverter_input_current(on, 2.0).unwrap(), 2.0);
        assert_eq!(inverter_input_current(off, 2.0).unwrap(), -2.0);
        let shoot = BridgeGates { s1: true, s2: true, s3: false, s4: true };
        assert!(hbridge_voltage(120.0, shoot).is_err());
        assert!(inverter_input_current(shoot, 1.0).is_err());
    }

    #[test]
    fn filter_examples() {
        let ip = InverterParams::default();
        let (di, _) = filter_derivs(0.0, 0.0, 120.0, &ip);
        assert!((di - 40_000.0).abs() < 1e-9);
        assert!((118.0 / ip.rload - 7.867).abs() < 1e-3);
        let fc = filter_corner(&ip);
        assert!((fc - 649.7).abs() < 0.5, "{fc}");
        let atten = (ip.f_carrier / fc).powi(2);
        assert!((atten - 2.37e4).abs() < 0.05e4, "{atten}");
    }

    #[test]
    fn predictor_examples() {
        assert!((predicted_ac_peak(1.0, 4.0, 30.0) - 84.8528).abs() < 1e-3);
        assert_eq!(predicted_ac_peak(0.0, 4.0, 30.0), 0.0);
    }

    proptest! {
        #[test]
        fn gates_never_shoot_through(t in 0.0f64..0.1, m in 0.0f64..=1.0, unipolar in any::<bool>()) {
            let ip = InverterParams {
                modulation_index: m,
                modulation: if unipolar { Modulation::Unipolar } else { Modulation::Bipolar },
                ..InverterParams::default()
            };
            let g = spwm_gates(t, &ip);
            prop_assert!(g.is_valid());
            if !unipolar {
                prop_assert_eq!(g.s1, g.s4);
            }
        }

        #[test]
        fn bridge_power_identity(vdc in 0.0f64..200.0, i in -20.0f64..20.0, pos in any::<bool>()) {
            let g = BridgeGates { s1: pos, s2: !pos, s3: !pos, s4: pos };
            let vab = hbridge_voltage(vdc, g).unwrap();
            let idc = inverter_input_current(g, i).unwrap();
            prop_assert_eq!(vdc * idc, vab * i);
        }
    }
}
