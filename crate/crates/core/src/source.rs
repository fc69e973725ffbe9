//! Wave excitation, PMSG back-EMF and the six-pulse diode bridge that feeds
//! the Zeta stage.
//!
//! The wave-to-shaft mapping is parametric: the rotor either spins at a
//! constant mechanical speed or at a speed modulated sinusoidally at the wave
//! frequency. Rotor speed stays strictly positive for `mod_depth < 1`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// How the mechanical rotor speed follows the wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedMode {
    Constant,
    WaveModulated,
}

/// Sea-state and shaft-speed parameters.
///
/// `kgc` and `wave_number` are carried for reporting only; no speed law uses
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveParams {
    /// Wave height, m.
    #[serde(rename = "H")]
    pub height: f64,
    /// Wave period, s.
    #[serde(rename = "T")]
    pub period: f64,
    /// Tidal current speed factor.
    #[serde(rename = "Kgc")]
    pub kgc: f64,
    /// Wave number, 1/m.
    #[serde(rename = "k")]
    pub wave_number: f64,
    pub speed_mode: SpeedMode,
    /// Base mechanical rotor speed, rad/s.
    pub omega_m0: f64,
    pub mod_depth: f64,
}

impl Default for WaveParams {
    fn default() -> Self {
        Self {
            height: 1.0,
            period: 10.0,
            kgc: 1.5,
            wave_number: 0.408,
            speed_mode: SpeedMode::Constant,
            // sqrt(3) * 0.1194 * 8 * omega_m0 = 30 V line-line peak
            omega_m0: 18.14,
            mod_depth: 0.0,
        }
    }
}

impl WaveParams {
    /// Wave angular frequency 2π/T.
    pub fn omega(&self) -> f64 {
        TAU / self.period
    }
}

/// Permanent-magnet synchronous generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PmsgParams {
    /// Stator phase resistance, Ω.
    #[serde(rename = "Rph")]
    pub rph: f64,
    /// Armature inductance, H. Commutation overlap is not modeled.
    #[serde(rename = "La")]
    pub la: f64,
    /// Flux linkage, V·s.
    #[serde(rename = "lambda")]
    pub flux_linkage: f64,
    pub pole_pairs: u32,
}

impl Default for PmsgParams {
    fn default() -> Self {
        Self {
            rph: 0.0484,
            la: 3.95e-4,
            flux_linkage: 0.1194,
            pole_pairs: 8,
        }
    }
}

/// Sea-surface elevation η(t) = (H/2)·cos(ωt).
pub fn wave_elevation(t: f64, wp: &WaveParams) -> f64 {
    0.5 * wp.height * (wp.omega() * t).cos()
}

/// Mechanical rotor speed in rad/s.
pub fn rotor_speed(t: f64, wp: &WaveParams) -> f64 {
    match wp.speed_mode {
        SpeedMode::Constant => wp.omega_m0,
        SpeedMode::WaveModulated => wp.omega_m0 * (1.0 + wp.mod_depth * (wp.omega() * t).cos()),
    }
}

/// Electrical speed ωe = pole_pairs · ωm.
pub fn electrical_speed(t: f64, wp: &WaveParams, pm: &PmsgParams) -> f64 {
    f64::from(pm.pole_pairs) * rotor_speed(t, wp)
}

/// Balanced sinusoidal back-EMF: e_x = λ·ωe·cos(θe − x·2π/3).
pub fn pmsg_emf(theta_e: f64, omega_e: f64, pm: &PmsgParams) -> (f64, f64, f64) {
    let peak = pm.flux_linkage * omega_e;
    let shift = 2.0 * PI / 3.0;
    (
        peak * theta_e.cos(),
        peak * (theta_e - shift).cos(),
        peak * (theta_e - 2.0 * shift).cos(),
    )
}

/// Six-pulse bridge envelope max − min, before any resistive drop.
pub fn bridge_envelope(ea: f64, eb: f64, ec: f64) -> f64 {
    ea.max(eb).max(ec) - ea.min(eb).min(ec)
}

/// Ideal six-pulse rectifier output with the series drop of two conducting
/// phases, clamped at zero.
pub fn rectifier_output(ea: f64, eb: f64, ec: f64, i_dc: f64, pm: &PmsgParams) -> f64 {
    (bridge_envelope(ea, eb, ec) - 2.0 * pm.rph * i_dc).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn elevation_extremes_and_mean() {
        let wp = WaveParams::default();
        assert!((wave_elevation(0.0, &wp) - 0.5).abs() < 1e-15);
        assert!((wave_elevation(wp.period / 2.0, &wp) + 0.5).abs() < 1e-15);
        let n = 1000;
        let mean: f64 = (0..n)
            .map(|i| wave_elevation(i as f64 * wp.period / n as f64, &wp))
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn rotor_speed_modes() {
        let mut wp = WaveParams::default();
        for t in [0.0, 1.3, 7.7] {
            assert_eq!(rotor_speed(t, &wp), 18.14);
        }
        wp.speed_mode = SpeedMode::WaveModulated;
        assert_eq!(rotor_speed(2.0, &wp), 18.14);
        wp.mod_depth = 0.2;
        assert!((rotor_speed(0.0, &wp) - 1.2 * 18.14).abs() < 1e-12);
    }

    #[test]
    fn default_speed_gives_30v_line_line() {
        let wp = WaveParams::default();
        let pm = PmsgParams::default();
        let we = electrical_speed(0.0, &wp, &pm);
        let ll_peak = 3f64.sqrt() * pm.flux_linkage * we;
        assert!((ll_peak - 30.0).abs() < 0.02, "{ll_peak}");
    }

    #[test]
    fn emf_examples() {
        let pm = PmsgParams::default();
        assert_eq!(pmsg_emf(1.0, 0.0, &pm), (0.0, 0.0, 0.0));
        let (ea, _, _) = pmsg_emf(0.0, 145.1, &pm);
        assert!((ea - 17.325).abs() < 0.01);
        // line-line peak at theta where ea - eb peaks (theta = -30 deg)
        let (ea, eb, _) = pmsg_emf(-PI / 6.0, 145.1, &pm);
        assert!((ea - eb - 30.0).abs() < 0.01, "{}", ea - eb);
    }

    #[test]
    fn rectifier_examples() {
        let pm = PmsgParams::default();
        assert_eq!(rectifier_output(1.0, 0.0, -1.0, 0.0, &pm), 2.0);
        assert_eq!(rectifier_output(0.0, 0.0, 0.0, 5.0, &pm), 0.0);
        assert!((rectifier_output(10.0, 0.0, -10.0, 10.0, &pm) - (20.0 - 0.968)).abs() < 1e-12);
    }

    #[test]
    fn rectifier_mean_matches_six_pulse_average() {
        let pm = PmsgParams::default();
        let ll_peak = 30.0;
        let we = ll_peak / (3f64.sqrt() * pm.flux_linkage);
        let n = 60_000;
        let mut pulses = 0;
        let mut prev_slope = 0.0;
        let mut prev = 0.0;
        let mut sum = 0.0;
        for i in 0..n {
            let th = TAU * i as f64 / n as f64;
            let (a, b, c) = pmsg_emf(th, we, &pm);
            let v = rectifier_output(a, b, c, 0.0, &pm);
            assert!(v >= 0.0);
            sum += v;
            let slope = v - prev;
            if i > 1 && prev_slope > 0.0 && slope <= 0.0 {
                pulses += 1;
            }
            prev_slope = slope;
            prev = v;
        }
        let mean = sum / n as f64;
        let expected = 3.0 / PI * ll_peak;
        assert!((mean - expected).abs() / expected < 1e-3, "{mean} vs {expected}");
        // six crests per electrical period (the one at theta = 0 is a boundary)
        assert!((5..=6).contains(&pulses), "{pulses}");
    }

    proptest! {
        #[test]
        fn emf_is_balanced(theta in -10.0f64..10.0, we in 0.0f64..500.0) {
            let pm = PmsgParams::default();
            let (a, b, c) = pmsg_emf(theta, we, &pm);
            prop_assert!((a + b + c).abs() <= 1e-9 * (pm.flux_linkage * we).max(1.0));
        }

        #[test]
        fn rectifier_cyclic_invariance(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0, i in 0.0f64..20.0) {
            let pm = PmsgParams::default();
            let v = rectifier_output(a, b, c, i, &pm);
            prop_assert_eq!(v, rectifier_output(b, c, a, i, &pm));
            prop_assert_eq!(v, rectifier_output(c, a, b, i, &pm));
            prop_assert!(v >= 0.0);
        }

        #[test]
        fn rotor_speed_positive(depth in 0.0f64..0.999, t in 0.0f64..100.0, w0 in 0.1f64..100.0) {
            let wp = WaveParams { speed_mode: SpeedMode::WaveModulated, mod_depth: depth, omega_m0: w0, ..WaveParams::default() };
            prop_assert!(rotor_speed(t, &wp) > 0.0);
        }
    }
}
