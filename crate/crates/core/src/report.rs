//! Structured warnings and the steady-state summary.

use serde::{Deserialize, Serialize};

/// A condition worth surfacing in the summary and manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub code: String,
    pub message: String,
}

impl Warning {
    fn new(code: &str, message: String) -> Self {
        Self {
            code: code.to_string(),
            message,
        }
    }

    pub fn dcm_entered(steps: u64) -> Self {
        Self::new(
            "dcm_entered",
            format!("Zeta freewheel current reached zero; {steps} steps ran in discontinuous conduction"),
        )
    }

    pub fn not_settled(signal: &str, drift: f64, tol: f64) -> Self {
        Self::new(
            "not_settled",
            format!("{signal} per-period mean drifted {:.3}% between the last two periods (limit {:.3}%)", drift * 100.0, tol * 100.0),
        )
    }

    pub fn efficiency_above_unity(eff: f64) -> Self {
        Self::new(
            "efficiency_above_unity",
            format!("measured efficiency {eff:.5} exceeds 1; window energy bookkeeping is off by stored-energy drift"),
        )
    }

    pub fn zero_load_power() -> Self {
        Self::new("zero_load_power", "no input power in the analysis window; efficiency reported as 0".into())
    }

    pub fn duty_quantized(requested: f64, effective: f64) -> Self {
        Self::new(
            "duty_quantized",
            format!("duty {requested} does not land on the step grid; effective duty is {effective}"),
        )
    }

    /// The tabulated 0.697 duty cannot produce the tabulated 4x boost.
    pub fn duty_gain_discrepancy(duty: f64, gain: f64, vs: f64) -> Self {
        Self::new(
            "duty_gain_discrepancy",
            format!(
                "duty {duty} gives ideal gain D/(1-D) = {gain:.4}, i.e. {:.1} V from {vs} V; \
                 boosting 30 V to 120 V needs gain 4, i.e. D = 0.8",
                gain * vs
            ),
        )
    }

    /// M·B·Vs/√2 disagrees with the simulated fundamental (≈ M·B·Vs).
    pub fn ac_peak_formula_discrepancy(predicted: f64, measured: f64) -> Self {
        Self::new(
            "ac_peak_formula_discrepancy",
            format!(
                "peak predictor M*B*Vs/sqrt(2) = {predicted:.2} V but simulated load fundamental peak is {measured:.2} V (ratio {:.3}); \
                 bipolar SPWM gives a fundamental of M*Vdc",
                measured / predicted
            ),
        )
    }

    /// D/(1−D) is below 1/(1−D) for every duty in (0,1).
    pub fn boost_ordering() -> Self {
        Self::new(
            "boost_ordering",
            "Zeta gain D/(1-D) is below the conventional boost gain 1/(1-D) at every duty ratio; \
             the Zeta stage does not out-boost a boost converter at equal D"
                .into(),
        )
    }

    pub fn sweep_point_failed(duty: f64, reason: &str) -> Self {
        Self::new("sweep_point_failed", format!("D = {duty}: {reason}"))
    }
}

/// Steady-state metrics for one run. Stage-specific fields are `None` when
/// the stage is not part of the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub scenario: String,
    pub window_start_s: f64,
    pub window_end_s: f64,
    pub settled: bool,
    pub v_rect_mean: Option<f64>,
    pub v_zeta_mean: Option<f64>,
    pub zeta_gain_measured: Option<f64>,
    pub zeta_gain_analytic: Option<f64>,
    pub v_load_fund_peak: Option<f64>,
    pub v_load_peak_predicted: Option<f64>,
    pub thd_v: Option<f64>,
    pub thd_i: Option<f64>,
    pub efficiency: Option<f64>,
    pub energy_audit_error: Option<f64>,
    pub ripple_zeta_out: Option<f64>,
    pub stress_sw_q1: Option<f64>,
    pub stress_diode: Option<f64>,
    pub stress_s1: Option<f64>,
    pub stress_predicted_zeta: Option<f64>,
    pub ccm_flag: bool,
    pub dcm_step_count: u64,
    pub warnings: Vec<Warning>,
}
