//! Steady-state post-processing: windows, statistics, harmonic spectra,
//! efficiency, energy audit, summaries and the duty-ratio sweep.

use std::f64::consts::TAU;

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::config::{PowerBoundary, Scenario, ScenarioConfig, SweepMode};
use crate::source::{self, SpeedMode};
use crate::engine::{self, stored_energy, CircuitState, DevicePeaks, SimRun};
use crate::error::AnalysisError;
use crate::inverter;
use crate::report::{SummaryReport, Warning};
use crate::trace::{Signal, WaveformTrace};
use crate::zeta;

/// Duty ratio listed with the converter parameters; it does not give the
/// listed 4x boost.
pub const TABULATED_DUTY: f64 = 0.697;

/// Relative mismatch between the peak predictor and simulation that
/// triggers a warning.
const PEAK_FORMULA_TOL: f64 = 0.05;

/// Efficiency excess over 1 treated as rounding noise.
const UNITY_SLACK: f64 = 1e-6;

/// A trailing sample range covering a whole number of fundamental periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    /// First sample index (inclusive).
    pub start: usize,
    /// One past the last sample.
    pub end: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub samples_per_period: usize,
    pub settled: bool,
    /// Relative change of the per-period mean between the last two periods.
    pub drift: f64,
}

impl Window {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

fn samples_per_period(dt: f64, f0: f64, samples: usize) -> Result<usize, AnalysisError> {
    let per = 1.0 / (f0 * dt);
    let rounded = per.round();
    if rounded < 1.0 || (per - rounded).abs() > 1e-6 * rounded {
        return Err(AnalysisError::NonIntegerPeriods { samples, dt, f0 });
    }
    Ok(rounded as usize)
}

/// Trailing `periods` fundamental periods, with a drift check on `signal`.
///
/// The run must have lasted at least four fundamental periods and the
/// trace must hold the whole window.
pub fn steady_window(
    trace: &WaveformTrace,
    signal: Signal,
    f0: f64,
    periods: usize,
    rel_tol: f64,
) -> Result<Window, AnalysisError> {
    let need = 4.0 / f0;
    let dt = trace.spacing();
    let t_last = trace.t.last().copied().unwrap_or(0.0);
    if trace.len() < 2 || t_last + 0.5 * dt < need {
        return Err(AnalysisError::TraceTooShort { have: t_last, need });
    }
    let per = samples_per_period(dt, f0, trace.len())?;
    let periods = periods.max(2);
    let n = per * periods;
    if n > trace.len() {
        return Err(AnalysisError::TraceTooShort {
            have: trace.duration(),
            need: periods as f64 / f0,
        });
    }
    let end = trace.len();
    let start = end - n;
    let x = trace.get(signal);
    let last = stats(&x[end - per..end])?;
    let prev = stats(&x[end - 2 * per..end - per])?;
    let scale = last.mean.abs().max(last.rms).max(f64::MIN_POSITIVE);
    let drift = if last.rms == 0.0 && prev.rms == 0.0 {
        0.0
    } else {
        (last.mean - prev.mean).abs() / scale
    };
    Ok(Window {
        start,
        end,
        t_start: trace.t[start],
        t_end: trace.t[end - 1],
        samples_per_period: per,
        settled: drift < rel_tol,
        drift,
    })
}

/// Fundamental plus harmonics of one signal window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpectrum {
    pub f0: f64,
    /// Index 0 is the DC mean; index k is the peak amplitude of harmonic k.
    pub magnitudes: Vec<f64>,
    /// √(Σ_{k≥2} mag_k²)/mag_1; NaN without a fundamental.
    pub thd: f64,
}

impl HarmonicSpectrum {
    pub fn fundamental(&self) -> f64 {
        self.magnitudes.get(1).copied().unwrap_or(0.0)
    }

    /// RMS rebuilt from DC and the resolved harmonics.
    pub fn rms(&self) -> f64 {
        let ac: f64 = self.magnitudes.iter().skip(1).map(|m| 0.5 * m * m).sum();
        (self.magnitudes[0].powi(2) + ac).sqrt()
    }

    /// Plot-ready rows: order, frequency, amplitude, percent of fundamental.
    pub fn to_csv(&self, unit: &str) -> String {
        let mut out = format!("harmonic,f_Hz,amplitude_{unit},percent_of_fundamental\n");
        let fund = self.fundamental();
        for (k, m) in self.magnitudes.iter().enumerate() {
            let pct = if fund > 0.0 { 100.0 * m / fund } else { 0.0 };
            out.push_str(&format!("{k},{},{m},{pct}\n", k as f64 * self.f0));
        }
        out
    }
}

/// Rectangular-window DFT at exact harmonic bins of `f0`.
///
/// The window must hold an integer number of fundamental periods.
pub fn fft_spectrum(signal: &[f64], dt: f64, f0: f64, n_harmonics: usize) -> Result<HarmonicSpectrum, AnalysisError> {
    let n = signal.len();
    if n == 0 {
        return Err(AnalysisError::EmptyWindow);
    }
    let cycles = n as f64 * dt * f0;
    let whole = cycles.round();
    if whole < 1.0 || (cycles - whole).abs() > 1e-6 * whole.max(1.0) {
        return Err(AnalysisError::NonIntegerPeriods { samples: n, dt, f0 });
    }
    let cycles = whole as usize;
    if n_harmonics * cycles >= n.div_ceil(2) {
        return Err(AnalysisError::Malformed(format!(
            "harmonic {n_harmonics} is above Nyquist for {n} samples over {cycles} periods"
        )));
    }

    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let scale = 2.0 / n as f64;
    let mut magnitudes = Vec::with_capacity(n_harmonics + 1);
    magnitudes.push(buf[0].re / n as f64);
    for k in 1..=n_harmonics {
        magnitudes.push(buf[k * cycles].norm() * scale);
    }
    Ok(HarmonicSpectrum {
        f0,
        thd: thd_of(&magnitudes),
        magnitudes,
    })
}

fn thd_of(magnitudes: &[f64]) -> f64 {
    let fund = magnitudes.get(1).copied().unwrap_or(0.0);
    if fund <= 0.0 {
        return f64::NAN;
    }
    magnitudes.iter().skip(2).map(|m| m * m).sum::<f64>().sqrt() / fund
}

/// Mean, RMS, peak-to-peak and peak absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub rms: f64,
    pub ripple_pp: f64,
    pub peak_abs: f64,
}

pub fn stats(x: &[f64]) -> Result<Stats, AnalysisError> {
    if x.is_empty() {
        return Err(AnalysisError::EmptyWindow);
    }
    let n = x.len() as f64;
    let (mut sum, mut sq, mut lo, mut hi) = (0.0, 0.0, f64::INFINITY, f64::NEG_INFINITY);
    for &v in x {
        sum += v;
        sq += v * v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(Stats {
        mean: sum / n,
        rms: (sq / n).sqrt(),
        ripple_pp: hi - lo,
        peak_abs: hi.abs().max(lo.abs()),
    })
}

pub fn basic_stats(trace: &WaveformTrace, signal: Signal, window: &Window) -> Result<Stats, AnalysisError> {
    if window.end > trace.len() || window.start >= window.end {
        return Err(AnalysisError::EmptyWindow);
    }
    stats(&trace.get(signal)[window.start..window.end])
}

/// Harmonic spectrum of one signal over a window.
pub fn window_spectrum(
    trace: &WaveformTrace,
    signal: Signal,
    window: &Window,
    f0: f64,
    n_harmonics: usize,
) -> Result<HarmonicSpectrum, AnalysisError> {
    fft_spectrum(&trace.get(signal)[window.start..window.end], trace.spacing(), f0, n_harmonics)
}

/// Time average over the largest whole number of `period`s that fits at the
/// end of `x` (trapezoidal, with the first partial interval interpolated).
/// Falls back to the plain mean when not even one period fits.
pub fn cycle_mean(x: &[f64], dt: f64, period: f64) -> Result<f64, AnalysisError> {
    let n = x.len();
    if n < 2 || period.is_nan() || period <= 0.0 {
        return Ok(stats(x)?.mean);
    }
    let span_avail = (n - 1) as f64 * dt;
    let cycles = (span_avail / period * (1.0 + 1e-12)).floor();
    if cycles < 1.0 {
        return Ok(stats(x)?.mean);
    }
    let span = cycles * period;
    let start = span_avail - span;
    let i0 = ((start / dt).floor() as usize).min(n - 2);
    let frac = start / dt - i0 as f64;
    let x_start = x[i0] + frac * (x[i0 + 1] - x[i0]);
    let mut area = 0.5 * (x_start + x[i0 + 1]) * (1.0 - frac) * dt;
    for k in i0 + 1..n - 1 {
        area += 0.5 * (x[k] + x[k + 1]) * dt;
    }
    Ok(area / span)
}

/// Efficiency result; `warnings` carries the degenerate-case notices.
#[derive(Debug, Clone, PartialEq)]
pub struct Efficiency {
    pub value: f64,
    pub warnings: Vec<Warning>,
}

/// mean(p_out)/mean(p_in) over the window. `input` selects p_in or p_src.
pub fn efficiency(trace: &WaveformTrace, window: &Window, input: Signal) -> Result<Efficiency, AnalysisError> {
    let p_in = basic_stats(trace, input, window)?.mean;
    let p_out = basic_stats(trace, Signal::POut, window)?.mean;
    if p_in <= 0.0 {
        if p_out.abs() <= f64::EPSILON {
            return Ok(Efficiency {
                value: 0.0,
                warnings: vec![Warning::zero_load_power()],
            });
        }
        return Err(AnalysisError::NoInputPower(p_in));
    }
    let value = p_out / p_in;
    let warnings = if value > 1.0 + UNITY_SLACK {
        vec![Warning::efficiency_above_unity(value)]
    } else {
        Vec::new()
    };
    Ok(Efficiency { value, warnings })
}

fn state_at(trace: &WaveformTrace, i: usize) -> CircuitState {
    CircuitState {
        i_l1: trace.get(Signal::IL1)[i],
        i_l2: trace.get(Signal::IL2)[i],
        v_c1: trace.get(Signal::VC1)[i],
        v_c2: trace.get(Signal::VC2)[i],
        i_lf: trace.get(Signal::IInvRaw)[i],
        v_cf: trace.get(Signal::VLoad)[i],
        theta_e: 0.0,
        diode_conducting: false,
    }
}

/// Energy conservation check over the window:
/// (∫p_in − ∫p_out − ΔE_stored) / ∫p_in.
pub fn energy_audit(cfg: &ScenarioConfig, trace: &WaveformTrace, window: &Window) -> Result<f64, AnalysisError> {
    if window.start == 0 || window.end > trace.len() {
        return Err(AnalysisError::EmptyWindow);
    }
    let dt = trace.spacing();
    let e_in: f64 = trace.get(Signal::PIn)[window.start..window.end].iter().sum::<f64>() * dt;
    let e_out: f64 = trace.get(Signal::POut)[window.start..window.end].iter().sum::<f64>() * dt;
    if e_in <= 0.0 {
        return Err(AnalysisError::NoInputPower(e_in));
    }
    let stored = stored_energy(cfg, &state_at(trace, window.end - 1)) - stored_energy(cfg, &state_at(trace, window.start - 1));
    Ok((e_in - e_out - stored) / e_in)
}

fn settle_signal(scenario: Scenario) -> Signal {
    match scenario {
        Scenario::InverterOnly => Signal::VLoad,
        Scenario::SourceOnly => Signal::VRect,
        _ => Signal::VZetaOut,
    }
}

/// Peak of a trace column over the window, for traces without step-level peaks.
fn trace_peak(trace: &WaveformTrace, signal: Signal, window: &Window) -> f64 {
    trace.get(signal)[window.start..window.end]
        .iter()
        .fold(0.0f64, |m, &v| m.max(v))
}

/// Build the summary from a trace. `peaks` come from the step-level tracker
/// when available; otherwise peaks are read from the decimated trace.
pub fn summarize_trace(
    cfg: &ScenarioConfig,
    trace: &WaveformTrace,
    peaks: Option<&DevicePeaks>,
    dcm_step_count: u64,
    mut warnings: Vec<Warning>,
) -> Result<SummaryReport, AnalysisError> {
    let sc = cfg.scenario;
    let f0 = cfg.inverter.f_out;
    let a = &cfg.analysis;
    let sig = settle_signal(sc);
    let w = steady_window(trace, sig, f0, a.window_periods, a.settle_tol)?;
    if !w.settled {
        warnings.push(Warning::not_settled(sig.name(), w.drift, a.settle_tol));
    }

    let mut r = SummaryReport {
        scenario: sc.name().to_string(),
        window_start_s: w.t_start,
        window_end_s: w.t_end,
        settled: w.settled,
        v_rect_mean: None,
        v_zeta_mean: None,
        zeta_gain_measured: None,
        zeta_gain_analytic: None,
        v_load_fund_peak: None,
        v_load_peak_predicted: None,
        thd_v: None,
        thd_i: None,
        efficiency: None,
        energy_audit_error: None,
        ripple_zeta_out: None,
        stress_sw_q1: None,
        stress_diode: None,
        stress_s1: None,
        stress_predicted_zeta: None,
        ccm_flag: true,
        dcm_step_count,
        warnings: Vec::new(),
    };

    if sc.has_source() && cfg.wave.speed_mode == SpeedMode::Constant {
        // six ripple pulses per electrical period, unrelated to f_out
        let omega_e = source::electrical_speed(w.t_end, &cfg.wave, &cfg.pmsg);
        let pulse = TAU / (6.0 * omega_e);
        r.v_rect_mean = Some(cycle_mean(&trace.get(Signal::VRect)[w.start..w.end], trace.spacing(), pulse)?);
    } else if sc.has_source() || sc.has_zeta() {
        r.v_rect_mean = Some(basic_stats(trace, Signal::VRect, &w)?.mean);
    }

    if sc.has_zeta() {
        let out = basic_stats(trace, Signal::VZetaOut, &w)?;
        let vs = r.v_rect_mean.unwrap_or(cfg.stage.vs);
        let analytic = zeta::zeta_dc_gain(cfg.zeta.duty)?;
        r.v_zeta_mean = Some(out.mean);
        r.ripple_zeta_out = Some(out.ripple_pp);
        r.zeta_gain_measured = Some(if vs > 0.0 { out.mean / vs } else { 0.0 });
        r.zeta_gain_analytic = Some(analytic);
        r.stress_predicted_zeta = Some(zeta::stress_predictions(&cfg.zeta, vs).0);
        r.stress_sw_q1 = Some(peaks.map_or_else(|| trace_peak(trace, Signal::VSwQ1, &w), |p| p.v_sw_q1));
        r.stress_diode = Some(peaks.map_or_else(|| trace_peak(trace, Signal::VDiode, &w), |p| p.v_diode));
        r.ccm_flag = trace.get(Signal::Dcm)[w.start..w.end].iter().all(|&d| d == 0.0);
        if (cfg.zeta.duty - TABULATED_DUTY).abs() < 1e-9 {
            warnings.push(Warning::duty_gain_discrepancy(cfg.zeta.duty, analytic, vs));
        }
    }

    if sc.has_inverter() {
        let v = window_spectrum(trace, Signal::VLoad, &w, f0, a.n_harmonics)?;
        let i = window_spectrum(trace, Signal::ILoad, &w, f0, a.n_harmonics)?;
        let measured = v.fundamental();
        let predicted = match (r.v_rect_mean, r.zeta_gain_measured) {
            (Some(vs), Some(b)) => inverter::predicted_ac_peak(cfg.inverter.modulation_index, b, vs),
            _ => inverter::predicted_ac_peak(cfg.inverter.modulation_index, 1.0, cfg.stage.vdc),
        };
        r.v_load_fund_peak = Some(measured);
        r.v_load_peak_predicted = Some(predicted);
        r.thd_v = Some(v.thd);
        r.thd_i = Some(i.thd);
        r.stress_s1 = Some(peaks.map_or_else(|| trace_peak(trace, Signal::VSwS1, &w), |p| p.v_sw_s1));
        if predicted > 0.0 && (measured / predicted - 1.0).abs() > PEAK_FORMULA_TOL {
            warnings.push(Warning::ac_peak_formula_discrepancy(predicted, measured));
        }
    }

    if sc.has_zeta() || sc.has_inverter() {
        let input = match a.power_boundary {
            PowerBoundary::PmsgTerminals if sc.has_source() => Signal::PSrc,
            _ => Signal::PIn,
        };
        let eff = efficiency(trace, &w, input)?;
        warnings.extend(eff.warnings);
        r.efficiency = Some(eff.value);
        r.energy_audit_error = energy_audit(cfg, trace, &w).ok();
    }

    r.warnings = warnings;
    Ok(r)
}

/// Summary for a completed run, using the step-level device peaks.
pub fn summarize(cfg: &ScenarioConfig, run: &SimRun) -> Result<SummaryReport, AnalysisError> {
    summarize_trace(cfg, &run.trace, Some(&run.peaks), run.dcm_steps, run.warnings.clone())
}

/// One row of the duty-ratio table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub duty: f64,
    pub zeta_gain_analytic: f64,
    pub boost_gain_analytic: f64,
    pub zeta_gain_simulated: Option<f64>,
    pub ccm: Option<bool>,
    pub error: Option<String>,
}

/// Gain versus duty ratio. Simulated points run a `zeta_only` scenario built
/// from `base` (its `stage.vs`, `inverter.Rload`, Zeta and solver settings);
/// points run in parallel and keep input order. A failed point is flagged in
/// its row, not propagated.
pub fn duty_sweep(d_values: &[f64], base: &ScenarioConfig, mode: SweepMode) -> Result<Vec<SweepRow>, AnalysisError> {
    let analytic: Vec<(f64, f64, f64)> = d_values
        .iter()
        .map(|&d| Ok((d, zeta::zeta_dc_gain(d)?, zeta::boost_dc_gain(d)?)))
        .collect::<Result<_, AnalysisError>>()?;

    let simulate = |d: f64| -> Result<(f64, bool), String> {
        let mut cfg = base.clone();
        cfg.scenario = Scenario::ZetaOnly;
        cfg.zeta.duty = d;
        cfg.validate().map_err(|e| e.to_string())?;
        let run = engine::integrate(&cfg).map_err(|e| e.to_string())?;
        let s = summarize(&cfg, &run).map_err(|e| e.to_string())?;
        Ok((s.zeta_gain_measured.unwrap_or(f64::NAN), s.ccm_flag))
    };

    Ok(analytic
        .par_iter()
        .map(|&(duty, z, b)| {
            let mut row = SweepRow {
                duty,
                zeta_gain_analytic: z,
                boost_gain_analytic: b,
                zeta_gain_simulated: None,
                ccm: None,
                error: None,
            };
            if mode == SweepMode::Simulated {
                match simulate(duty) {
                    Ok((g, ccm)) => {
                        row.zeta_gain_simulated = Some(g);
                        row.ccm = Some(ccm);
                    }
                    Err(e) => row.error = Some(e),
                }
            }
            row
        })
        .collect())
}

/// Plot-ready sweep table.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("duty,zeta_gain_analytic,boost_gain_analytic,zeta_gain_simulated,ccm\n");
    for r in rows {
        let sim = r.zeta_gain_simulated.map(|g| g.to_string()).unwrap_or_default();
        let ccm = r.ccm.map(|c| u8::from(c).to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{sim},{ccm}\n",
            r.duty, r.zeta_gain_analytic, r.boost_gain_analytic
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::SIGNAL_COUNT;
    use std::f64::consts::PI;

    fn trace_from(f: impl Fn(f64) -> f64, signal: Signal, dt: f64, t_end: f64) -> WaveformTrace {
        let n = (t_end / dt).round() as usize;
        let mut tr = WaveformTrace::with_capacity(n + 1);
        for i in 0..=n {
            let t = i as f64 * dt;
            let mut row = [0.0; SIGNAL_COUNT];
            row[signal as usize] = f(t);
            tr.push(t, &row);
        }
        tr
    }

    #[test]
    fn constant_signal_window() {
        let tr = trace_from(|_| 120.0, Signal::VZetaOut, 1e-5, 0.1);
        let w = steady_window(&tr, Signal::VZetaOut, 50.0, 2, 0.01).unwrap();
        assert!(w.settled);
        assert_eq!(w.len(), 4000);
        assert!((tr.t[w.end - 1] - 0.1).abs() < 1e-12);
        assert!((w.t_end - w.t_start - (0.04 - 1e-5)).abs() < 1e-9);
        let s = basic_stats(&tr, Signal::VZetaOut, &w).unwrap();
        assert_eq!((s.mean, s.rms, s.ripple_pp, s.peak_abs), (120.0, 120.0, 0.0, 120.0));
    }

    #[test]
    fn ramp_is_not_settled() {
        // +5% of the initial value per 20 ms period
        let tr = trace_from(|t| 100.0 * (1.0 + 0.05 * t / 0.02), Signal::VZetaOut, 1e-5, 0.1);
        let w = steady_window(&tr, Signal::VZetaOut, 50.0, 2, 0.01).unwrap();
        assert!(!w.settled, "{}", w.drift);
    }

    #[test]
    fn short_trace_rejected() {
        let tr = trace_from(|_| 1.0, Signal::VLoad, 1e-5, 0.05);
        assert!(matches!(
            steady_window(&tr, Signal::VLoad, 50.0, 2, 0.01),
            Err(AnalysisError::TraceTooShort { .. })
        ));
    }

    #[test]
    fn sine_rms_closed_form() {
        let amp = 3.7;
        let x: Vec<f64> = (0..2000).map(|i| amp * (TAU * i as f64 / 1000.0).sin()).collect();
        let s = stats(&x).unwrap();
        assert!((s.rms - amp / 2f64.sqrt()).abs() < 1e-9);
        assert!(stats(&[]).is_err());
    }

    #[test]
    fn pure_tone_spectrum() {
        let dt = 1e-5;
        let x: Vec<f64> = (0..4000).map(|i| (TAU * 50.0 * i as f64 * dt).sin()).collect();
        let s = fft_spectrum(&x, dt, 50.0, 50).unwrap();
        assert!((s.fundamental() - 1.0).abs() < 1e-9);
        assert!(s.thd < 1e-9);
        assert_eq!(s.magnitudes.len(), 51);
    }

    #[test]
    fn leakage_guard() {
        let x = vec![1.0; 1500];
        assert!(matches!(
            fft_spectrum(&x, 1e-5, 50.0, 10),
            Err(AnalysisError::NonIntegerPeriods { .. })
        ));
        assert!(matches!(fft_spectrum(&[], 1e-5, 50.0, 10), Err(AnalysisError::EmptyWindow)));
    }

    #[test]
    fn square_wave_thd_matches_series() {
        // independent oracle: odd harmonics at 1/n of the fundamental
        let oracle = (3..=50).step_by(2).map(|n| 1.0 / (n * n) as f64).sum::<f64>().sqrt();
        assert!((oracle - 0.472_971_3).abs() < 1e-6);
        let dt = 1e-6;
        let x: Vec<f64> = (0..20_000)
            .map(|i| {
                let ph = (i % 20_000) as f64 / 20_000.0;
                if ph < 0.5 { 1.0 } else { -1.0 }
            })
            .collect();
        let s = fft_spectrum(&x, dt, 50.0, 50).unwrap();
        assert!((s.thd - oracle).abs() < 2e-3, "{} vs {oracle}", s.thd);
        assert!((s.fundamental() - 4.0 / PI).abs() < 1e-3);
    }

    #[test]
    fn cycle_mean_ignores_partial_cycles() {
        // 3.4 periods of an offset sine: the plain mean is biased, the cycle mean is not
        let dt = 1e-4;
        let x: Vec<f64> = (0..=340).map(|i| 2.0 + (TAU * i as f64 * dt / 0.01).sin()).collect();
        assert!((stats(&x).unwrap().mean - 2.0).abs() > 1e-3);
        assert!((cycle_mean(&x, dt, 0.01).unwrap() - 2.0).abs() < 1e-4);
        // a period that does not sit on the sample grid
        let p = 0.00731;
        let x: Vec<f64> = (0..=340).map(|i| 2.0 + (TAU * i as f64 * dt / p).cos()).collect();
        assert!((cycle_mean(&x, dt, p).unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn efficiency_degenerate() {
        let tr = trace_from(|_| 0.0, Signal::PIn, 1e-5, 0.1);
        let w = steady_window(&tr, Signal::PIn, 50.0, 2, 0.01).unwrap();
        let e = efficiency(&tr, &w, Signal::PIn).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.warnings[0].code, "zero_load_power");
    }

    #[test]
    fn analytic_sweep() {
        let rows = duty_sweep(&[0.5], &ScenarioConfig::default(), SweepMode::Analytic).unwrap();
        assert_eq!((rows[0].duty, rows[0].zeta_gain_analytic, rows[0].boost_gain_analytic), (0.5, 1.0, 2.0));
        assert!(duty_sweep(&[1.5], &ScenarioConfig::default(), SweepMode::Analytic).is_err());
    }
}
