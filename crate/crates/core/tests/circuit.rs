use wecsim_core::analysis::{self, steady_window};
use wecsim_core::config::ScenarioConfig;
use wecsim_core::engine::{integrate, rk4_step};
use wecsim_core::trace::Signal;

fn config(overrides: &[&str]) -> ScenarioConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    ScenarioConfig::from_toml_str("", &o).unwrap()
}

#[test]
fn rk4_global_error_is_fourth_order() {
    let solve = |h: f64| {
        let n = (2.0 / h).round() as usize;
        let mut x = [1.0, 0.0];
        for k in 0..n {
            // harmonic oscillator, exact solution cos t
            x = rk4_step(|_, y: &[f64; 2]| [y[1], -y[0]], &x, k as f64 * h, h).unwrap();
        }
        (x[0] - 2f64.cos()).abs()
    };
    let ratio = solve(0.02) / solve(0.01);
    assert!((ratio - 16.0).abs() < 3.0, "{ratio}");
}

#[test]
fn zero_sources_stay_at_rest() {
    let cfg = config(&["scenario=\"zeta_only\"", "stage.vs=0", "solver.t_end=0.01"]);
    let run = integrate(&cfg).unwrap();
    for s in [Signal::IL1, Signal::IL2, Signal::VC1, Signal::VC2, Signal::PIn] {
        assert!(run.trace.get(s).iter().all(|&v| v == 0.0), "{s:?}");
    }
    let cfg = config(&["scenario=\"inverter_only\"", "stage.vdc=0", "solver.t_end=0.01"]);
    let run = integrate(&cfg).unwrap();
    assert!(run.trace.get(Signal::VLoad).iter().all(|&v| v == 0.0));
}

fn check_balances(c1: &str, periods: f64) {
    let cfg = config(&[
        "scenario=\"zeta_only\"",
        "zeta.D=0.8",
        c1,
        "solver.t_end=0.3",
        "solver.record_every=1",
        "solver.t_record_start=0.29",
    ]);
    let run = integrate(&cfg).unwrap();
    let tr = &run.trace;
    let span = periods / cfg.zeta.fs;
    let n = (span / tr.spacing()).round() as usize;
    let end = tr.len() - 1;
    let start = end - n;
    let vs = cfg.stage.vs;

    // volt-second balance: mean inductor voltage L·Δi/T is tiny next to vs
    for (s, l) in [(Signal::IL1, cfg.zeta.l1), (Signal::IL2, cfg.zeta.l2)] {
        let x = tr.get(s);
        let mean_v = l * (x[end] - x[start]) / span;
        assert!(mean_v.abs() < 0.01 * vs, "{s:?}: {mean_v}");
    }
    // charge balance: mean C1 current C·Δv/T is tiny next to the load current
    let vc1 = tr.get(Signal::VC1);
    let vo = tr.get(Signal::VC2)[start..end].iter().sum::<f64>() / n as f64;
    let io = vo / cfg.inverter.rload;
    assert!((cfg.zeta.c1 * (vc1[end] - vc1[start]) / span).abs() < 1e-3 * io);

    // mean L2 current feeds the load
    let il2 = tr.get(Signal::IL2)[start..end].iter().sum::<f64>() / n as f64;
    assert!((il2 - io).abs() / io < 0.01, "{il2} vs {io}");
}

#[test]
fn zeta_volt_second_and_charge_balance() {
    // the lossless converter keeps ringing between its inductors and C1 on
    // top of the switching ripple, so balance is checked over 800 periods
    check_balances("zeta.C1=0.159e-6", 800.0);
    check_balances("zeta.C1=20e-6", 800.0);
}

#[test]
fn zeta_gain_at_corrected_duty() {
    let cfg = config(&["scenario=\"zeta_only\"", "zeta.D=0.8", "solver.t_end=0.2"]);
    let run = integrate(&cfg).unwrap();
    let s = analysis::summarize(&cfg, &run).unwrap();
    assert!((s.zeta_gain_measured.unwrap() - 4.0).abs() / 4.0 < 0.02);
    assert!(s.ccm_flag);
    assert!(s.settled);
}

#[test]
fn large_c1_brings_device_stress_to_ccm_prediction() {
    // with negligible C1 ripple both devices block vs + vo
    let cfg = config(&["scenario=\"zeta_only\"", "zeta.D=0.8", "zeta.C1=20e-6", "solver.t_end=0.3"]);
    let run = integrate(&cfg).unwrap();
    let s = analysis::summarize(&cfg, &run).unwrap();
    let predicted = s.stress_predicted_zeta.unwrap();
    assert!((predicted - 150.0).abs() < 1e-9);
    for peak in [s.stress_sw_q1.unwrap(), s.stress_diode.unwrap()] {
        assert!((peak - predicted).abs() / predicted < 0.05, "{peak}");
    }
}

#[test]
fn awkward_duty_is_quantized_with_warning() {
    let cfg = config(&["scenario=\"zeta_only\"", "zeta.D=0.69713", "solver.t_end=0.1"]);
    let run = integrate(&cfg).unwrap();
    assert_eq!(run.dt, 1e-7);
    assert!(run.warnings.iter().any(|w| w.code == "duty_quantized"));
}

#[test]
fn step_shrinks_to_land_the_turn_off_edge() {
    let cfg = config(&["scenario=\"zeta_only\"", "solver.t_end=0.1"]);
    let run = integrate(&cfg).unwrap();
    assert_eq!(run.dt, 1e-8);
    // recorded spacing stays at the requested decimation
    assert!((run.trace.spacing() - 1e-6).abs() < 1e-15);
}

#[test]
fn inverter_power_balance() {
    let cfg = config(&["scenario=\"inverter_only\"", "solver.t_end=0.1"]);
    let run = integrate(&cfg).unwrap();
    let w = steady_window(&run.trace, Signal::VLoad, 50.0, 2, 0.01).unwrap();
    let audit = analysis::energy_audit(&cfg, &run.trace, &w).unwrap();
    assert!(audit.abs() < 1e-6, "{audit}");
}
