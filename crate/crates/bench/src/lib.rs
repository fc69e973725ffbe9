//! Criterion benchmarks for the solver, the spectrum analysis and the sweep.

use std::f64::consts::TAU;
use std::hint::black_box;

use criterion::{BatchSize, Criterion};
use wecsim_core::analysis::duty_sweep;
use wecsim_core::engine::{integrate, rk4_step};
use wecsim_core::{fft_spectrum, ScenarioConfig, SweepMode};

fn short_run(scenario: &str, t_end: f64) -> ScenarioConfig {
    ScenarioConfig::from_toml_str(
        "",
        &[format!("scenario=\"{scenario}\""), format!("solver.t_end={t_end}"), "zeta.D=0.8".into()],
    )
    .expect("bench config")
}

pub fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("integrate");
    g.sample_size(10);
    for (name, t_end) in [("zeta_only", 0.01), ("inverter_only", 0.01), ("full_chain", 0.01)] {
        let cfg = short_run(name, t_end);
        g.bench_function(name, |b| b.iter(|| integrate(black_box(&cfg)).unwrap()));
    }
    g.finish();

    c.bench_function("rk4_step_lc", |b| {
        b.iter_batched(
            || [0.0, 10.0],
            |x| rk4_step(|_, y: &[f64; 2]| [y[1] / 1e-3, -y[0] / 1e-6], &x, 0.0, 1e-7).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

pub fn analysis(c: &mut Criterion) {
    let dt = 1e-6;
    let x: Vec<f64> = (0..40_000)
        .map(|i| {
            let t = i as f64 * dt;
            (TAU * 50.0 * t).sin() + 0.05 * (TAU * 250.0 * t).sin()
        })
        .collect();
    c.bench_function("fft_spectrum_40k", |b| b.iter(|| fft_spectrum(black_box(&x), dt, 50.0, 50).unwrap()));

    let base = ScenarioConfig::default();
    let d = base.sweep.d_values.clone();
    c.bench_function("duty_sweep_analytic", |b| {
        b.iter(|| duty_sweep(black_box(&d), &base, SweepMode::Analytic).unwrap())
    });
}
