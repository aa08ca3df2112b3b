use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use piston_core::analytic::{analytic_series, grid_map};
use piston_core::oracle::{build_hamiltonian, oracle_run, ModeLayout, OracleOptions};
use piston_core::response::response_closed_form;
use piston_core::{validate, Engine, Execution, GasFamily, ScenarioConfig, SystemParams, TimeGrid};

fn toy() -> SystemParams {
    SystemParams {
        g: 0.0,
        omega: 0.0,
        omega_m: 0.3,
        lambda: 1.0,
        mass: 1.0,
        kappa: 0.0,
        kappa_m: 0.0,
    }
    .with_coupling_zpf(1e-3)
}

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn analytic_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("analytic_grid");
    let params = toy();
    let times: Vec<f64> = (0..100_000).map(|k| k as f64 * 1e-3).collect();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("response", name), &exec, |b, &exec| {
            b.iter(|| grid_map(&times, exec, |t| response_closed_form(&params, t).c))
        });
    }
    let cfg = ScenarioConfig::symmetric(
        "bench",
        toy(),
        GasFamily::Thermal(2.0),
        0.4,
        TimeGrid::new(0.0, 100.0, 20_000),
    );
    let sc = validate(cfg).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("series", name), &exec, |b, &exec| {
            b.iter(|| analytic_series(&sc, exec).unwrap())
        });
    }
    group.finish();
}

fn oracle_mixture(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_mixture");
    group.sample_size(10);
    let mut cfg = ScenarioConfig::symmetric(
        "bench",
        toy(),
        GasFamily::Coherent(0.5),
        0.3,
        TimeGrid::new(0.0, 3.0, 4),
    );
    cfg.engine = Engine::Oracle;
    let sc = validate(cfg).unwrap();
    let layout = ModeLayout::new(8, 4).unwrap();
    for (name, exec) in MODES {
        let opts = OracleOptions {
            exec,
            ..Default::default()
        };
        group.bench_with_input(
            BenchmarkId::new("coherent_branches", name),
            &opts,
            |b, opts| b.iter(|| oracle_run(&sc, &layout, sc.times(), opts).unwrap()),
        );
    }
    group.finish();
}

fn matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    let layout = ModeLayout::new(10, 8).unwrap();
    let h = build_hamiltonian(&toy(), &layout).unwrap();
    let x: Vec<Complex64> = (0..h.dimension())
        .map(|k| Complex64::new((k as f64).sin(), 0.0))
        .collect();
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| h.matvec_with(&x, &mut y, exec)));
    }
    group.finish();
}

criterion_group!(benches, analytic_grid, oracle_mixture, matvec);
criterion_main!(benches);
