use std::f64::consts::FRAC_PI_4;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use netsdp::cli::{grid, scan_grid, Axis, Program, SwapAxes, EPSILON};
use netsdp::qsim::p22_family;
use netsdp::{Execution, LevelSpec, Mode, Preset, Scenario, SolveOptions};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn swap_level() -> LevelSpec {
    LevelSpec::npa(3).with_preset(Preset::OutcomePairs("C".into()))
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    g.sample_size(10);
    let level = swap_level();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("swap-level3", name), |b| {
            b.iter(|| Program::new(Scenario::lossy_swap(Mode::Classical), &level, exec).unwrap())
        });
    }
    g.finish();
}

fn schur_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    let level = LevelSpec::npa(3).with_preset(Preset::AWords {
        party: "A".into(),
        min: 2,
        max: 5,
    });
    let program = Program::new(
        Scenario::binary_line(Mode::Quantum),
        &level,
        Execution::Parallel,
    )
    .unwrap();
    let problem = program
        .instantiate(&p22_family(0.6))
        .unwrap()
        .to_sdp()
        .unwrap();
    for (name, exec) in MODES {
        let opts = SolveOptions {
            exec,
            ..SolveOptions::default()
        };
        g.bench_function(BenchmarkId::new("line-level3", name), |b| {
            b.iter(|| netsdp::solve(&problem, &opts))
        });
    }
    g.finish();
}

fn scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("scan");
    g.sample_size(10);
    let program = Program::new(
        Scenario::lossy_swap(Mode::Classical),
        &swap_level(),
        Execution::Parallel,
    )
    .unwrap();
    let points = grid(&SwapAxes {
        eta_a: Axis::List(vec![0.6, 0.7]),
        eta_c: Axis::Fixed(0.7),
        theta_ab: Axis::Fixed(FRAC_PI_4),
        theta_bc: Axis::Fixed(FRAC_PI_4),
        alpha0: Axis::List(vec![0.5, FRAC_PI_4]),
        alpha1: Axis::Fixed(FRAC_PI_4),
    });
    let opts = SolveOptions {
        decide_sign: Some(EPSILON),
        ..SolveOptions::default()
    };
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("swap-4-points", name), |b| {
            b.iter(|| scan_grid(&program, &points, &opts, EPSILON, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, assembly, schur_solve, scan);
criterion_main!(benches);
