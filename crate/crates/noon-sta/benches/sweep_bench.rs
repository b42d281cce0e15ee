use criterion::{criterion_group, criterion_main, Criterion};

use noon_sta::stage::StageMode;
use noon_sta::sweep::{run_sweep, run_sweep_serial, SweepGrid};
use noon_sta::TWO_PI;

fn tiny_grid() -> SweepGrid {
    SweepGrid {
        g1_start: TWO_PI * 0.080,
        g1_end: TWO_PI * 0.120,
        g1_count: 3,
        t1_start: 1.0,
        t1_end: 2.0,
        t1_count: 3,
        beta: TWO_PI * 0.100,
        window_factor: 4.0,
        rung: 0,
        modes: vec![StageMode::Sta, StageMode::App, StageMode::Ro],
    }
}

fn bench_sweep(c: &mut Criterion) {
    let grid = tiny_grid();
    let mut group = c.benchmark_group("sweep_3x3");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| run_sweep(&grid, 1e-8).unwrap())
    });
    group.bench_function("serial", |b| {
        b.iter(|| run_sweep_serial(&grid, 1e-8).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
