use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use esd_core::dynamics::Mode;
use esd_core::sweep::{run_sweep_with, Execution, RunOptions, Scenario, SweepSpec};

fn spec() -> SweepSpec {
    let mut spec = SweepSpec::new(Scenario::ConcurrenceVsA);
    spec.kt = vec![3.0, 30.0];
    spec.r = vec![0.1, 1.0];
    spec.a = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    spec.modes = vec![Mode::NonMarkovian, Mode::Markovian];
    spec.horizon = 10.0;
    spec.grid = 0.1;
    spec
}

fn bench_execution(c: &mut Criterion) {
    let spec = spec();
    let mut group = c.benchmark_group("sweep_40_points");
    group.sample_size(10);
    for (name, execution) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        let opts = RunOptions {
            execution,
            workers: None,
        };
        group.bench_function(name, |b| {
            b.iter(|| run_sweep_with(black_box(&spec), &opts).expect("valid spec"))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_execution);
criterion_main!(benches);
