use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cs_radial::solver::{multiplicity_run, MinimaxConfig};
use cs_radial::{make_grid, Execution, Grading, NonlinearityModel};

fn multiplicity(c: &mut Criterion) {
    let grid = make_grid(20.0, 1025, Grading::Uniform).unwrap();
    let model = NonlinearityModel::power(2.0, 1.0).unwrap();
    let cfg = MinimaxConfig::default();
    let mut group = c.benchmark_group("multiplicity_run");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for n in [2usize, 4] {
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| black_box(multiplicity_run(2e-5, &model, &grid, n, &cfg, exec).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, multiplicity);
criterion_main!(benches);
