use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use crackloc::forward::assemble_msr;
use crackloc::imaging::{compute_map_with, predicted_map_with};
use crackloc::scene::{uniform_directions, ImagingGrid, Scene};
use crackloc::spectral::svd;
use crackloc::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn migration_map(c: &mut Criterion) {
    let scene = Scene::reference_example();
    let mut group = c.benchmark_group("migration_map");
    for n in [20, 64] {
        let dirs = uniform_directions(n).unwrap();
        let dec = svd(&assemble_msr(&scene, &dirs).unwrap()).unwrap();
        let grid = ImagingGrid::square(1.65, 0.02).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| compute_map_with(black_box(&grid), 20.0, &dec, 3, &dirs, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bessel_prediction(c: &mut Criterion) {
    let scene = Scene::reference_example();
    let grid = ImagingGrid::default();
    let mut group = c.benchmark_group("predicted_map");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| predicted_map_with(black_box(&grid), 20.0, &scene, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, migration_map, bessel_prediction);
criterion_main!(benches);
