//! Wall-clock cost of each stage of the pipeline, smallest to largest:
//! one map step, one derivative step, a full Benettin orbit, the cone
//! certifier, and the dampening-integral quadrature. Run with
//! `cargo bench -p phlab-bench`.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use phlab_core::{
    benettin_spectrum, certify_perturbed, cone_constants, integral_of_log_hu, return_time,
    solve_spectrum, AdaptedChart, BumpMap, GridSpec, LocalizedBump, PerturbedDiffeo,
    QuadratureSpec, TorusPoint,
};

fn witness_map(k: i64, amplitude: f64) -> PerturbedDiffeo {
    let sd = solve_spectrum(k).expect("admissible family parameter");
    let center = TorusPoint::new(1.0 / 3.0, 0.5, 11.0 / 12.0);
    let chart = AdaptedChart::new(&sd, center, 0.08).expect("default ball fits");
    let bump = BumpMap::new(amplitude, 0.1).expect("admissible amplitude");
    PerturbedDiffeo::with_bump(LocalizedBump::new(bump, chart))
}

fn bench_spectrum(c: &mut Criterion) {
    c.bench_function("solve_spectrum k=5", |b| {
        b.iter(|| solve_spectrum(black_box(5)).unwrap())
    });
}

fn bench_map_step(c: &mut Criterion) {
    let f = witness_map(6, 0.3);
    // A point inside the perturbation ball, where the step is most expensive.
    let inside = TorusPoint::new(1.0 / 3.0, 0.5, 11.0 / 12.0);
    let outside = TorusPoint::new(0.1, 0.1, 0.1);
    c.bench_function("map step inside ball", |b| b.iter(|| f.step(black_box(&inside))));
    c.bench_function("map step outside ball", |b| b.iter(|| f.step(black_box(&outside))));
    c.bench_function("derivative step inside ball", |b| b.iter(|| f.dstep(black_box(&inside))));
}

fn bench_benettin(c: &mut Criterion) {
    let f = witness_map(6, 0.3);
    let w0 = TorusPoint::new(0.2, 0.4, 0.6);
    let mut group = c.benchmark_group("benettin orbit");
    for iters in [1_000usize, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(iters), &iters, |b, &n| {
            b.iter(|| benettin_spectrum(&f, &w0, n, 100, 7))
        });
    }
    group.finish();
}

fn bench_certifier(c: &mut Criterion) {
    let f = witness_map(6, 0.02);
    let constants = cone_constants(f.spectral());
    c.bench_function("certify 1000x64", |b| {
        b.iter(|| certify_perturbed(&f, &constants, GridSpec { n_points: 1000, n_dirs: 64 }))
    });
}

fn bench_integral(c: &mut Criterion) {
    let bump = BumpMap::new(0.3, 0.1).unwrap();
    let mut group = c.benchmark_group("integral of log h_u");
    for cells in [32usize, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(cells), &cells, |b, &n| {
            b.iter(|| {
                integral_of_log_hu(&bump, QuadratureSpec::Midpoint { cells_per_axis: n }).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_return_time(c: &mut Criterion) {
    let sd = solve_spectrum(6).unwrap();
    let chart = AdaptedChart::new(&sd, TorusPoint::new(1.0 / 3.0, 0.5, 11.0 / 12.0), 0.08).unwrap();
    c.bench_function("return_time 64x2048", |b| b.iter(|| return_time(&chart, 64, 2048)));
}

criterion_group!(
    benches,
    bench_spectrum,
    bench_map_step,
    bench_benettin,
    bench_certifier,
    bench_integral,
    bench_return_time
);
criterion_main!(benches);
