//! Sequential against parallel execution of the heavy loops.

use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fermion_phonon::bogoliubov::solve_closed_form;
use fermion_phonon::correlators::CorrelatorSpec;
use fermion_phonon::fock::{build_space, reconstruction_check};
use fermion_phonon::model::{momentum_grid, Chirality, ModelParams};
use fermion_phonon::vertex::{damped_log_series, finite_correlator, FiniteOptions};
use fermion_phonon::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn mode_sums(c: &mut Criterion) {
    let mut group = c.benchmark_group("damped_log_series");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 1_000_000), &exec, |b, &exec| {
            b.iter(|| damped_log_series(black_box(0.37), black_box(1e-5), 1, 1_000_000, exec))
        });
    }
    group.finish();
}

fn finite_size_correlator(c: &mut Criterion) {
    let (l, a) = (4000.0, 0.0025);
    let params = ModelParams::new(1.0, 0.3, 1.0, 0.2, a, l, None);
    let sol = solve_closed_form(&params).unwrap();
    let grid = momentum_grid(l, 1, a).unwrap();
    let spec = CorrelatorSpec::two_point(Chirality::Plus, 1.0, 0.2, 1.0, 0.025).unwrap();
    let mut group = c.benchmark_group("finite_correlator");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = FiniteOptions {
            exec,
            ..FiniteOptions::default()
        };
        group.bench_function(name, |b| b.iter(|| finite_correlator(black_box(&spec), &sol, &grid, &opts).unwrap()));
    }
    group.finish();
}

fn field_reconstruction(c: &mut Criterion) {
    let l = 2.0 * PI;
    let space = build_space(momentum_grid(l, 3, l / 6.0).unwrap()).unwrap();
    let window2 = space.interior_window2();
    let mut group = c.benchmark_group("reconstruction_check");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| reconstruction_check(&space, window2, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, mode_sums, finite_size_correlator, field_reconstruction);
criterion_main!(benches);
