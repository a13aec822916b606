use std::hint::black_box;

use aomsim_bench::{dft_element, spread_input};
use aomsim_core::{apply_element, build_ghz, build_swap, outcome_table, run_ghz, run_swap};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn protocols(c: &mut Criterion) {
    c.bench_function("run_swap", |b| b.iter(|| black_box(run_swap())));
    c.bench_function("run_ghz", |b| b.iter(|| black_box(run_ghz())));

    let swap = build_swap();
    let joint = swap.evolve().unwrap();
    c.bench_function("swap_outcome_table", |b| {
        b.iter(|| outcome_table(black_box(&joint), &swap.detectors).unwrap())
    });

    let ghz = build_ghz();
    let input = ghz.input();
    c.bench_function("ghz_evolve", |b| b.iter(|| ghz.aom.apply(black_box(&input)).unwrap()));
}

fn scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("dft_apply");
    for photons in 1..=4 {
        let element = dft_element(4);
        let input = spread_input(photons);
        group.bench_with_input(BenchmarkId::from_parameter(photons), &input, |b, s| {
            b.iter(|| apply_element(&element, black_box(s)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, protocols, scaling);
criterion_main!(benches);
