use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vprisk_bench::sampled_table;
use vprisk_core::entropy::attribute_weights;
use vprisk_core::pipeline::{train, TrainOptions};
use vprisk_core::reduct::{find_all_reducts, find_reduct_greedy};
use vprisk_core::table::partition;
use vprisk_core::vprs::{classification_quality, Precision};

fn partitions(c: &mut Criterion) {
    let mut group = c.benchmark_group("partition");
    for n in [1_000, 10_000, 100_000] {
        let dt = sampled_table(n, 1, 0.05);
        let all = dt.condition_attrs();
        group.bench_with_input(BenchmarkId::new("all_conditions", n), &dt, |b, dt| {
            b.iter(|| partition(dt, black_box(&all)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("quality", n), &dt, |b, dt| {
            b.iter(|| classification_quality(dt, black_box(&all), Precision::ONE).unwrap())
        });
    }
    group.finish();
}

fn reducts(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduct");
    group.sample_size(10);
    let beta: Precision = "0.8".parse().unwrap();
    for n in [1_000, 10_000] {
        let dt = sampled_table(n, 2, 0.0);
        group.bench_with_input(BenchmarkId::new("exhaustive", n), &dt, |b, dt| {
            b.iter(|| find_all_reducts(dt, beta).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("greedy", n), &dt, |b, dt| {
            b.iter(|| find_reduct_greedy(dt, beta).unwrap())
        });
    }
    group.finish();
}

fn weights_and_classify(c: &mut Criterion) {
    let dt = sampled_table(5_000, 3, 0.05);
    let relevant = dt.resolve(&["c1", "c4", "c5", "c6", "c9"]).unwrap();
    c.bench_function("weights/5000", |b| {
        b.iter(|| attribute_weights(&dt, black_box(&relevant)).unwrap())
    });
    let model = train(&dt, &TrainOptions::default()).unwrap().model;
    let probe = sampled_table(1_000, 4, 0.05);
    c.bench_function("classify_table/1000", |b| {
        b.iter(|| model.classify_table(black_box(&probe)).unwrap())
    });
}

criterion_group!(benches, partitions, reducts, weights_and_classify);
criterion_main!(benches);
