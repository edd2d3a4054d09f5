use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fqw::cra::simulate_cri;
use fqw::enumeration::count_walks_with;
use fqw::group::{census_group_orders, DEFAULT_CAP};
use fqw::par::Exec;
use fqw::poly::rat;
use fqw::queueing::{simulate_ctmc, CoupledParams, Functional, QueueModel, SimConfig};
use fqw::stepset::{enumerate_models, parse_stepset};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn walk_counts(c: &mut Criterion) {
    let ws = parse_stepset("N,S,E,W,NE,NW,SE,SW").unwrap();
    let mut g = c.benchmark_group("count_walks_n120");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| count_walks_with(black_box(&ws), 120, exec).unwrap())
        });
    }
    g.finish();
}

fn group_orders(c: &mut Criterion) {
    let models = enumerate_models();
    let mut g = c.benchmark_group("group_orders_16_models");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| census_group_orders(black_box(&models[..16]), DEFAULT_CAP, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn ctmc_replicas(c: &mut Criterion) {
    let p = CoupledParams::processor_sharing(rat(1, 2), rat(1, 2), rat(2, 1), rat(2, 1), rat(1, 2)).unwrap();
    let model = QueueModel::Coupled(p);
    let cfg = SimConfig {
        events: 200_000,
        replicas: 16,
        seed: 11,
    };
    let mut g = c.benchmark_group("ctmc_16_replicas");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| simulate_ctmc(&model, &cfg, &[Functional::ProbEmpty], exec).unwrap())
        });
    }
    g.finish();
}

fn cri_replicas(c: &mut Criterion) {
    let mut g = c.benchmark_group("cri_20000_episodes");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| simulate_cri(8, 0.2, 0.5, 20_000, 3, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, walk_counts, group_orders, ctmc_replicas, cri_replicas);
criterion_main!(benches);
