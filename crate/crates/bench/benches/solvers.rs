use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ctp_bench::{corners, grid};
use ctp_core::traveler::{exact_expected_time, make_policy, simulate_policy, PolicyKind};
use ctp_core::{geodesic_edge_betweenness, BlockageModel, Overrides};

fn exact_dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_expected_time");
    for uncertain in [4, 8, 12] {
        let net = grid(3, 4, uncertain, 0.3);
        let model = BlockageModel::from_network(&net);
        let (s, t) = corners(3, 4);
        group.bench_with_input(BenchmarkId::from_parameter(uncertain), &uncertain, |b, _| {
            b.iter(|| exact_expected_time(&net, &model, &s, &t, 100.0).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let net = grid(3, 4, 10, 0.3);
    let model = BlockageModel::from_network(&net);
    let (s, t) = corners(3, 4);
    let mut group = c.benchmark_group("simulate_policy_10k");
    for (name, kind) in [("optimal", PolicyKind::Optimal), ("replan", PolicyKind::ReplanGreedy)] {
        let policy = make_policy(kind, &net, &model, &t, 100.0).unwrap();
        group.bench_function(name, |b| {
            b.iter(|| simulate_policy(&net, &model, &policy, &s, 10_000, 1, &Overrides::new()).unwrap())
        });
    }
    group.finish();
}

fn geodesic(c: &mut Criterion) {
    let mut group = c.benchmark_group("geodesic_edge_betweenness");
    for side in [10, 30] {
        let net = grid(side, side, 0, 0.0);
        group.bench_with_input(BenchmarkId::from_parameter(side), &side, |b, _| {
            b.iter(|| geodesic_edge_betweenness(&net))
        });
    }
    group.finish();
}

criterion_group!(benches, exact_dp, monte_carlo, geodesic);
criterion_main!(benches);
