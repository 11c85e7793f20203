use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tegta::games::{GameId, GameSpec};
use tegta::solvers::{cfr, select_equilibrium};

fn nash(c: &mut Criterion) {
    let mut group = c.benchmark_group("support_enumeration");
    for n in [3, 6, 9] {
        let g = tegta_bench::bimatrix(n, n as u64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| select_equilibrium(black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn counterfactual(c: &mut Criterion) {
    let tree = GameSpec::new(GameId::Game1, 3).build();
    c.bench_function("cfr/game1_100", |b| b.iter(|| cfr(black_box(&tree), 100).unwrap()));
}

criterion_group!(benches, nash, counterfactual);
criterion_main!(benches);
