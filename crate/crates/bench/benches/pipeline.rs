use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpcloak::prelude::*;
use lpcloak_bench::{Fixture, SIZES};

fn customer(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("customer");
    group.sample_size(20);
    for n in SIZES {
        let f = Fixture::new(n, n as u64);
        group.bench_with_input(BenchmarkId::new("keygen", n), &f, |b, f| {
            b.iter(|| keygen(black_box(&f.problem), 7).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("encrypt", n), &f, |b, f| {
            b.iter(|| disguise(black_box(&f.key), black_box(&f.problem)))
        });
        let Outcome::Optimal { y, s, t } = &f.result.outcome else {
            panic!("fixture is feasible and bounded")
        };
        group.bench_with_input(BenchmarkId::new("verify", n), &f, |b, f| {
            b.iter(|| check_optimal(black_box(&f.encrypted), y, s, t, &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("decrypt", n), &f, |b, f| {
            b.iter(|| decrypt(black_box(&f.key), &f.encrypted, &f.result.outcome))
        });
    }
    group.finish();
}

fn cloud(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("cloud");
    group.sample_size(10);
    for n in SIZES {
        let f = Fixture::new(n, n as u64);
        group.bench_with_input(BenchmarkId::new("proof_gen", n), &f, |b, f| {
            b.iter(|| proof_gen(black_box(&f.encrypted), &tol).unwrap())
        });
        let plain = identity_view(&f.problem);
        group.bench_with_input(BenchmarkId::new("local_solve", n), &plain, |b, p| {
            b.iter(|| proof_gen(black_box(p), &tol).unwrap())
        });
    }
    group.finish();
}

fn end_to_end(c: &mut Criterion) {
    let tol = Tolerance::default();
    let f = Fixture::new(100, 3);
    c.bench_function("round_trip/100", |b| {
        b.iter_batched(
            || f.fresh_key(),
            |key| {
                let e = prob_enc(&key, &f.problem).unwrap();
                let r = proof_gen(&e, &tol).unwrap();
                result_dec_encrypted(&key, &e, &r, &tol).unwrap()
            },
            criterion::BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, customer, cloud, end_to_end);
criterion_main!(benches);
