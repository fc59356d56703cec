use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use csext::oracle::{coverage_search, random_csym_dissipative};
use csext::{
    build_kit, cself_contractive_extend, glazman_extend, operator_ball, uniqueness_report, Complex64, ContractiveParam,
    Tolerance,
};
use csext_bench::{instance, kit, DIMS};
use std::hint::black_box;

fn kits(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_kit");
    for n in DIMS {
        let inst = instance(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| build_kit(black_box(&inst.v), &inst.conj, Tolerance::default()).unwrap())
        });
    }
    g.finish();
}

fn extensions(c: &mut Criterion) {
    let mut g = c.benchmark_group("cself_contractive_extend");
    for n in DIMS {
        let kit = kit(n);
        let p = ContractiveParam::zero(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &kit, |b, kit| {
            b.iter(|| cself_contractive_extend(black_box(kit), &p).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("operator_ball");
    for n in DIMS {
        let kit = kit(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &kit, |b, kit| {
            b.iter(|| operator_ball(black_box(kit)).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("uniqueness_report");
    for n in DIMS {
        let kit = kit(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &kit, |b, kit| {
            b.iter(|| uniqueness_report(black_box(kit), 16, 0).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("coverage_search_100");
    g.sample_size(10);
    for n in [2, 4, 8] {
        let inst = instance(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| coverage_search(black_box(inst), 100, Tolerance::default()).unwrap())
        });
    }
    g.finish();
}

fn dissipative(c: &mut Criterion) {
    let mut g = c.benchmark_group("glazman_extend");
    for n in [2, 4, 8] {
        let (conj, t) = random_csym_dissipative(3, n, n / 2, false).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &(conj, t), |b, (conj, t)| {
            b.iter(|| glazman_extend(black_box(t), conj, Complex64::new(0.0, 1.0), None, Tolerance::default()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kits, extensions, oracle, dissipative);
criterion_main!(benches);
