use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gram_expect::{
    char_coeffs, egf_expand_perm, expected_perm_from_char, expected_perm_recursion, moment_matrix_multinomial,
    traces_by_power, MultinomialCountModel,
};

fn expectation_paths(c: &mut Criterion) {
    let m = moment_matrix_multinomial(&MultinomialCountModel::reference());
    let mut group = c.benchmark_group("perm_paths");
    for n in [8usize, 16, 32] {
        let traces = traces_by_power(&m, n);
        let coeffs = char_coeffs(&m);
        group.bench_with_input(BenchmarkId::new("recursion", n), &n, |b, &n| {
            b.iter(|| expected_perm_recursion(black_box(&traces), n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("char", n), &n, |b, &n| {
            b.iter(|| expected_perm_from_char(black_box(&coeffs), n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("egf", n), &n, |b, &n| {
            b.iter(|| egf_expand_perm(black_box(&traces), n).unwrap())
        });
    }
    group.finish();

    c.bench_function("traces_by_power_32", |b| b.iter(|| traces_by_power(black_box(&m), 32)));
}

criterion_group!(benches, expectation_paths);
criterion_main!(benches);
