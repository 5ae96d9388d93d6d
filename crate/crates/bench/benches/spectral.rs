use std::hint::black_box;

use conelab_bench::{label, pd_pair, SHAPES};
use conelab_core::{
    func_calc, geometric_mean, hermitian_eig, spectral_seminorm, thompson_distance, Func,
    SeminormHint,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn eigensolver(c: &mut Criterion) {
    let mut g = c.benchmark_group("hermitian_eig");
    for dims in SHAPES {
        let (x, _) = pd_pair(dims, 1);
        g.bench_with_input(BenchmarkId::from_parameter(label(dims)), &x, |b, x| {
            b.iter(|| hermitian_eig(black_box(x)).unwrap())
        });
    }
    g.finish();
}

fn functional_calculus(c: &mut Criterion) {
    let mut g = c.benchmark_group("func_calc_sqrt");
    for dims in SHAPES {
        let (x, _) = pd_pair(dims, 2);
        g.bench_with_input(BenchmarkId::from_parameter(label(dims)), &x, |b, x| {
            b.iter(|| func_calc(black_box(x), Func::Sqrt).unwrap())
        });
    }
    g.finish();
}

fn cone_geometry(c: &mut Criterion) {
    let mut g = c.benchmark_group("cone");
    for dims in SHAPES {
        let (x, y) = pd_pair(dims, 3);
        let name = label(dims);
        g.bench_with_input(BenchmarkId::new("thompson_distance", &name), &(&x, &y), |b, (x, y)| {
            b.iter(|| thompson_distance(black_box(x), black_box(y)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("geometric_mean", &name), &(&x, &y), |b, (x, y)| {
            b.iter(|| geometric_mean(black_box(x), black_box(y)).unwrap())
        });
        let xy = &x * &y;
        g.bench_with_input(BenchmarkId::new("product_seminorm", &name), &(&x, &y), |b, (x, y)| {
            b.iter(|| spectral_seminorm(black_box(&xy), SeminormHint::PositiveProduct(x, y)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, eigensolver, functional_calculus, cone_geometry);
criterion_main!(benches);
