use std::hint::black_box;

use comp2flex::analytic::{
    interferer_densities, laplace_dl_psi, laplace_ul_psi, success_dl, success_ul,
};
use comp2flex::{default_paper_params, QuadratureSpec, SystemParams};
use criterion::{criterion_group, criterion_main, Criterion};

fn analytic(c: &mut Criterion) {
    let p = default_paper_params();
    let general = SystemParams {
        alpha: 3.5,
        ..p.clone()
    };
    let d = interferer_densities(p.delta, p.lambda_b);
    let q = QuadratureSpec::default();
    let mut group = c.benchmark_group("analytic");
    group.bench_function("laplace_dl_psi", |b| {
        b.iter(|| laplace_dl_psi(black_box(2.0), &p, &d, &q).unwrap())
    });
    group.bench_function("laplace_ul_psi", |b| {
        b.iter(|| laplace_ul_psi(black_box(2.0), &p, &d, &q).unwrap())
    });
    group.bench_function("success_dl_alpha4", |b| {
        b.iter(|| success_dl(black_box(&p), &q).unwrap())
    });
    group.bench_function("success_ul_alpha4", |b| {
        b.iter(|| success_ul(black_box(&p), &q).unwrap())
    });
    group.sample_size(10);
    group.bench_function("success_ul_alpha3.5", |b| {
        b.iter(|| success_ul(black_box(&general), &q).unwrap())
    });
    group.finish();
}

criterion_group!(benches, analytic);
criterion_main!(benches);
