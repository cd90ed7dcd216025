use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use latgreen_core::constants::s0_quadrature;
use latgreen_core::expansion::{u_expansion, ExpansionOptions};
use latgreen_core::kernel::{u_product, u_spectral, u_sweep, v_exact, KernelQuery, LatticePoint};
use latgreen_core::omega::omega;
use latgreen_core::specfun::{bessel_j, bessel_j_sequence};
use latgreen_core::verify::{check_summation_alpha, SeriesTestCase, ALPHA_Z_SAMPLES};

fn specfun(c: &mut Criterion) {
    c.bench_function("bessel_j n=20 z=150", |b| b.iter(|| bessel_j(black_box(20), black_box(150.0))));
    c.bench_function("bessel_j_sequence 700 z=1000", |b| {
        b.iter(|| bessel_j_sequence(black_box(700), black_box(1000.0)))
    });
}

fn kernels(c: &mut Criterion) {
    let q = KernelQuery::new(LatticePoint::unit(3, 1), 100.0, 1);
    c.bench_function("u product (3,1) t=100 J=1", |b| b.iter(|| u_product(black_box(&q))));
    c.bench_function("u spectral (3,1) t=100 J=1", |b| b.iter(|| u_spectral(black_box(&q))));
    let p = LatticePoint::unit(5, 0);
    c.bench_function("v (5,0) t=800", |b| b.iter(|| v_exact(black_box(&p), black_box(800.0))));
    let sites: Vec<[i64; 2]> = (-20..=20).flat_map(|a| (-20..=20).map(move |b| [a, b])).collect();
    c.bench_function("u sweep 41x41 t=10", |b| b.iter(|| u_sweep(black_box(&sites), 10.0, 1.0, 0)));
}

fn expansions(c: &mut Criterion) {
    let q = KernelQuery::new(LatticePoint::unit(3, 1), 640.0, 0);
    let opts = ExpansionOptions::default();
    c.bench_function("u expansion N=3", |b| b.iter(|| u_expansion(black_box(&q), 3, &opts)));
}

fn slow(c: &mut Criterion) {
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("omega (10,3)", |b| b.iter(|| omega(black_box(&LatticePoint::unit(10, 3)))));
    g.bench_function("s0 quadrature", |b| b.iter(s0_quadrature));
    let case = SeriesTestCase::alpha_inverse_fifth();
    g.bench_function("summation alpha n^-5", |b| {
        b.iter(|| check_summation_alpha(black_box(&case), &ALPHA_Z_SAMPLES))
    });
    g.finish();
}

criterion_group!(benches, specfun, kernels, expansions, slow);
criterion_main!(benches);
