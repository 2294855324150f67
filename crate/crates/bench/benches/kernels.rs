use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use squeezed_bench::{kernel_cases, sample_points};
use squeezed_core::specfun::faddeeva;
use squeezed_core::MemoryKernel;

fn faddeeva_bench(c: &mut Criterion) {
    let zs: Vec<Complex64> =
        [(0.3, 0.2), (3.0, 0.5), (12.0, 1e-3), (-5.0, 40.0)].iter().map(|&(x, y)| Complex64::new(x, y)).collect();
    c.bench_function("faddeeva/4 points", |b| {
        b.iter(|| zs.iter().map(|z| faddeeva(black_box(*z)).unwrap()).sum::<Complex64>())
    });
}

fn laplace_bench(c: &mut Criterion) {
    let pts = sample_points();
    let mut g = c.benchmark_group("kernel_laplace");
    for (name, m, band) in kernel_cases() {
        let k = MemoryKernel::new(m, band).unwrap();
        g.bench_function(name, |b| {
            b.iter(|| pts.iter().map(|s| k.laplace(black_box(*s)).unwrap().value).sum::<Complex64>())
        });
    }
    g.finish();
}

criterion_group!(benches, faddeeva_bench, laplace_bench);
criterion_main!(benches);
