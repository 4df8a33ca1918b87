use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use roughmass_core::conformal::{solve_conformal_factor, SolverOptions};
use roughmass_core::corpus::make_miao_corner;
use roughmass_core::curvature::{negative_part, scalar_pointwise};
use roughmass_core::mollify::{convolve, mollify_metric};
use roughmass_core::{GridSpec, MetricField, MollifierKernel, ScalarField};

fn convolution(c: &mut Criterion) {
    let grid = GridSpec::cube(3, 1.0, 0.04).unwrap();
    let f = ScalarField::from_fn(grid, |x| x[0].abs() + x[1] * x[2]).unwrap();
    let k = MollifierKernel::new(3);
    c.bench_function("convolve_3d_51^3_eps0.2", |b| {
        b.iter(|| convolve(black_box(&f), &k, 0.2).unwrap())
    });
}

fn curvature(c: &mut Criterion) {
    let e = make_miao_corner(3, 1.0).unwrap();
    let grid = GridSpec::cube(3, 1.4, 0.05).unwrap();
    let g = e.on_grid(&grid).unwrap();
    let k = MollifierKernel::new(3);
    let ge = mollify_metric(&g, &k, 0.2).unwrap();
    c.bench_function("scalar_curvature_mollified_corner", |b| {
        b.iter(|| scalar_pointwise(black_box(&ge)).unwrap())
    });
}

fn conformal_solve(c: &mut Criterion) {
    let grid = GridSpec::cube(3, 3.0, 0.2).unwrap();
    let g = MetricField::euclidean(grid.clone()).unwrap();
    let r = ScalarField::from_fn(grid, |x| -(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()).unwrap();
    let rneg = negative_part(&r);
    let mut group = c.benchmark_group("cg");
    group.sample_size(10);
    group.bench_function("conformal_solve_31^3", |b| {
        b.iter(|| solve_conformal_factor(black_box(&g), &rneg, SolverOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, convolution, curvature, conformal_solve);
criterion_main!(benches);
