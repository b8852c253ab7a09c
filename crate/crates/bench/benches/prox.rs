use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::{DMatrix, DVector};
use sgm_core::oracles::gallery;
use sgm_core::proxmaps::{known_optimum_step, solve_phi_equation};
use sgm_core::{Halfspace, Metric, ProxGeometry, SetDescriptor, Vector};

fn step_equation(c: &mut Criterion) {
    let v = |a: &[f64]| Vector::from_column_slice(a);
    let g = v(&[0.7, -1.3]);
    let cases = [
        ("euclidean/whole-space", ProxGeometry::euclidean(), SetDescriptor::WholeSpace, v(&[0.3, 0.1])),
        (
            "euclidean/ball",
            ProxGeometry::euclidean(),
            SetDescriptor::Ball { center: v(&[0.0, 0.0]), radius: 1.0 },
            v(&[0.3, 0.1]),
        ),
        (
            "dense/halfspaces",
            ProxGeometry::Euclidean(Metric::dense(DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0])).unwrap()),
            SetDescriptor::Halfspaces(vec![Halfspace::new(v(&[1.0, 1.0]), 1.0), Halfspace::new(v(&[-1.0, 0.5]), 0.8)]),
            v(&[0.3, 0.1]),
        ),
        ("entropy/simplex", ProxGeometry::Entropy, SetDescriptor::Simplex, v(&[0.4, 0.6])),
    ];
    let mut group = c.benchmark_group("solve_phi_equation");
    for (label, geom, set, center) in &cases {
        group.bench_function(*label, |b| b.iter(|| solve_phi_equation(geom, set, black_box(center), black_box(&g), 0.02)));
    }
    group.finish();

    let entropy = ProxGeometry::Entropy;
    let center = DVector::from_element(50, 1.0 / 50.0);
    let g = DVector::from_fn(50, |i, _| (i as f64 * 0.37).sin());
    c.bench_function("solve_phi_equation/entropy-50", |b| {
        b.iter(|| solve_phi_equation(&entropy, &SetDescriptor::Simplex, black_box(&center), black_box(&g), 0.01))
    });
}

fn level_projection(c: &mut Criterion) {
    let p = gallery("optstep-halfspace").unwrap();
    let x = Vector::from_column_slice(&[0.25, 0.0]);
    c.bench_function("known_optimum_step/optstep", |b| b.iter(|| known_optimum_step(&p, black_box(&x), 0.0)));
}

criterion_group!(benches, step_equation, level_projection);
criterion_main!(benches);
