use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sgm_core::dualcert::dual_value;
use sgm_core::oracles::{gallery, gallery_with_seed};
use sgm_core::schedules::{GammaSchedule, ScheduleKind, StepSchedule};
use sgm_core::solvers::{run_composite_known_opt, run_double_step, run_switching_i, run_unbounded, SwitchingOptions};

fn methods(c: &mut Criterion) {
    let sc = gallery_with_seed("sc-quadratic(20,1,20,3)", 1).unwrap();
    c.bench_function("composite/sc-quadratic-20/100", |b| b.iter(|| run_composite_known_opt(black_box(&sc), 100)));

    let disk = gallery("disk-linear").unwrap();
    let s = StepSchedule::with_diameter(ScheduleKind::InverseSqrt, disk.truth.d.unwrap()).unwrap();
    c.bench_function("double-step/disk-linear/256", |b| b.iter(|| run_double_step(black_box(&disk), &s, 256)));

    let sw = gallery("switch-disk").unwrap();
    let s = StepSchedule::with_diameter(ScheduleKind::InverseSqrt, sw.truth.d.unwrap()).unwrap();
    c.bench_function("switch1/switch-disk/1000", |b| {
        b.iter(|| run_switching_i(black_box(&sw), &s, 1000, SwitchingOptions::default()))
    });

    let un = gallery("slater-unbounded").unwrap();
    c.bench_function("unbounded/slater-unbounded/1000", |b| {
        b.iter(|| run_unbounded(black_box(&un), &GammaSchedule::Sqrt, 0.5, 0.05, 1000))
    });
}

fn duals(c: &mut Criterion) {
    let p = gallery("switch-halfspaces").unwrap();
    c.bench_function("dual_value/switch-halfspaces", |b| b.iter(|| dual_value(&p, black_box(&[0.4, 0.5]), None)));
}

criterion_group!(benches, methods, duals);
criterion_main!(benches);
