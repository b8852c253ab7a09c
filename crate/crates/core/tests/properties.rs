use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use sgm_core::dualcert::dual_value;
use sgm_core::oracles::gallery;
use sgm_core::proxmaps::{prox_map, prox_step, solve_phi_equation};
use sgm_core::schedules::{GammaSchedule, ScheduleKind, StepSchedule};
use sgm_core::solvers::{run_switching_i, run_switching_ii, SwitchingOptions};
use sgm_core::{Error, Metric, ProxGeometry, SetDescriptor, Vector};

fn vec2() -> impl Strategy<Value = Vector> {
    prop::array::uniform2(-2.0f64..2.0).prop_map(|a| Vector::from_column_slice(&a))
}

fn simplex_point(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let v = DVector::from_vec(w);
        let s = v.sum();
        v / s
    })
}

/// Euclidean geometries with identity, diagonal and dense metrics, paired with sets.
fn euclidean_case() -> impl Strategy<Value = (ProxGeometry, SetDescriptor)> {
    let metric = prop_oneof![
        Just(Metric::Identity),
        prop::array::uniform2(0.3f64..3.0).prop_map(|d| Metric::diagonal(DVector::from_column_slice(&d)).unwrap()),
        (0.5f64..3.0, 0.5f64..3.0, -0.4f64..0.4).prop_map(|(a, b, c)| {
            let off = c * (a * b).sqrt();
            Metric::dense(DMatrix::from_row_slice(2, 2, &[a, off, off, b])).unwrap()
        }),
    ];
    let set = prop_oneof![
        Just(SetDescriptor::WholeSpace),
        Just(SetDescriptor::Box {
            lower: Vector::from_column_slice(&[-1.0, -0.5]),
            upper: Vector::from_column_slice(&[1.0, 1.5]),
        }),
        Just(SetDescriptor::Halfspaces(vec![sgm_core::Halfspace::new(Vector::from_column_slice(&[1.0, 1.0]), 1.0)])),
    ];
    (metric, set).prop_filter_map("unsupported pair", |(m, s)| {
        let ok = !matches!((&m, &s), (Metric::Dense { .. }, SetDescriptor::Box { .. }));
        ok.then_some((ProxGeometry::Euclidean(m), s))
    })
}

fn into_set(set: &SetDescriptor, geom: &ProxGeometry, x: Vector) -> Vector {
    set.project(geom.metric().unwrap(), &x).unwrap()
}

proptest! {
    #[test]
    fn euclidean_bregman_is_half_squared_norm((geom, _) in euclidean_case(), x in vec2(), y in vec2()) {
        let b = geom.bregman(&x, &y).unwrap();
        let n = geom.norm(&(&x - &y));
        prop_assert!((b - 0.5 * n * n).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn entropy_bregman_is_strongly_convex_in_l1(x in simplex_point(4), y in simplex_point(4)) {
        let geom = ProxGeometry::Entropy;
        let b = geom.bregman(&x, &y).unwrap();
        let n = geom.norm(&(&x - &y));
        prop_assert!(b >= 0.5 * n * n - 1e-12);
    }

    /// `λ⟨g, T − u⟩ ≤ β(x̄, u) − β(T, u) − β(x̄, T)` for every `u ∈ Q`.
    #[test]
    fn prox_three_point_inequality((geom, set) in euclidean_case(), c in vec2(), g in vec2(), u in vec2(), lambda in 0.0f64..3.0) {
        let center = into_set(&set, &geom, c);
        let u = into_set(&set, &geom, u);
        let t = prox_map(&geom, &set, &center, &(&g * lambda)).unwrap();
        let lhs = lambda * g.dot(&(&t - &u));
        let rhs = geom.bregman(&center, &u).unwrap() - geom.bregman(&t, &u).unwrap() - geom.bregman(&center, &t).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()), "{lhs} > {rhs}");
    }

    #[test]
    fn entropy_three_point_inequality(c in simplex_point(3), u in simplex_point(3), g in prop::array::uniform3(-2.0f64..2.0), lambda in 0.0f64..3.0) {
        let geom = ProxGeometry::Entropy;
        let g = Vector::from_column_slice(&g);
        let t = prox_map(&geom, &SetDescriptor::Simplex, &c, &(&g * lambda)).unwrap();
        let lhs = lambda * g.dot(&(&t - &u));
        let rhs = geom.bregman(&c, &u).unwrap() - geom.bregman(&t, &u).unwrap() - geom.bregman(&c, &t).unwrap();
        prop_assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
    }

    /// Solving `φ(λ) = ½h²` moves the center by at most `h` and is exact to 1e-10.
    #[test]
    fn step_equation_displacement_bound((geom, set) in euclidean_case(), c in vec2(), g in vec2(), h in 0.01f64..2.0) {
        let center = into_set(&set, &geom, c);
        match solve_phi_equation(&geom, &set, &center, &g, 0.5 * h * h) {
            Ok(r) => {
                prop_assert!(r.displacement <= h + 1e-12, "{} > {h}", r.displacement);
                prop_assert!((r.phi - 0.5 * h * h).abs() <= 1e-10 * 0.5 * h * h);
            }
            Err(Error::DirectionallyOptimal | Error::ZeroSubgradient | Error::UnboundedPhi { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn phi_is_nondecreasing((geom, set) in euclidean_case(), c in vec2(), g in vec2(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let center = into_set(&set, &geom, c);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p = prox_step(&geom, &set, &center, &g, lo).unwrap().phi;
        let q = prox_step(&geom, &set, &center, &g, hi).unwrap().phi;
        prop_assert!(p >= -1e-12);
        prop_assert!(q >= p - 1e-10 * (1.0 + p.abs()));
    }

    /// `k + a(k)` is nondecreasing and `a(k)` is the minimal delay reaching one.
    #[test]
    fn divergence_delay_is_minimal_and_monotone(scale in 0.1f64..5.0, k in 0usize..500) {
        let s = StepSchedule::new(ScheduleKind::InverseSqrt, scale).unwrap();
        let a = s.divergence_delay(k).unwrap();
        let b = s.divergence_delay(k + 1).unwrap();
        prop_assert!(k + a <= k + 1 + b);
        let sum = |lo: usize, hi: usize| (lo..=hi).map(|i| s.tau_sq(i).unwrap()).sum::<f64>();
        prop_assert!(sum(k, k + a) >= 1.0 - 1e-12);
        if a > 0 {
            prop_assert!(sum(k, k + a - 1) < 1.0);
        }
    }

    #[test]
    fn sigma_lower_bound(n in 1usize..3000) {
        let s = GammaSchedule::Sqrt.sigma(n).unwrap();
        prop_assert!(s >= (n as f64 / 2.0).sqrt());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// `φ(λ) ≤ f₀(x)` for feasible `x`.
    #[test]
    fn weak_duality(name in prop::sample::select(vec!["switch-disk", "switch-halfspaces", "switch-ball-l1", "disk-linear"]),
                    l in prop::collection::vec(0.0f64..5.0, 2), x in vec2()) {
        let p = gallery(name).unwrap();
        let lambdas = &l[..p.constraints.len()];
        if p.set.contains(&x, 0.0) && p.max_constraint(&x) <= 0.0 {
            let phi = dual_value(&p, lambdas, None).unwrap();
            prop_assert!(phi <= p.f0(&x) + 1e-6, "{phi} > {}", p.f0(&x));
        }
    }

    /// A smaller feasible set can only raise the dual function.
    #[test]
    fn restriction_is_monotone(l in 0.0f64..5.0, d in 0.05f64..4.0) {
        let p = gallery("slater-unbounded").unwrap();
        let full = dual_value(&p, &[l], None).unwrap();
        let restricted = dual_value(&p, &[l], Some(d)).unwrap();
        prop_assert!(restricted >= full - 1e-9);
    }
}

/// `f₀(x_k) ≥ f₀* − Σλᵢ*·Mᵢ · maxᵢ fᵢ(x_k)/Mᵢ` along switching runs.
#[test]
fn objective_lower_bound_along_traces() {
    for name in ["switch-disk", "switch-halfspaces", "switch-ball-l1"] {
        let p = gallery(name).unwrap();
        let t = &p.truth;
        let (fstar, lambdas, bounds) =
            (t.fstar.unwrap(), t.multipliers.clone().unwrap(), t.constraint_bounds.clone().unwrap());
        let weight: f64 = lambdas.iter().zip(&bounds).map(|(l, m)| l * m).sum();
        let s = StepSchedule::with_diameter(ScheduleKind::InverseSqrt, t.d.unwrap()).unwrap();
        for run in [
            run_switching_i(&p, &s, 400, SwitchingOptions::default()).unwrap(),
            run_switching_ii(&p, &s, 400, SwitchingOptions::default()).unwrap(),
        ] {
            for r in &run.trace {
                let ratio = p
                    .constraint_values(&r.point)
                    .iter()
                    .zip(&bounds)
                    .map(|(f, m)| f / m)
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(p.f0(&r.point) >= fstar - weight * ratio - 1e-9, "{name} step {}", r.k);
            }
        }
    }
}
