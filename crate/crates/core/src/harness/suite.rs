//! Acceptance experiments. Each one checks a convergence guarantee or an
//! oracle identity on small instances and reports pass/fail with the
//! measured quantities.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::brute::{self, Piece};
use crate::dualcert::{dual_supremum_1d, dual_value, window_step_bound};
use crate::error::{Error, Result};
use crate::geometry::{DualVector, Metric, ProxGeometry, Vector};
use crate::oracles::{gallery, gallery_with_seed, CompositeTerm, Function, MaxType, ProblemInstance, Truth};
use crate::proxmaps::{known_optimum_step, solve_phi_equation};
use crate::schedules::{GammaSchedule, ScheduleKind, StepSchedule};
use crate::sets::{Halfspace, SetDescriptor};
use crate::solvers::{
    run_basic, run_composite_known_opt, run_double_step, run_polyak_projected, run_switching_i, run_switching_ii,
    run_unbounded, RunResult, StepKind, SwitchingOptions,
};

/// Every tolerance the suite uses. Reports echo the whole table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub version: u32,
    pub linear_rate: f64,
    pub halving_abs: f64,
    pub comparator_band: (f64, f64),
    pub basic_delta: f64,
    pub basic_value: f64,
    pub averaged_rate: f64,
    pub double_step: f64,
    pub switching_feasibility: f64,
    pub switching_gap: f64,
    pub unbounded_gap: f64,
    pub oracle_agreement: f64,
    pub phi_relative: f64,
    pub step_bound: f64,
    pub dual_closed_form: f64,
    pub dual_supremum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            version: 1,
            linear_rate: 1e-9,
            halving_abs: 1e-12,
            comparator_band: (0.3, 3.0),
            basic_delta: 1e-9,
            basic_value: 1e-6,
            averaged_rate: 1e-9,
            double_step: 1e-9,
            switching_feasibility: 1e-9,
            switching_gap: 2e-3,
            unbounded_gap: 2e-3,
            oracle_agreement: 1e-4,
            phi_relative: 1e-10,
            step_bound: 1e-12,
            dual_closed_form: 1e-6,
            dual_supremum: 1e-3,
        }
    }
}

/// `(id, slug)` of every experiment.
pub const EXPERIMENTS: [(usize, &str); 9] = [
    (1, "linear-rate"),
    (2, "optstep"),
    (3, "basic-rate"),
    (4, "averaged-rate"),
    (5, "double-step"),
    (6, "switching"),
    (7, "unbounded"),
    (8, "oracle-equivalence"),
    (9, "noslater"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: usize,
    pub slug: String,
    pub passed: bool,
    /// One-line account of the measured quantities.
    pub summary: String,
    pub details: Vec<String>,
}

impl ExperimentReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.slug,
            self.summary
        )
    }
}

struct Checker {
    passed: bool,
    details: Vec<String>,
}

impl Checker {
    fn new() -> Self {
        Checker { passed: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.passed = false;
            if self.details.len() < 20 {
                self.details.push(what());
            }
        }
    }

    fn note(&mut self, line: String) {
        self.details.push(line);
    }
}

/// Runs the experiments whose slug contains `filter` (or whose id equals it),
/// in parallel on at most `SGM_THREADS` threads.
pub fn run_suite(filter: Option<&str>) -> Result<Vec<ExperimentReport>> {
    let selected: Vec<(usize, &str)> = EXPERIMENTS
        .iter()
        .copied()
        .filter(|(id, slug)| filter.is_none_or(|f| slug.contains(f) || f == id.to_string()))
        .collect();
    if selected.is_empty() {
        return Err(Error::config("filter", format!("no experiment matches `{}`", filter.unwrap_or(""))));
    }
    let threads = match std::env::var("SGM_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::config("SGM_THREADS", format!("expected a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("SGM_THREADS", e.to_string()))?;
    Ok(pool.install(|| selected.par_iter().map(|(id, _)| run_experiment(*id)).collect()))
}

pub fn run_experiment(id: usize) -> ExperimentReport {
    let slug = EXPERIMENTS.iter().find(|e| e.0 == id).map_or("unknown", |e| e.1);
    let tol = Tolerances::default();
    let outcome = match id {
        1 => linear_rate(&tol),
        2 => optstep(&tol),
        3 => basic_rate(&tol),
        4 => averaged_rate(&tol),
        5 => double_step(&tol),
        6 => switching(&tol),
        7 => unbounded(&tol),
        8 => oracle_equivalence(&tol),
        9 => noslater(&tol),
        _ => Err(Error::config("experiment", format!("unknown id {id}"))),
    };
    match outcome {
        Ok((c, summary)) => ExperimentReport { id, slug: slug.into(), passed: c.passed, summary, details: c.details },
        Err(e) => ExperimentReport {
            id,
            slug: slug.into(),
            passed: false,
            summary: format!("error: {e}"),
            details: Vec::new(),
        },
    }
}

type Outcome = Result<(Checker, String)>;

/// The ten strongly convex quadratic instances shared by experiments 1 and 4.
pub fn strongly_convex_instances() -> Result<Vec<ProblemInstance>> {
    (0..10u64)
        .map(|s| {
            let n = 2 + 2 * s as usize;
            let l = 2.0 + 3.0 * s as f64;
            let m = 1 + (s % 3) as usize;
            gallery_with_seed(&format!("sc-quadratic({n},1,{l},{m})"), s)
        })
        .collect()
}

fn linear_rate(tol: &Tolerances) -> Outcome {
    let mut c = Checker::new();
    let mut worst: f64 = 0.0;
    let mut worst_bound: f64 = 0.0;
    for p in strongly_convex_instances()? {
        let (l, mu) = (p.truth.smoothness.unwrap(), p.truth.strong_convexity.unwrap());
        let q = l / (mu + l);
        let xs = p.truth.xstar.clone().unwrap();
        let run = run_composite_known_opt(&p, 100)?;
        for r in &run.trace {
            let before = (&r.point - &xs).norm_squared();
            let after = (&r.next - &xs).norm_squared();
            c.check(after <= q * before + tol.linear_rate, || {
                format!("{} step {}: {after:e} > {q} * {before:e}", p.name, r.k)
            });
            if before > 1e-12 {
                if after / before > worst {
                    worst_bound = q;
                }
                worst = worst.max(after / before);
            }
        }
    }
    Ok((c, format!("worst measured contraction {worst:.4} against bound L/(mu+L) = {worst_bound:.4}")))
}

fn optstep(tol: &Tolerances) -> Outcome {
    let mut c = Checker::new();
    let p = gallery("optstep-halfspace")?;
    let run = run_composite_known_opt(&p, 41)?;
    let mut err: f64 = 0.0;
    for r in &run.trace {
        let e = (r.point[0] - 0.5f64.powi(r.k as i32)).abs();
        err = err.max(e);
        c.check(e <= tol.halving_abs, || format!("x_{}^(1) = {:e}", r.k, r.point[0]));
    }
    let classical = run_polyak_projected(&p, 10_000)?;
    let (lo, hi) = tol.comparator_band;
    let (mut min_s, mut max_s) = (f64::INFINITY, 0.0f64);
    for r in classical.trace.iter().skip(1000) {
        let s = r.point[0] * (r.k as f64).sqrt();
        min_s = min_s.min(s);
        max_s = max_s.max(s);
        c.check(s >= lo && s <= hi, || format!("classical x_{}^(1)·√k = {s}", r.k));
    }
    Ok((c, format!("halving error {err:.1e}; classical x_k·√k in [{min_s:.3}, {max_s:.3}] for k in [1000, 9999]")))
}

fn basic_rate(tol: &Tolerances) -> Outcome {
    let mut c = Checker::new();
    let p = gallery("norm-box(10)")?;
    let xs = p.truth.xstar.clone().unwrap();
    let fstar = p.truth.fstar.unwrap();
    let r0 = (&p.x0 - &xs).norm();
    let mut parts = Vec::new();
    for n in [100usize, 400, 1600] {
        let schedule = StepSchedule::new(ScheduleKind::Constant { horizon: n }, r0)?;
        let run = run_basic(&p, &schedule, n + 1)?;
        let bound = r0 / ((n + 1) as f64).sqrt();
        let dmin = run.trace.iter().filter_map(|r| r.delta).fold(f64::INFINITY, f64::min);
        let fmin = run.trace.iter().map(|r| r.f0).fold(f64::INFINITY, f64::min) - fstar;
        c.check(dmin <= bound + tol.basic_delta, || format!("N={n}: min delta {dmin} > {bound}"));
        c.check(fmin <= bound + tol.basic_value, || format!("N={n}: min gap {fmin} > {bound}"));
        parts.push(format!("N={n}: delta {dmin:.2e}, gap {fmin:.2e}, bound {bound:.3e}"));
    }
    Ok((c, parts.join("; ")))
}

fn averaged_rate(tol: &Tolerances) -> Outcome {
    let mut c = Checker::new();
    let t = 100usize;
    let mut worst_ratio: f64 = 0.0;
    for p in strongly_convex_instances()? {
        let l = p.truth.smoothness.unwrap();
        let xs = p.truth.xstar.clone().unwrap();
        let fstar = p.truth.fstar.unwrap();
        let run = run_composite_known_opt(&p, t)?;
        let values: Vec<f64> = run.trace.iter().map(|r| p.composite_value(&r.next)).collect();
        let avg = values.iter().sum::<f64>() / t as f64 - fstar;
        let bound = l * (&p.x0 - &xs).norm_squared() / (2.0 * t as f64);
        c.check(avg <= bound + tol.averaged_rate, || format!("{}: {avg:e} > {bound:e}", p.name));
        worst_ratio = worst_ratio.max(avg / bound);
    }
    Ok((c, format!("largest averaged gap / bound = {worst_ratio:.3e}")))
}

fn double_step(tol: &Tolerances) -> Outcome {
    let mut c = Checker::new();
    let p = gallery("disk-linear")?;
    let l1 = p.truth.constraint_smoothness.unwrap();
    let schedule = StepSchedule::with_diameter(ScheduleKind::InverseSqrt, p.truth.d.unwrap())?;
    let mut parts = Vec::new();
    for n in [64usize, 256] {
        let run = run_double_step(&p, &schedule, n)?;
        let (start, _) = run.window.unwrap();
        let h = schedule.h(start)?;
        let fset: Vec<_> = run.trace.iter().filter(|r| r.k >= start && r.step == StepKind::DoubleStepB).collect();
        c.check(!fset.is_empty(), || format!("N={n}: no objective steps in the window"));
        let fmax = fset.iter().map(|r| r.composite).fold(f64::NEG_INFINITY, f64::max);
        let bound = 0.5 * l1 * h * h;
        c.check(fmax <= bound + tol.double_step, || format!("N={n}: F(y_k) = {fmax:e} > {bound:e}"));
        let dstar = fset.iter().filter_map(|r| r.delta).fold(f64::INFINITY, f64::min);
        c.check(dstar < h, || format!("N={n}: delta* = {dstar} >= h = {h}"));
        parts.push(format!("N={n}: max F(y) {fmax:.2e} vs {bound:.2e}, delta* {dstar:.2e} vs h {h:.3e}"));
    }
    Ok((c, parts.join("; ")))
}

/// Feasibility and gap checks of the switching methods on one run.
fn check_switching(c: &mut Checker, p: &ProblemInstance, run: &RunResult, label: &str, tol: &Tolerances) -> Result<String> {
    let est = run.multipliers.as_ref().ok_or_else(|| Error::CertificateUnavailable(format!("{label}: no estimate")))?;
    let (start, end) = est.window;
    let h = window_step_bound(&run.trace, start).unwrap_or(f64::NAN);
    let objective_steps: Vec<_> =
        run.trace.iter().filter(|r| r.k >= start && r.k < end && r.step == StepKind::Objective).collect();
    c.check(!objective_steps.is_empty(), || format!("{label}: A_0(N) is empty"));
    let bounds = p.truth.constraint_bounds.clone().unwrap();
    let mut worst_feas = f64::NEG_INFINITY;
    for r in &objective_steps {
        let v = p
            .constraint_values(&r.point)
            .iter()
            .zip(&bounds)
            .map(|(f, m)| f / m)
            .fold(f64::NEG_INFINITY, f64::max);
        worst_feas = worst_feas.max(v);
    }
    c.check(worst_feas <= h + tol.switching_feasibility, || {
        format!("{label}: max f_i/M_i = {worst_feas:e} > h = {h:e}")
    });
    for r in &run.trace {
        c.check(r.lambda * r.grad_norm >= r.h - 1e-9 || r.lambda == 0.0, || {
            format!("{label}: step {} has lambda·|g| = {} < h = {}", r.k, r.lambda * r.grad_norm, r.h)
        });
    }
    let (Some(lambdas), Some(weighted)) = (&est.lambdas, est.weighted_objective) else {
        c.check(false, || format!("{label}: sigma_0 = 0"));
        return Ok(format!("{label}: no estimate"));
    };
    let dual = dual_value(p, lambdas, None)?;
    let gap = weighted - dual;
    let bound = p.truth.objective_bound.unwrap() * h;
    c.check(gap <= bound + tol.switching_gap, || format!("{label}: gap {gap:e} > M0 h = {bound:e}"));
    Ok(format!("{label}: gap {gap:.2e} <= {bound:.2e}"))
}

fn switching(tol: &Tolerances) -> Outcome {
    let mut c = Checker::new();
    let n = 4000;
    let mut parts = Vec::new();
    for name in ["switch-disk", "switch-halfspaces", "switch-ball-l1"] {
        let p = gallery(name)?;
        let schedule = StepSchedule::with_diameter(ScheduleKind::InverseSqrt, p.truth.d.unwrap())?;
        let first = run_switching_i(&p, &schedule, n, SwitchingOptions::default())?;
        parts.push(check_switching(&mut c, &p, &first, &format!("{name}/I"), tol)?);
        let second = run_switching_ii(&p, &schedule, n, SwitchingOptions::default())?;
        parts.push(check_switching(&mut c, &p, &second, &format!("{name}/II"), tol)?);
    }
    for part in &parts {
        c.note(part.clone());
    }
    Ok((c, format!("N={n}, six runs; {}", parts.join("; "))))
}

/// `(D + D₀)/√(2D₀) · M/ε`.
pub fn unbounded_threshold(d: f64, d0: f64, m: f64, eps: f64) -> f64 {
    (d + d0) / (2.0 * d0).sqrt() * m / eps
}

fn unbounded(tol: &Tolerances) -> Outcome {
    let mut c = Checker::new();
    let p = gallery("slater-unbounded")?;
    let (d, d0, eps) = (p.truth.d.unwrap(), p.truth.d0.unwrap(), 0.05);
    let gamma = GammaSchedule::Sqrt;
    let mut sigma_ok = true;
    let mut total = 0.0;
    for n in 1..=10_000usize {
        total += gamma.increment_weight(n - 1)?.sqrt();
        let s = total / gamma.gamma(n)?;
        if s < (n as f64 / 2.0).sqrt() {
            sigma_ok = false;
        }
    }
    c.check(sigma_ok, || "Sigma_N < sqrt(N/2) for some N <= 10^4".into());

    // M bounds the constraint subgradients everywhere; for the objective it is
    // measured along the run, and the run is repeated if the bound grows.
    let mut m = p.truth.constraint_bounds.as_ref().unwrap().iter().copied().fold(0.0, f64::max);
    let mut n = 1;
    let run = loop {
        let threshold = unbounded_threshold(d, d0, m, eps);
        while gamma.sigma(n)? <= threshold {
            n += 1;
        }
        let run = run_unbounded(&p, &gamma, d0, eps, n)?;
        let measured = run.trace.iter().map(|r| r.grad_norm).fold(m, f64::max);
        if measured <= m {
            break run;
        }
        m = measured;
    };
    let est = run.multipliers.as_ref().unwrap();
    let gap = match (&est.lambdas, est.best_objective) {
        (Some(l), Some(best)) => best - dual_value(&p, l, Some(d))?,
        _ => {
            c.check(false, || "sigma_0 = 0 after the threshold".into());
            f64::NAN
        }
    };
    c.check(gap <= eps + tol.unbounded_gap, || format!("gap {gap:e} > eps"));
    Ok((c, format!("N={n} (M={m:.3}), f0*(N) - phi_D = {gap:.3e} <= eps = {eps}; Sigma_N >= sqrt(N/2) up to 10^4: {sigma_ok}")))
}

/// A supported (geometry, set) pair for the oracle comparison.
struct Pair {
    label: &'static str,
    geometry: ProxGeometry,
    set: SetDescriptor,
}

fn oracle_pairs() -> Result<Vec<Pair>> {
    let v = |a: &[f64]| Vector::from_column_slice(a);
    let dense = Metric::dense(DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0]))?;
    let halfspaces = SetDescriptor::Halfspaces(vec![
        Halfspace::new(v(&[1.0, 1.0]), 1.0),
        Halfspace::new(v(&[-1.0, 0.5]), 0.8),
    ]);
    Ok(vec![
        Pair { label: "euclidean/whole-space", geometry: ProxGeometry::euclidean(), set: SetDescriptor::WholeSpace },
        Pair { label: "dense/whole-space", geometry: ProxGeometry::Euclidean(dense.clone()), set: SetDescriptor::WholeSpace },
        Pair {
            label: "diagonal/box",
            geometry: ProxGeometry::Euclidean(Metric::diagonal(v(&[1.0, 3.0]))?),
            set: SetDescriptor::Box { lower: v(&[-1.0, -0.5]), upper: v(&[1.0, 1.5]) },
        },
        Pair {
            label: "euclidean/ball",
            geometry: ProxGeometry::euclidean(),
            set: SetDescriptor::Ball { center: v(&[0.2, -0.1]), radius: 1.0 },
        },
        Pair { label: "euclidean/halfspaces", geometry: ProxGeometry::euclidean(), set: halfspaces.clone() },
        Pair { label: "dense/halfspaces", geometry: ProxGeometry::Euclidean(dense), set: halfspaces },
        Pair { label: "euclidean/simplex", geometry: ProxGeometry::euclidean(), set: SetDescriptor::Simplex },
        Pair { label: "entropy/simplex", geometry: ProxGeometry::Entropy, set: SetDescriptor::Simplex },
    ])
}

/// Random point of the set, away from the boundary of the simplex.
fn random_point(rng: &mut ChaCha8Rng, set: &SetDescriptor) -> Vector {
    loop {
        let x = match set {
            SetDescriptor::Simplex => {
                let t = rng.random_range(0.05..0.95);
                Vector::from_column_slice(&[t, 1.0 - t])
            }
            _ => Vector::from_fn(2, |_, _| rng.random_range(-1.5..1.5)),
        };
        if set.contains(&x, 0.0) {
            return x;
        }
    }
}

fn random_dual(rng: &mut ChaCha8Rng) -> DualVector {
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let len: f64 = rng.random_range(0.5..2.0);
    DualVector::from_column_slice(&[len * angle.cos(), len * angle.sin()])
}

fn arr(x: &Vector) -> [f64; 2] {
    [x[0], x[1]]
}

/// Constraints describing `set`; the simplex is handled by the segment search.
fn set_pieces(set: &SetDescriptor) -> Vec<Piece> {
    match set {
        SetDescriptor::WholeSpace | SetDescriptor::Simplex => Vec::new(),
        SetDescriptor::Box { lower, upper } => (0..2)
            .flat_map(|i| {
                let mut e = [0.0; 2];
                e[i] = 1.0;
                [Piece::Line { a: e, b: upper[i] }, Piece::Line { a: [-e[0], -e[1]], b: -lower[i] }]
            })
            .collect(),
        SetDescriptor::Ball { center, radius } => vec![Piece::Disk { c: arr(center), r: *radius }],
        SetDescriptor::Halfspaces(hs) => hs.iter().map(|h| Piece::Line { a: arr(&h.normal), b: h.offset }).collect(),
    }
}

/// Euclidean radius of the geometry ball of radius `reach`: `‖x‖₂ ≤ ‖x‖_B / √λ_min(B)`.
fn search_radius(geom: &ProxGeometry, reach: f64) -> f64 {
    let lmin = match geom.metric() {
        Some(Metric::Identity) | None => 1.0,
        Some(m) => {
            let b = DMatrix::from_fn(2, 2, |i, j| {
                let mut e = Vector::zeros(2);
                e[j] = 1.0;
                m.apply(&e)[i]
            });
            b.symmetric_eigenvalues().min()
        }
    };
    1.05 * reach / lmin.sqrt() + 1e-9
}

fn brute_minimize(
    geom: &ProxGeometry,
    set: &SetDescriptor,
    extra: &[Piece],
    center: &Vector,
    reach: f64,
    f: &dyn Fn(&Vector) -> f64,
) -> Option<Vector> {
    let mut pieces = set_pieces(set);
    pieces.extend_from_slice(extra);
    if matches!(set, SetDescriptor::Simplex) {
        brute::minimize_on_segment(&pieces, f)
    } else {
        brute::minimize(&pieces, arr(center), search_radius(geom, reach), f)
    }
}

fn oracle_equivalence(tol: &Tolerances) -> Outcome {
    let mut c = Checker::new();
    let cases = 200;
    let results: Vec<Result<(String, f64, f64, Checker)>> = oracle_pairs()?
        .into_par_iter()
        .enumerate()
        .map(|(idx, pair)| {
            let mut c = Checker::new();
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + idx as u64);
            let geom = &pair.geometry;
            let set = &pair.set;
            let (mut prox_err, mut level_err): (f64, f64) = (0.0, 0.0);
            let mut done = 0;
            while done < cases {
                let center = random_point(&mut rng, set);
                let g = random_dual(&mut rng);
                let h: f64 = rng.random_range(0.05..1.0);
                let step = match solve_phi_equation(geom, set, &center, &g, 0.5 * h * h) {
                    Ok(s) => s,
                    Err(Error::DirectionallyOptimal) => continue,
                    Err(e) => return Err(e),
                };
                let rel = (step.phi - 0.5 * h * h).abs() / (0.5 * h * h);
                c.check(rel <= tol.phi_relative, || format!("{}: phi relative error {rel:e}", pair.label));
                c.check(step.displacement <= h + tol.step_bound, || {
                    format!("{}: displacement {} > h {}", pair.label, step.displacement, h)
                });
                let objective = |x: &Vector| step.lambda * g.dot(x) + geom.bregman(&center, x).unwrap_or(f64::INFINITY);
                let brute = brute_minimize(geom, set, &[], &center, h, &objective)
                    .ok_or_else(|| Error::RootSearch("brute force found no feasible point".into()))?;
                let e = (&brute - &step.point).amax();
                prox_err = prox_err.max(e);
                c.check(e <= tol.oracle_agreement, || {
                    format!("{}: prox point differs by {e:e} (center {center:?}, g {g:?})", pair.label)
                });

                // Level projection for a model with one or two affine pieces.
                let pieces = if matches!(set, SetDescriptor::Ball { .. } | SetDescriptor::Simplex) { 1 } else { 1 + done % 2 };
                let components: Vec<Function> = (0..pieces)
                    .map(|_| Function::Linear { a: random_dual(&mut rng), c: rng.random_range(-0.5..0.5) })
                    .collect();
                let objective_fn = MaxType { components };
                let target = random_point(&mut rng, set);
                let fstar = objective_fn.value(&target) + 1e-3;
                if fstar >= objective_fn.value(&center) {
                    done += 1;
                    continue;
                }
                let problem = ProblemInstance {
                    name: "level".into(),
                    geometry: geom.clone(),
                    set: set.clone(),
                    objective: objective_fn.clone(),
                    psi: CompositeTerm::Zero,
                    constraints: Vec::new(),
                    x0: center.clone(),
                    truth: Truth::default(),
                };
                let proj = known_optimum_step(&problem, &center, fstar)?;
                let reach = geom.norm(&(&center - &target));
                let cuts: Vec<Piece> = objective_fn
                    .components
                    .iter()
                    .map(|f| match f {
                        Function::Linear { a, c } => Piece::Line { a: arr(a), b: fstar - c },
                        _ => unreachable!("affine pieces only"),
                    })
                    .collect();
                let breg = |x: &Vector| geom.bregman(&center, x).unwrap_or(f64::INFINITY);
                let brute = brute_minimize(geom, set, &cuts, &center, reach, &breg)
                    .ok_or_else(|| Error::RootSearch("brute force found no point in the level set".into()))?;
                let e = (&brute - &proj.point).amax();
                level_err = level_err.max(e);
                c.check(e <= tol.oracle_agreement, || {
                    format!(
                        "{}: level projection differs by {e:e} (center {:?}, pieces {:?}, level {fstar}, got {:?}, grid {:?})",
                        pair.label,
                        center.as_slice(),
                        objective_fn.components,
                        proj.point.as_slice(),
                        brute.as_slice()
                    )
                });
                done += 1;
            }
            Ok((pair.label.to_string(), prox_err, level_err, c))
        })
        .collect();
    let mut parts = Vec::new();
    for r in results {
        let (label, pe, le, sub) = r?;
        c.passed &= sub.passed;
        c.details.extend(sub.details);
        parts.push(format!("{label} {pe:.1e}/{le:.1e}"));
    }
    Ok((c, format!("{cases} cases per pair, max prox/level deviation: {}", parts.join(", "))))
}

fn noslater(tol: &Tolerances) -> Outcome {
    let mut c = Checker::new();
    let p = gallery("noslater-ball")?;
    let mut worst: f64 = 0.0;
    for j in 0..=200 {
        let l = j as f64 * 0.5;
        let v = dual_value(&p, &[l], None)?;
        let e = (v - (l - (1.0 + l * l).sqrt())).abs();
        worst = worst.max(e);
        c.check(e <= tol.dual_closed_form, || format!("lambda {l}: error {e:e}"));
    }
    let sup = dual_supremum_1d(&p, None)?;
    c.check(sup.unattained, || format!("supremum attained at lambda {}", sup.lambda));
    c.check(sup.value >= -tol.dual_supremum, || format!("supremum {} below tolerance", sup.value));
    if sup.unattained {
        c.note(format!(
            "warning: the dual optimum is not attained; multiplier estimates may approximate the dual value poorly (grid supremum {:.3e} at lambda {:.0e})",
            sup.value, sup.lambda
        ));
    }
    Ok((c, format!("max closed-form error {worst:.1e}; grid supremum {:.3e} at lambda {:.0e}, unattained: {}", sup.value, sup.lambda, sup.unattained)))
}
