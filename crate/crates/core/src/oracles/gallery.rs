//! Named test problems with analytically known solutions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CompositeTerm, Function, Growth, MaxType, ProblemInstance, Truth};
use crate::error::{Error, Result};
use crate::geometry::{Metric, ProxGeometry, Vector};
use crate::sets::{Halfspace, SetDescriptor};

/// Safety factor applied to the computed diameter bound.
pub const DIAMETER_SAFETY: f64 = 1.1;

/// Names accepted by [`gallery`], with default parameters spelled out.
pub fn gallery_names() -> Vec<&'static str> {
    vec![
        "optstep-halfspace",
        "noslater-ball",
        "sc-quadratic(5,1,10,2)",
        "norm-box(10)",
        "disk-linear",
        "switch-disk",
        "switch-halfspaces",
        "switch-ball-l1",
        "slater-unbounded",
        "quasi-ratio-box",
        "simplex-quadratic",
    ]
}

pub fn gallery(name: &str) -> Result<ProblemInstance> {
    gallery_with_seed(name, 0)
}

/// Builds a gallery problem; `seed` only affects randomized instances.
pub fn gallery_with_seed(name: &str, seed: u64) -> Result<ProblemInstance> {
    let (base, args) = split_name(name)?;
    let problem = match (base, args.len()) {
        ("optstep-halfspace", 0) => optstep_halfspace(),
        ("noslater-ball", 0) => noslater_ball(),
        ("sc-quadratic", 0) => sc_quadratic(5, 1.0, 10.0, 2, seed)?,
        ("sc-quadratic", 3) => sc_quadratic(args[0] as usize, args[1], args[2], 2, seed)?,
        ("sc-quadratic", 4) => sc_quadratic(args[0] as usize, args[1], args[2], args[3] as usize, seed)?,
        ("norm-box", 0) => norm_box(10, seed)?,
        ("norm-box", 1) => norm_box(args[0] as usize, seed)?,
        ("disk-linear", 0) => disk_linear(),
        ("switch-disk", 0) => switch_disk(),
        ("switch-halfspaces", 0) => switch_halfspaces(),
        ("switch-ball-l1", 0) => switch_ball_l1(),
        ("slater-unbounded", 0) => slater_unbounded(),
        ("quasi-ratio-box", 0) => quasi_ratio_box(),
        ("simplex-quadratic", 0) => simplex_quadratic(),
        _ => return Err(Error::UnknownProblem(name.to_string())),
    };
    Ok(problem)
}

fn split_name(name: &str) -> Result<(&str, Vec<f64>)> {
    let name = name.trim();
    let Some(open) = name.find('(') else {
        return Ok((name, Vec::new()));
    };
    let inner = name[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))?;
    let args = inner
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::UnknownProblem(name.to_string()))?;
    Ok((&name[..open], args))
}

/// `1.1 · sup_{x,y ∈ Q} β(x, y)` when the set is bounded and the supremum is finite.
pub fn declared_diameter(geometry: &ProxGeometry, set: &SetDescriptor) -> Option<f64> {
    let metric = geometry.metric()?;
    let sup = match set {
        SetDescriptor::Box { lower, upper } => {
            let width = upper - lower;
            match metric.diagonal_entries(width.len()) {
                Some(_) => 0.5 * metric.norm_sq(&width),
                None => {
                    let n = width.len();
                    if n > 20 {
                        return None;
                    }
                    (0u32..(1 << n))
                        .map(|mask| {
                            let d = Vector::from_fn(n, |i, _| {
                                if mask & (1 << i) != 0 { width[i] } else { -width[i] }
                            });
                            0.5 * metric.norm_sq(&d)
                        })
                        .fold(0.0, f64::max)
                }
            }
        }
        SetDescriptor::Ball { radius, center } => {
            let top = match metric {
                Metric::Dense { b, .. } => b.symmetric_eigenvalues().max(),
                _ => metric.diagonal_entries(center.len())?.max(),
            };
            0.5 * top * (2.0 * radius).powi(2)
        }
        SetDescriptor::Simplex => metric.scalar()?,
        _ => return None,
    };
    Some(DIAMETER_SAFETY * sup)
}

fn v(c: &[f64]) -> Vector {
    Vector::from_column_slice(c)
}

fn square_box(n: usize, r: f64) -> SetDescriptor {
    SetDescriptor::Box { lower: Vector::from_element(n, -r), upper: Vector::from_element(n, r) }
}

/// `½‖x − c‖²` scaled by `s` as a quadratic.
fn shifted_square(c: &Vector, s: f64) -> Function {
    let n = c.len();
    Function::Quadratic { h: DMatrix::identity(n, n) * s, b: -c * s, c: 0.5 * s * c.norm_squared() }
}

fn optstep_halfspace() -> ProblemInstance {
    ProblemInstance {
        name: "optstep-halfspace".into(),
        geometry: ProxGeometry::euclidean(),
        set: SetDescriptor::WholeSpace,
        // ½(x₁)² + ½(x₂ − 1)² − ½, expanded so that values near the optimum carry no cancellation.
        objective: MaxType::single(Function::Quadratic { h: DMatrix::identity(2, 2), b: v(&[0.0, -1.0]), c: 0.0 }),
        psi: CompositeTerm::Indicator(SetDescriptor::Halfspaces(vec![Halfspace::new(v(&[0.0, 1.0]), 0.0)])),
        constraints: Vec::new(),
        x0: v(&[1.0, 0.0]),
        truth: Truth {
            xstar: Some(v(&[0.0, 0.0])),
            fstar: Some(0.0),
            smoothness: Some(1.0),
            strong_convexity: Some(1.0),
            ..Truth::default()
        },
    }
}

/// Assembles an instance and fills the declared diameter from the set.
fn assemble(
    name: &str,
    set: SetDescriptor,
    objective: Function,
    constraints: Vec<Function>,
    x0: Vector,
    truth: Truth,
) -> ProblemInstance {
    let geometry = ProxGeometry::euclidean();
    let d = truth.d.or_else(|| declared_diameter(&geometry, &set));
    ProblemInstance {
        name: name.into(),
        geometry,
        set,
        objective: MaxType::single(objective),
        psi: CompositeTerm::Zero,
        constraints,
        x0,
        truth: Truth { d, ..truth },
    }
}

fn noslater_ball() -> ProblemInstance {
    assemble(
        "noslater-ball",
        SetDescriptor::Ball { center: v(&[0.0, 0.0]), radius: 1.0 },
        Function::Linear { a: v(&[0.0, 1.0]), c: 0.0 },
        vec![Function::Linear { a: v(&[-1.0, 0.0]), c: 1.0 }],
        v(&[0.0, 0.0]),
        Truth {
            xstar: Some(v(&[1.0, 0.0])),
            fstar: Some(0.0),
            constraint_bounds: Some(vec![1.0]),
            objective_bound: Some(1.0),
            ..Truth::default()
        },
    )
}

fn uniform_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

/// Random orthogonal matrix from the QR factorization of a uniform matrix.
fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

/// `max_i ½(x−x*)ᵀAᵢ(x−x*) + ⟨gᵢ, x−x*⟩ + F*` with `μ ≤ eig(Aᵢ) ≤ L` and
/// weights `wᵢ > 0` such that `Σ wᵢ gᵢ = 0`, so `x*` is the unique minimizer.
fn sc_quadratic(n: usize, mu: f64, l: f64, m: usize, seed: u64) -> Result<ProblemInstance> {
    if n == 0 || m == 0 || !(mu > 0.0) || !(l >= mu) {
        return Err(Error::config("sc-quadratic", "needs n >= 1, m >= 1 and 0 < mu <= L"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xstar = uniform_vector(&mut rng, n, -1.0, 1.0);
    let fstar = rng.random_range(-1.0..1.0);
    let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..1.0)).collect();
    let mut grads: Vec<Vector> = (0..m - 1).map(|_| uniform_vector(&mut rng, n, -1.0, 1.0)).collect();
    let mut last = Vector::zeros(n);
    for (w, g) in weights.iter().zip(&grads) {
        last -= g * *w;
    }
    grads.push(last / weights[m - 1]);

    let mut components = Vec::with_capacity(m);
    for (i, g) in grads.iter().enumerate() {
        let q = random_orthogonal(&mut rng, n);
        let eig = DVector::from_fn(n, |j, _| match j {
            0 if i == 0 => mu,
            1 if i == 0 => l,
            _ => rng.random_range(mu..=l),
        });
        let a = &q * DMatrix::from_diagonal(&eig) * q.transpose();
        let a = (&a + a.transpose()) * 0.5;
        // ½(x−x*)ᵀA(x−x*) + ⟨g, x−x*⟩ + F* expanded.
        let ax = &a * &xstar;
        components.push(Function::Quadratic {
            h: a.clone(),
            b: g - &ax,
            c: 0.5 * xstar.dot(&ax) - g.dot(&xstar) + fstar,
        });
    }
    let direction = uniform_vector(&mut rng, n, -1.0, 1.0);
    let radius = rng.random_range(1.0..3.0);
    let x0 = &xstar + direction.normalize() * radius;
    Ok(ProblemInstance {
        name: format!("sc-quadratic({n},{mu},{l},{m})"),
        geometry: ProxGeometry::euclidean(),
        set: SetDescriptor::WholeSpace,
        objective: MaxType { components },
        psi: CompositeTerm::Zero,
        constraints: Vec::new(),
        x0,
        truth: Truth {
            xstar: Some(xstar),
            fstar: Some(fstar),
            smoothness: Some(l),
            strong_convexity: Some(mu),
            ..Truth::default()
        },
    })
}

/// `‖x − x*‖₂` over `[−1, 1]ⁿ`, started at the vertex farthest from `x*`.
fn norm_box(n: usize, seed: u64) -> Result<ProblemInstance> {
    if n == 0 {
        return Err(Error::config("norm-box", "needs n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xstar = uniform_vector(&mut rng, n, -0.5, 0.5);
    let x0 = xstar.map(|c| if c >= 0.0 { -1.0 } else { 1.0 });
    Ok(assemble(
        &format!("norm-box({n})"),
        square_box(n, 1.0),
        Function::Norm { center: xstar.clone(), scale: 1.0, offset: 0.0 },
        Vec::new(),
        x0,
        Truth {
            xstar: Some(xstar),
            fstar: Some(0.0),
            objective_bound: Some(1.0),
            growth: Some(Growth::Linear { slope: 1.0 }),
            ..Truth::default()
        },
    ))
}

/// `min x₁ + x₂` s.t. `½‖x‖² − ½ ≤ 0` on `[−2, 2]²`.
fn disk_linear() -> ProblemInstance {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assemble(
        "disk-linear",
        square_box(2, 2.0),
        Function::Linear { a: v(&[1.0, 1.0]), c: 0.0 },
        vec![Function::Quadratic { h: DMatrix::identity(2, 2), b: v(&[0.0, 0.0]), c: -0.5 }],
        v(&[1.5, 1.5]),
        Truth {
            xstar: Some(v(&[-s, -s])),
            fstar: Some(-2f64.sqrt()),
            constraint_bounds: Some(vec![2.0 * 2f64.sqrt()]),
            objective_bound: Some(2f64.sqrt()),
            constraint_smoothness: Some(1.0),
            growth: Some(Growth::Linear { slope: 2f64.sqrt() }),
            multipliers: Some(vec![2f64.sqrt()]),
            ..Truth::default()
        },
    )
}

/// `min −x₁ − x₂` s.t. `‖x‖² − 1 ≤ 0` on `[−2, 2]²`.
fn switch_disk() -> ProblemInstance {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assemble(
        "switch-disk",
        square_box(2, 2.0),
        Function::Linear { a: v(&[-1.0, -1.0]), c: 0.0 },
        vec![Function::Quadratic { h: DMatrix::identity(2, 2) * 2.0, b: v(&[0.0, 0.0]), c: -1.0 }],
        v(&[-1.5, 0.5]),
        Truth {
            xstar: Some(v(&[s, s])),
            fstar: Some(-2f64.sqrt()),
            constraint_bounds: Some(vec![4.0 * 2f64.sqrt()]),
            objective_bound: Some(2f64.sqrt()),
            multipliers: Some(vec![s]),
            slater_point: Some(v(&[0.0, 0.0])),
            ..Truth::default()
        },
    )
}

/// `min ½‖x − (2,2)‖²` s.t. `x₁ + 2x₂ ≤ 2`, `2x₁ + x₂ ≤ 2` on `[−2, 2]²`.
fn switch_halfspaces() -> ProblemInstance {
    let t = 2.0 / 3.0;
    assemble(
        "switch-halfspaces",
        square_box(2, 2.0),
        shifted_square(&v(&[2.0, 2.0]), 1.0),
        vec![
            Function::Linear { a: v(&[1.0, 2.0]), c: -2.0 },
            Function::Linear { a: v(&[2.0, 1.0]), c: -2.0 },
        ],
        v(&[2.0, -2.0]),
        Truth {
            xstar: Some(v(&[t, t])),
            fstar: Some(16.0 / 9.0),
            constraint_bounds: Some(vec![5f64.sqrt(), 5f64.sqrt()]),
            objective_bound: Some(4.0 * 2f64.sqrt()),
            multipliers: Some(vec![4.0 / 9.0, 4.0 / 9.0]),
            slater_point: Some(v(&[0.0, 0.0])),
            ..Truth::default()
        },
    )
}

/// `min |x₁ − 1| + |x₂ − 1|` s.t. `x₁ ≤ ½`, `x₂ ≤ ¼` on the ball of radius 2.
fn switch_ball_l1() -> ProblemInstance {
    assemble(
        "switch-ball-l1",
        SetDescriptor::Ball { center: v(&[0.0, 0.0]), radius: 2.0 },
        Function::L1 { center: v(&[1.0, 1.0]), scale: 1.0, offset: 0.0 },
        vec![
            Function::Linear { a: v(&[1.0, 0.0]), c: -0.5 },
            Function::Linear { a: v(&[0.0, 1.0]), c: -0.25 },
        ],
        v(&[-1.0, 1.5]),
        Truth {
            xstar: Some(v(&[0.5, 0.25])),
            fstar: Some(1.25),
            constraint_bounds: Some(vec![1.0, 1.0]),
            objective_bound: Some(2f64.sqrt()),
            multipliers: Some(vec![1.0, 1.0]),
            slater_point: Some(v(&[0.0, 0.0])),
            ..Truth::default()
        },
    )
}

/// `min ½‖x − (2,1)‖²` s.t. `‖x‖₂ − 1 ≤ 0` on the whole plane, started at the origin.
fn slater_unbounded() -> ProblemInstance {
    let r5 = 5f64.sqrt();
    assemble(
        "slater-unbounded",
        SetDescriptor::WholeSpace,
        shifted_square(&v(&[2.0, 1.0]), 1.0),
        vec![Function::Norm { center: v(&[0.0, 0.0]), scale: 1.0, offset: -1.0 }],
        v(&[0.0, 0.0]),
        Truth {
            xstar: Some(v(&[2.0 / r5, 1.0 / r5])),
            fstar: Some(3.0 - r5),
            constraint_bounds: Some(vec![1.0]),
            d: Some(0.5),
            d0: Some(0.5),
            multipliers: Some(vec![r5 - 1.0]),
            slater_point: Some(v(&[0.0, 0.0])),
            ..Truth::default()
        },
    )
}

/// `min (x₁ + 2x₂ + 1) / (x₁ + x₂ + 3)` on `[0, 1]²`; optimum at a vertex.
fn quasi_ratio_box() -> ProblemInstance {
    let f = Function::Ratio { num: v(&[1.0, 2.0]), num_c: 1.0, den: v(&[1.0, 1.0]), den_c: 3.0 };
    let vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let (xstar, fstar) = vertices
        .iter()
        .map(|c| (v(c), f.value(&v(c))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("four vertices");
    assemble(
        "quasi-ratio-box",
        SetDescriptor::Box { lower: v(&[0.0, 0.0]), upper: v(&[1.0, 1.0]) },
        f,
        Vec::new(),
        v(&[1.0, 1.0]),
        Truth { xstar: Some(xstar), fstar: Some(fstar), ..Truth::default() },
    )
}

/// `min ½‖x − p‖²` over the simplex in the entropy geometry.
fn simplex_quadratic() -> ProblemInstance {
    let p = v(&[0.2, 0.3, 0.5]);
    ProblemInstance {
        name: "simplex-quadratic".into(),
        geometry: ProxGeometry::Entropy,
        set: SetDescriptor::Simplex,
        objective: MaxType::single(shifted_square(&p, 1.0)),
        psi: CompositeTerm::Zero,
        constraints: Vec::new(),
        x0: Vector::from_element(3, 1.0 / 3.0),
        truth: Truth {
            xstar: Some(p),
            fstar: Some(0.0),
            objective_bound: Some(0.8),
            ..Truth::default()
        },
    }
}
