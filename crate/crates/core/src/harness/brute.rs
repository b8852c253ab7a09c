//! Brute-force reference minimizers for two-dimensional subproblems.
//!
//! A minimizer of a smooth convex function over an intersection of
//! half-planes and disks lies in the interior, on one boundary curve or at
//! an intersection of two. Each case is searched by zooming grids.

use crate::geometry::Vector;

const FIRST_GRID: usize = 2001;
const GRID: usize = 81;
const HALF_WINDOW: f64 = 20.0;
const ROUNDS: usize = 120;
const GRID_2D: usize = 41;
const HALF_WINDOW_2D: f64 = 10.0;
const FEASIBILITY: f64 = 1e-11;

type Curve = Box<dyn Fn(f64) -> [f64; 2]>;

/// One constraint of the feasible region.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Piece {
    /// `⟨a, x⟩ ≤ b`.
    Line { a: [f64; 2], b: f64 },
    /// `‖x − c‖₂ ≤ r`.
    Disk { c: [f64; 2], r: f64 },
}

impl Piece {
    fn excess(&self, x: [f64; 2]) -> f64 {
        match *self {
            Piece::Line { a, b } => (a[0] * x[0] + a[1] * x[1] - b) / (1.0 + b.abs() + a[0].abs().max(a[1].abs()) * x[0].abs().max(x[1].abs())),
            Piece::Disk { c, r } => ((x[0] - c[0]).hypot(x[1] - c[1]) - r) / (1.0 + r),
        }
    }

    /// Point of the boundary curve at parameter `t`, and a parameter range
    /// covering the part of the curve within `radius` of `center`.
    fn curve(&self, center: [f64; 2], radius: f64) -> (Curve, f64, f64) {
        match *self {
            Piece::Line { a, b } => {
                let nn = a[0] * a[0] + a[1] * a[1];
                let s = (b - a[0] * center[0] - a[1] * center[1]) / nn;
                let foot = [center[0] + s * a[0], center[1] + s * a[1]];
                let len = nn.sqrt();
                let dir = [-a[1] / len, a[0] / len];
                (Box::new(move |t| [foot[0] + t * dir[0], foot[1] + t * dir[1]]), -radius, radius)
            }
            Piece::Disk { c, r } => (
                Box::new(move |t: f64| [c[0] + r * t.cos(), c[1] + r * t.sin()]),
                0.0,
                std::f64::consts::TAU,
            ),
        }
    }
}

fn intersections(p: &Piece, q: &Piece) -> Vec<[f64; 2]> {
    match (*p, *q) {
        (Piece::Line { a, b }, Piece::Line { a: c, b: d }) => {
            let det = a[0] * c[1] - a[1] * c[0];
            if det.abs() < 1e-14 {
                return Vec::new();
            }
            vec![[(b * c[1] - a[1] * d) / det, (a[0] * d - b * c[0]) / det]]
        }
        (Piece::Line { a, b }, Piece::Disk { c, r }) | (Piece::Disk { c, r }, Piece::Line { a, b }) => {
            let (foot, _, _) = Piece::Line { a, b }.curve(c, 0.0);
            let p0 = foot(0.0);
            let dist2 = (p0[0] - c[0]).powi(2) + (p0[1] - c[1]).powi(2);
            if dist2 > r * r {
                return Vec::new();
            }
            let t = (r * r - dist2).sqrt();
            vec![foot(-t), foot(t)]
        }
        (Piece::Disk { .. }, Piece::Disk { .. }) => Vec::new(),
    }
}

/// Minimizes `f` over `lo..hi` by successive grid refinement; `None` marks
/// points to skip.
fn zoom_1d(lo: f64, hi: f64, f: &dyn Fn(f64) -> Option<f64>) -> Option<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut best: Option<(f64, f64)> = None;
    for round in 0..ROUNDS {
        let grid = if round == 0 { FIRST_GRID } else { GRID };
        let cell = (hi - lo) / (grid - 1) as f64;
        for i in 0..grid {
            let t = lo + cell * i as f64;
            if let Some(v) = f(t).filter(|v| v.is_finite()) {
                if best.is_none_or(|b| v < b.0) {
                    best = Some((v, t));
                }
            }
        }
        let (_, t) = best?;
        let w = cell * HALF_WINDOW;
        if w < 1e-14 * (1.0 + t.abs()) {
            break;
        }
        (lo, hi) = (t - w, t + w);
    }
    best.map(|b| b.1)
}

fn zoom_2d(center: [f64; 2], radius: f64, f: &dyn Fn([f64; 2]) -> f64) -> [f64; 2] {
    let mut lo = [center[0] - radius, center[1] - radius];
    let mut width = 2.0 * radius;
    let mut best = (f(center), center);
    for round in 0..ROUNDS {
        let grid = if round == 0 { 201 } else { GRID_2D };
        let cell = width / (grid - 1) as f64;
        for i in 0..grid {
            for j in 0..grid {
                let x = [lo[0] + cell * i as f64, lo[1] + cell * j as f64];
                let v = f(x);
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        width = 2.0 * cell * HALF_WINDOW_2D;
        if width < 1e-14 {
            break;
        }
        lo = [best.1[0] - width / 2.0, best.1[1] - width / 2.0];
    }
    best.1
}

fn vector(x: [f64; 2]) -> Vector {
    Vector::from_column_slice(&x)
}

/// Minimizer of `f` over `{x : every piece holds}` within `radius` of `center`.
pub(crate) fn minimize(pieces: &[Piece], center: [f64; 2], radius: f64, f: &dyn Fn(&Vector) -> f64) -> Option<Vector> {
    let feasible = |x: [f64; 2], skip: &[usize]| {
        pieces.iter().enumerate().all(|(j, p)| skip.contains(&j) || p.excess(x) <= FEASIBILITY)
    };
    let value = |x: [f64; 2]| {
        let v = f(&vector(x));
        if v.is_finite() { v } else { f64::INFINITY }
    };
    let mut candidates = Vec::new();
    let interior = zoom_2d(center, radius, &value);
    if feasible(interior, &[]) {
        candidates.push(interior);
    }
    for (i, p) in pieces.iter().enumerate() {
        let (point, lo, hi) = p.curve(center, radius);
        let on_curve = |t: f64| {
            let x = point(t);
            feasible(x, &[i]).then(|| value(x))
        };
        if let Some(t) = zoom_1d(lo, hi, &on_curve) {
            candidates.push(point(t));
        }
        for (j, q) in pieces.iter().enumerate().skip(i + 1) {
            candidates.extend(intersections(p, q).into_iter().filter(|x| feasible(*x, &[i, j])));
        }
    }
    candidates
        .into_iter()
        .map(|x| (value(x), x))
        .filter(|(v, _)| v.is_finite())
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, x)| vector(x))
}

/// Minimizer of `f` over the segment `{(t, 1 − t) : t ∈ [0, 1]}` subject to `pieces`.
pub(crate) fn minimize_on_segment(pieces: &[Piece], f: &dyn Fn(&Vector) -> f64) -> Option<Vector> {
    let point = |t: f64| [t, 1.0 - t];
    let on_segment = |t: f64| {
        if !(0.0..=1.0).contains(&t) {
            return None;
        }
        let x = point(t);
        pieces.iter().all(|p| p.excess(x) <= FEASIBILITY).then(|| f(&vector(x)))
    };
    zoom_1d(0.0, 1.0, &on_segment).map(|t| vector(point(t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_onto_a_wedge_vertex() {
        let pieces = [Piece::Line { a: [1.0, 0.0], b: 0.0 }, Piece::Line { a: [0.0, 1.0], b: 0.0 }];
        let f = |x: &Vector| (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2);
        let x = minimize(&pieces, [1.0, 2.0], 5.0, &f).unwrap();
        assert!(x.amax() < 1e-9, "{x:?}");
    }

    #[test]
    fn projection_onto_a_line_and_disk() {
        let pieces = [Piece::Line { a: [1.0, 1.0], b: 1.0 }, Piece::Disk { c: [0.0, 0.0], r: 1.0 }];
        let f = |x: &Vector| (x[0] - 2.0).powi(2) + (x[1] - 2.0).powi(2);
        let x = minimize(&pieces, [2.0, 2.0], 5.0, &f).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-9 && (x[1] - 0.5).abs() < 1e-9, "{x:?}");
        let f = |x: &Vector| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2);
        let x = minimize(&pieces, [3.0, -1.0], 5.0, &f).unwrap();
        let expect = [3.0 / 10f64.sqrt(), -1.0 / 10f64.sqrt()];
        assert!((x[0] - expect[0]).abs() < 1e-7 && (x[1] - expect[1]).abs() < 1e-7, "{x:?}");
    }

    #[test]
    fn segment_with_a_cut() {
        let pieces = [Piece::Line { a: [1.0, 0.0], b: 0.25 }];
        let x = minimize_on_segment(&pieces, &|x| (x[0] - 0.9).powi(2)).unwrap();
        assert!((x[0] - 0.25).abs() < 1e-9);
    }
}
