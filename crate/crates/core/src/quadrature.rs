//! Globally adaptive Gauss–Kronrod quadrature in one and two dimensions.
//!
//! The 2-D rule is the tensor product of the 15-point Kronrod rule with its
//! embedded 7-point Gauss rule; the error estimate of a cell is the distance
//! between the two tensor results. Cells with the largest estimate are split
//! into quadrants until the total estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod abscissae (non-negative half); odd indices are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15 nodes on [-1, 1] with Kronrod weights and Gauss weights (zero off the
/// Gauss subset).
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for i in 0..7 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[i] = (-XGK[i], WGK[i], wg);
        out[14 - i] = (XGK[i], WGK[i], wg);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

/// Values a quadrature rule can accumulate.
pub trait QuadValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_cells: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_cells: 200_000,
        }
    }
}

impl QuadSettings {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }

    fn target<T: QuadValue>(&self, value: T) -> f64 {
        self.abs_tol.max(self.rel_tol * value.magnitude())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Cell<C, T> {
    region: C,
    value: T,
    error: f64,
}

impl<C, T> PartialEq for Cell<C, T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<C, T> Eq for Cell<C, T> {}
impl<C, T> PartialOrd for Cell<C, T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<C, T> Ord for Cell<C, T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = T::zero();
    let mut g = T::zero();
    for (x, wk, wg) in rule() {
        let v = f(c + h * x);
        k = k.add(v.scale(wk));
        if wg != 0.0 {
            g = g.add(v.scale(wg));
        }
    }
    let k = k.scale(h);
    let g = g.scale(h);
    (k, k.add(g.scale(-1.0)).magnitude())
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, settings: QuadSettings) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_pieces(f, &[a, b], settings)
}

/// Adaptive integral over consecutive intervals `points[i]..points[i+1]`;
/// interior points are breakpoints where `f` may be non-smooth.
pub fn integrate_pieces<T, F>(f: F, points: &[f64], settings: QuadSettings) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&f, w[0], w[1]);
            evaluations += 15;
            heap.push(Cell {
                region: (w[0], w[1]),
                value,
                error,
            });
        }
    }
    refine(
        heap,
        evaluations,
        settings,
        |(a, b): (f64, f64)| {
            let m = 0.5 * (a + b);
            [(a, m), (m, b)]
                .into_iter()
                .map(|(lo, hi)| {
                    let (value, error) = gk15(&f, lo, hi);
                    Cell {
                        region: (lo, hi),
                        value,
                        error,
                    }
                })
                .collect::<Vec<_>>()
        },
        15,
    )
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

fn gk15_2d<T: QuadValue, F: Fn(f64, f64) -> T>(f: &F, r: Rect) -> (T, f64) {
    let cx = 0.5 * (r.x0 + r.x1);
    let hx = 0.5 * (r.x1 - r.x0);
    let cy = 0.5 * (r.y0 + r.y1);
    let hy = 0.5 * (r.y1 - r.y0);
    let nodes = rule();
    let mut k = T::zero();
    let mut g = T::zero();
    for &(xi, wkx, wgx) in &nodes {
        let x = cx + hx * xi;
        let mut row_k = T::zero();
        let mut row_g = T::zero();
        for &(yi, wky, wgy) in &nodes {
            let v = f(x, cy + hy * yi);
            row_k = row_k.add(v.scale(wky));
            if wgy != 0.0 {
                row_g = row_g.add(v.scale(wgy));
            }
        }
        k = k.add(row_k.scale(wkx));
        if wgx != 0.0 {
            g = g.add(row_g.scale(wgx));
        }
    }
    let area = hx * hy;
    let k = k.scale(area);
    let g = g.scale(area);
    (k, k.add(g.scale(-1.0)).magnitude())
}

/// Adaptive integral of `f(x, y)` over `[x0, x1] × [y0, y1]`, starting from a
/// uniform `initial_split × initial_split` partition.
pub fn integrate_2d<T, F>(
    f: F,
    x_range: (f64, f64),
    y_range: (f64, f64),
    initial_split: usize,
    settings: QuadSettings,
) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64, f64) -> T,
{
    let n = initial_split.max(1);
    let dx = (x_range.1 - x_range.0) / n as f64;
    let dy = (y_range.1 - y_range.0) / n as f64;
    let mut heap = BinaryHeap::new();
    for i in 0..n {
        for j in 0..n {
            let r = Rect {
                x0: x_range.0 + i as f64 * dx,
                x1: x_range.0 + (i + 1) as f64 * dx,
                y0: y_range.0 + j as f64 * dy,
                y1: y_range.0 + (j + 1) as f64 * dy,
            };
            let (value, error) = gk15_2d(&f, r);
            heap.push(Cell {
                region: r,
                value,
                error,
            });
        }
    }
    let evaluations = 225 * n * n;
    refine(
        heap,
        evaluations,
        settings,
        |r: Rect| {
            let mx = 0.5 * (r.x0 + r.x1);
            let my = 0.5 * (r.y0 + r.y1);
            [
                Rect {
                    x0: r.x0,
                    x1: mx,
                    y0: r.y0,
                    y1: my,
                },
                Rect {
                    x0: mx,
                    x1: r.x1,
                    y0: r.y0,
                    y1: my,
                },
                Rect {
                    x0: r.x0,
                    x1: mx,
                    y0: my,
                    y1: r.y1,
                },
                Rect {
                    x0: mx,
                    x1: r.x1,
                    y0: my,
                    y1: r.y1,
                },
            ]
            .into_iter()
            .map(|q| {
                let (value, error) = gk15_2d(&f, q);
                Cell {
                    region: q,
                    value,
                    error,
                }
            })
            .collect::<Vec<_>>()
        },
        225,
    )
}

fn refine<C: Copy, T: QuadValue, S>(
    mut heap: BinaryHeap<Cell<C, T>>,
    mut evaluations: usize,
    settings: QuadSettings,
    split: S,
    evals_per_cell: usize,
) -> Result<QuadResult<T>>
where
    S: Fn(C) -> Vec<Cell<C, T>>,
{
    let totals = |heap: &BinaryHeap<Cell<C, T>>| {
        heap.iter()
            .fold((T::zero(), 0.0), |(v, e), c| (v.add(c.value), e + c.error))
    };
    let (mut value, mut error) = totals(&heap);
    let mut refinements = 0usize;
    while error > settings.target(value) {
        if heap.len() >= settings.max_cells {
            return Err(Error::QuadratureNonConvergence {
                achieved: error,
                requested: settings.target(value),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let children = split(worst.region);
        evaluations += evals_per_cell * children.len();
        value = value.add(worst.value.scale(-1.0));
        error -= worst.error;
        for c in children {
            value = value.add(c.value);
            error += c.error;
            heap.push(c);
        }
        refinements += 1;
        // running sums drift; recompute occasionally
        if refinements.is_multiple_of(256) {
            (value, error) = totals(&heap);
        }
    }
    let (value, error) = totals(&heap);
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}
