#![allow(dead_code)]

use lattice_riemann::{Element, Expr, Func, LatticeFunction, OrderInterval, Partition};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn e(v: &[f64]) -> Element {
    Element::new(v.to_vec()).unwrap()
}

pub fn interval(lo: &[f64], hi: &[f64]) -> OrderInterval {
    OrderInterval::new(e(lo), e(hi)).unwrap()
}

pub fn kernel(src: &str, dim: usize) -> LatticeFunction {
    LatticeFunction::parse(&[src], dim).unwrap()
}

/// Smooth kernels whose extrema come out exact.
pub const EXACT_KERNELS: &[&str] = &[
    "t",
    "t^2",
    "t^3 - t",
    "sin(t)",
    "exp(t)",
    "3*t^2 - 2*t",
    "cos(2*t) + t",
    "1/(t^2 + 1)",
];

pub fn random_element(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Element {
    Element::new((0..dim).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

/// Coordinates drawn from a small integer grid, so ties are common.
pub fn grid_element(rng: &mut ChaCha8Rng, dim: usize, span: i32) -> Element {
    Element::new(
        (0..dim)
            .map(|_| rng.gen_range(-span..=span) as f64)
            .collect(),
    )
    .unwrap()
}

pub fn random_interval(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> OrderInterval {
    let a = random_element(rng, dim, lo, hi);
    let b = random_element(rng, dim, lo, hi);
    OrderInterval::spanned_by(&a, &b).unwrap()
}

/// Per-atom coordinate lists for kernels picked independently on each atom.
pub fn random_kernels(
    rng: &mut ChaCha8Rng,
    dim: usize,
    pool: &[&str],
) -> (Vec<String>, LatticeFunction) {
    let picks: Vec<String> = (0..dim)
        .map(|_| pool.choose(rng).unwrap().to_string())
        .collect();
    let refs: Vec<&str> = picks.iter().map(String::as_str).collect();
    let f = LatticeFunction::parse(&refs, dim).unwrap();
    (picks, f)
}

/// A random chain partition of `interval` with a cell count drawn from
/// `cells`: each atom gets its own sorted list
/// of `cells - 1` interior values, zipped into points. Values snap to a grid of
/// `grid` steps so that refinements share coordinates.
pub fn random_partition(
    rng: &mut ChaCha8Rng,
    interval: &OrderInterval,
    cells: std::ops::Range<usize>,
    grid: usize,
) -> Partition {
    let cells = rng.gen_range(cells);
    let dim = interval.dim();
    let mut columns = Vec::with_capacity(dim);
    for i in 0..dim {
        let (lo, hi) = (interval.lo().get(i), interval.hi().get(i));
        let mut col: Vec<f64> = (0..cells - 1)
            .map(|_| lo + (rng.gen_range(0..=grid) as f64 / grid as f64) * (hi - lo))
            .collect();
        col.push(lo);
        col.push(hi);
        col.sort_by(f64::total_cmp);
        col[0] = lo;
        col[cells] = hi;
        columns.push(col);
    }
    let points = (0..=cells)
        .map(|j| Element::new(columns.iter().map(|c| c[j]).collect()).unwrap())
        .collect();
    Partition::new(points, interval.clone()).unwrap()
}

/// Random expression tree with at most `depth` levels of nesting.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.5) {
            Expr::Var
        } else {
            Expr::Const(random_literal(rng))
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_expr(rng, depth - 1));
    match rng.gen_range(0..8) {
        0 => Expr::Neg(sub(rng)),
        1 => Expr::Add(sub(rng), sub(rng)),
        2 => Expr::Sub(sub(rng), sub(rng)),
        3 => Expr::Mul(sub(rng), sub(rng)),
        4 => Expr::Div(sub(rng), sub(rng)),
        5 => Expr::Pow(sub(rng), rng.gen_range(-3..=5)),
        _ => {
            let func = *[
                Func::Sin,
                Func::Cos,
                Func::Exp,
                Func::Log,
                Func::Abs,
                Func::Sqrt,
                Func::Min,
                Func::Max,
            ]
            .choose(rng)
            .unwrap();
            let args = (0..func.arity())
                .map(|_| random_expr(rng, depth - 1))
                .collect();
            Expr::Call(func, args)
        }
    }
}

fn random_literal(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..3) {
        0 => rng.gen_range(0..10) as f64,
        1 => rng.gen_range(0..1000) as f64 / 100.0,
        _ => rng.gen_range(0.0..10.0),
    }
}

/// Random smooth expression, defined everywhere and of moderate size on
/// `[-2, 2]`.
pub fn random_smooth_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.6) {
            Expr::Var
        } else {
            Expr::Const(rng.gen_range(0..30) as f64 / 10.0)
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_smooth_expr(rng, depth - 1));
    match rng.gen_range(0..8) {
        0 => Expr::Neg(sub(rng)),
        1 => Expr::Add(sub(rng), sub(rng)),
        2 => Expr::Sub(sub(rng), sub(rng)),
        3 => Expr::Mul(sub(rng), sub(rng)),
        4 => {
            let den = Expr::Add(Box::new(Expr::Pow(sub(rng), 2)), Box::new(Expr::Const(1.0)));
            Expr::Div(sub(rng), Box::new(den))
        }
        5 => Expr::Pow(sub(rng), rng.gen_range(0..=3)),
        6 => Expr::Call(
            *[Func::Sin, Func::Cos].choose(rng).unwrap(),
            vec![random_smooth_expr(rng, depth - 1)],
        ),
        _ => Expr::Call(
            Func::Exp,
            vec![Expr::Call(
                Func::Sin,
                vec![random_smooth_expr(rng, depth - 1)],
            )],
        ),
    }
}

/// Composite Simpson refined adaptively until the local error estimate is
/// below `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}

/// Closed-form scalar functions matching [`EXACT_KERNELS`] entries used by
/// the oracle checks.
pub fn scalar(src: &str) -> fn(f64) -> f64 {
    match src {
        "t" => |t| t,
        "t^2" => |t| t * t,
        "t^3" => |t| t * t * t,
        "t^3 - t" => |t| t * t * t - t,
        "sin(t)" => f64::sin,
        "exp(t)" => f64::exp,
        "3*t^2 - 2*t" => |t| 3.0 * t * t - 2.0 * t,
        "cos(2*t) + t" => |t| (2.0 * t).cos() + t,
        "1/(t^2 + 1)" => |t| 1.0 / (t * t + 1.0),
        other => panic!("no scalar form for {other}"),
    }
}
