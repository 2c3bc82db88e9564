//! Functions `[a, b] → E` on the atomic carrier.
//!
//! A [`LatticeFunction`] is either coordinatewise (one scalar kernel per
//! atom, which makes it locally band preserving by construction) or a general
//! map carrying no such guarantee. General maps exist to reproduce
//! counterexamples; most operations reject them.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{differentiate, parse, EvalError, EvalErrorKind, Expr, Func};
use crate::lattice::{Band, Element, OrderInterval};

/// Sign-grid resolution for critical point isolation.
const ROOT_GRID: usize = 1024;
/// Bisection stops once the bracket is this narrow.
const ROOT_WIDTH: f64 = 1e-12;
/// Maximum number of sub-cells a sampled cell is refined to.
const MAX_SAMPLE_SEGMENTS: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    #[default]
    None,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type MapFn = Arc<dyn Fn(&Element) -> Result<Element> + Send + Sync>;

#[derive(Clone)]
pub enum KernelBody {
    Expr(Expr),
    Custom(ScalarFn),
}

/// One scalar section `t ↦ kernel(t)` of a coordinatewise function.
#[derive(Clone)]
pub struct ScalarKernel {
    body: KernelBody,
    monotone: Monotonicity,
}

impl fmt::Debug for ScalarKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            KernelBody::Expr(e) => write!(f, "ScalarKernel({e}, {:?})", self.monotone),
            KernelBody::Custom(_) => write!(f, "ScalarKernel(<custom>, {:?})", self.monotone),
        }
    }
}

impl ScalarKernel {
    pub fn from_expr(expr: Expr) -> Self {
        Self {
            body: KernelBody::Expr(expr),
            monotone: Monotonicity::None,
        }
    }

    pub fn parse(src: &str) -> Result<Self> {
        Ok(Self::from_expr(parse(src)?))
    }

    pub fn identity() -> Self {
        Self::from_expr(Expr::Var).with_monotone(Monotonicity::Increasing)
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(Expr::constant(c))
    }

    pub fn power(p: i32) -> Self {
        Self::from_expr(Expr::Pow(Box::new(Expr::Var), p))
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, monotone: Monotonicity) -> Self {
        Self {
            body: KernelBody::Custom(Arc::new(f)),
            monotone,
        }
    }

    /// Declares the kernel monotone; extrema then come from cell endpoints.
    pub fn with_monotone(mut self, monotone: Monotonicity) -> Self {
        self.monotone = monotone;
        self
    }

    pub fn monotone(&self) -> Monotonicity {
        self.monotone
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.body {
            KernelBody::Expr(e) => Some(e),
            KernelBody::Custom(_) => None,
        }
    }

    pub fn eval(&self, t: f64) -> std::result::Result<f64, EvalError> {
        match &self.body {
            KernelBody::Expr(e) => e.eval(t),
            KernelBody::Custom(f) => {
                let v = f(t);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(EvalError {
                        kind: EvalErrorKind::NonFinite,
                        node: 0,
                        expr: "<custom>".into(),
                        t,
                    })
                }
            }
        }
    }

    /// Symbolic derivative; only available for expression kernels.
    pub fn derivative(&self) -> Result<ScalarKernel> {
        match &self.body {
            KernelBody::Expr(e) => Ok(Self::from_expr(differentiate(e)?)),
            KernelBody::Custom(_) => Err(Error::NotDifferentiable("custom kernel".into())),
        }
    }

    fn combine(
        &self,
        other: &ScalarKernel,
        node: fn(Box<Expr>, Box<Expr>) -> Expr,
        op: fn(f64, f64) -> f64,
    ) -> Self {
        match (&self.body, &other.body) {
            (KernelBody::Expr(a), KernelBody::Expr(b)) => {
                Self::from_expr(node(Box::new(a.clone()), Box::new(b.clone())))
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                Self::custom(
                    move |t| match (a.eval(t), b.eval(t)) {
                        (Ok(x), Ok(y)) => op(x, y),
                        _ => f64::NAN,
                    },
                    Monotonicity::None,
                )
            }
        }
    }

    pub fn add(&self, other: &ScalarKernel) -> Self {
        self.combine(other, Expr::Add, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarKernel) -> Self {
        self.combine(other, Expr::Sub, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarKernel) -> Self {
        self.combine(other, Expr::Mul, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.mul(&Self::constant(c))
    }

    pub fn abs(&self) -> Self {
        match &self.body {
            KernelBody::Expr(e) => Self::from_expr(Expr::Call(Func::Abs, vec![e.clone()])),
            KernelBody::Custom(_) => {
                let a = self.clone();
                Self::custom(
                    move |t| a.eval(t).map_or(f64::NAN, f64::abs),
                    Monotonicity::None,
                )
            }
        }
    }

    /// `t ↦ self(inner(t))`
    pub fn compose(&self, inner: &ScalarKernel) -> Self {
        match (&self.body, &inner.body) {
            (KernelBody::Expr(outer), KernelBody::Expr(e)) => Self::from_expr(outer.substitute(e)),
            _ => {
                let (a, b) = (self.clone(), inner.clone());
                Self::custom(
                    move |t| b.eval(t).and_then(|u| a.eval(u)).unwrap_or(f64::NAN),
                    Monotonicity::None,
                )
            }
        }
    }
}

/// A map `Element → Element` with no structural guarantees.
#[derive(Clone)]
pub struct GeneralMap {
    name: String,
    map: MapFn,
    corner_extremal: bool,
}

impl GeneralMap {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Whether cell extrema are attained at box corners (affine-per-cell maps).
    pub fn corner_extremal(&self) -> bool {
        self.corner_extremal
    }
}

#[derive(Clone)]
pub enum FunctionKind {
    Coordinatewise(Vec<ScalarKernel>),
    General(GeneralMap),
}

#[derive(Clone)]
pub struct LatticeFunction {
    kind: FunctionKind,
    dim: usize,
}

impl fmt::Debug for LatticeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FunctionKind::Coordinatewise(k) => f.debug_tuple("Coordinatewise").field(k).finish(),
            FunctionKind::General(g) => write!(f, "General({}, dim {})", g.name, self.dim),
        }
    }
}

impl LatticeFunction {
    pub fn coordinatewise(kernels: Vec<ScalarKernel>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            dim: kernels.len(),
            kind: FunctionKind::Coordinatewise(kernels),
        })
    }

    /// The same kernel on every atom.
    pub fn broadcast(kernel: ScalarKernel, dim: usize) -> Result<Self> {
        Self::coordinatewise(vec![kernel; dim])
    }

    /// Parses kernel sources; a single source is broadcast to `dim` atoms.
    pub fn parse(sources: &[&str], dim: usize) -> Result<Self> {
        let kernels = sources
            .iter()
            .map(|s| ScalarKernel::parse(s))
            .collect::<Result<Vec<_>>>()?;
        match kernels.len() {
            1 => Self::broadcast(kernels.into_iter().next().unwrap(), dim),
            n if n == dim => Self::coordinatewise(kernels),
            n => Err(Error::InvalidArgument(format!(
                "expected 1 or {dim} kernels, got {n}"
            ))),
        }
    }

    pub fn general(
        dim: usize,
        name: impl Into<String>,
        corner_extremal: bool,
        map: impl Fn(&Element) -> Result<Element> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            dim,
            kind: FunctionKind::General(GeneralMap {
                name: name.into(),
                map: Arc::new(map),
                corner_extremal,
            }),
        })
    }

    /// `f(x, y) = (y, x)` on `R^2`: continuous, not locally band preserving.
    pub fn swap_demo() -> Self {
        Self::general(2, "swap", true, |x: &Element| {
            Element::new(vec![x.get(1), x.get(0)])
        })
        .expect("dim 2")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn kernels(&self) -> Option<&[ScalarKernel]> {
        match &self.kind {
            FunctionKind::Coordinatewise(k) => Some(k),
            FunctionKind::General(_) => None,
        }
    }

    pub(crate) fn require_kernels(&self) -> Result<&[ScalarKernel]> {
        self.kernels().ok_or(Error::NotCoordinatewise)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: dim,
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &Element) -> Result<Element> {
        self.check_dim(x.dim())?;
        match &self.kind {
            FunctionKind::Coordinatewise(kernels) => {
                let coords = kernels
                    .iter()
                    .enumerate()
                    .map(|(atom, k)| {
                        k.eval(x.get(atom))
                            .map_err(|source| Error::Eval { atom, source })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Element::new(coords)
            }
            FunctionKind::General(g) => {
                let y = (g.map)(x)?;
                self.check_dim(y.dim())?;
                Ok(y)
            }
        }
    }

    fn zip_kernels(
        &self,
        other: &LatticeFunction,
        op: impl Fn(&ScalarKernel, &ScalarKernel) -> ScalarKernel,
    ) -> Result<Self> {
        self.check_dim(other.dim)?;
        let a = self.require_kernels()?;
        let b = other.require_kernels()?;
        Self::coordinatewise(a.iter().zip(b).map(|(x, y)| op(x, y)).collect())
    }

    fn map_kernels(&self, op: impl Fn(usize, &ScalarKernel) -> ScalarKernel) -> Result<Self> {
        let k = self.require_kernels()?;
        Self::coordinatewise(k.iter().enumerate().map(|(i, x)| op(i, x)).collect())
    }

    pub fn add(&self, other: &LatticeFunction) -> Result<Self> {
        self.zip_kernels(other, ScalarKernel::add)
    }

    pub fn sub(&self, other: &LatticeFunction) -> Result<Self> {
        self.zip_kernels(other, ScalarKernel::sub)
    }

    /// Pointwise f-algebra product.
    pub fn mul(&self, other: &LatticeFunction) -> Result<Self> {
        self.zip_kernels(other, ScalarKernel::mul)
    }

    /// `x ↦ c f(x)` for an element `c`.
    pub fn scale(&self, c: &Element) -> Result<Self> {
        self.check_dim(c.dim())?;
        self.map_kernels(|i, k| k.scale(c.get(i)))
    }

    pub fn abs(&self) -> Result<Self> {
        self.map_kernels(|_, k| k.abs())
    }

    /// `x ↦ self(inner(x))`
    pub fn compose(&self, inner: &LatticeFunction) -> Result<Self> {
        self.zip_kernels(inner, ScalarKernel::compose)
    }

    pub fn derivative(&self) -> Result<Self> {
        let k = self.require_kernels()?;
        Self::coordinatewise(
            k.iter()
                .map(ScalarKernel::derivative)
                .collect::<Result<_>>()?,
        )
    }
}

/// JSON function descriptor accepted by the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionDescriptor {
    Coordinatewise { kernels: Vec<String> },
    SwapDemo,
}

impl FunctionDescriptor {
    pub fn build(&self, dim: usize) -> Result<LatticeFunction> {
        match self {
            FunctionDescriptor::Coordinatewise { kernels } => {
                let refs: Vec<&str> = kernels.iter().map(String::as_str).collect();
                LatticeFunction::parse(&refs, dim)
            }
            FunctionDescriptor::SwapDemo => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch {
                        left: 2,
                        right: dim,
                    });
                }
                Ok(LatticeFunction::swap_demo())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Extrema

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremaMethod {
    Exact,
    Sampled,
}

impl ExtremaMethod {
    pub(crate) fn worst(self, other: ExtremaMethod) -> ExtremaMethod {
        if self == ExtremaMethod::Sampled || other == ExtremaMethod::Sampled {
            ExtremaMethod::Sampled
        } else {
            ExtremaMethod::Exact
        }
    }
}

/// `m_I = inf_{x ∈ I} f(x)` and `M_I = sup_{x ∈ I} f(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremaPair {
    pub m: Element,
    #[serde(rename = "M")]
    pub big_m: Element,
    pub method: ExtremaMethod,
    pub tolerance: f64,
}

/// Extrema of a scalar kernel on one cell, with where they are attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CellExtrema {
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
    /// Extra width to account for sampling error (zero when exact).
    pub slack: f64,
}

#[derive(Clone)]
enum Strategy {
    Increasing,
    Decreasing,
    Critical { points: Vec<f64>, values: Vec<f64> },
    Sampled { tol: f64 },
}

/// A kernel readied for repeated cell-extrema queries inside `[lo, hi]`.
#[derive(Clone)]
pub(crate) struct PreparedKernel {
    kernel: ScalarKernel,
    strategy: Strategy,
}

impl PreparedKernel {
    pub fn new(kernel: &ScalarKernel, lo: f64, hi: f64, tol: f64) -> Self {
        let strategy = match kernel.monotone {
            Monotonicity::Increasing => Strategy::Increasing,
            Monotonicity::Decreasing => Strategy::Decreasing,
            Monotonicity::None => {
                critical_strategy(kernel, lo, hi).unwrap_or(Strategy::Sampled { tol })
            }
        };
        Self {
            kernel: kernel.clone(),
            strategy,
        }
    }

    pub fn method(&self) -> ExtremaMethod {
        match self.strategy {
            Strategy::Sampled { .. } => ExtremaMethod::Sampled,
            _ => ExtremaMethod::Exact,
        }
    }

    pub fn eval(&self, t: f64) -> std::result::Result<f64, EvalError> {
        self.kernel.eval(t)
    }

    /// Extrema on `[u, v]` given the endpoint values `fu = k(u)`, `fv = k(v)`.
    pub fn cell(
        &self,
        u: f64,
        v: f64,
        fu: f64,
        fv: f64,
    ) -> std::result::Result<CellExtrema, EvalError> {
        let mut ext = endpoint_extrema(u, v, fu, fv);
        match &self.strategy {
            Strategy::Increasing => Ok(CellExtrema {
                min: fu,
                argmin: u,
                max: fv,
                argmax: v,
                slack: 0.0,
            }),
            Strategy::Decreasing => Ok(CellExtrema {
                min: fv,
                argmin: v,
                max: fu,
                argmax: u,
                slack: 0.0,
            }),
            Strategy::Critical { points, values } => {
                let start = points.partition_point(|&p| p <= u);
                for (&p, &val) in points[start..].iter().zip(&values[start..]) {
                    if p >= v {
                        break;
                    }
                    ext.include(p, val);
                }
                Ok(ext)
            }
            Strategy::Sampled { tol } => self.sample_cell(u, v, fu, fv, *tol),
        }
    }

    /// Refines a uniform sample of the cell until adjacent samples differ by
    /// at most `tol`, which bounds the sampling error for Lipschitz kernels.
    fn sample_cell(
        &self,
        u: f64,
        v: f64,
        fu: f64,
        fv: f64,
        tol: f64,
    ) -> std::result::Result<CellExtrema, EvalError> {
        let mut ext = endpoint_extrema(u, v, fu, fv);
        if u == v {
            return Ok(ext);
        }
        let mut samples = vec![fu, fv];
        loop {
            let segments = 2 * (samples.len() - 1);
            let mut next = Vec::with_capacity(segments + 1);
            for (j, pair) in samples.windows(2).enumerate() {
                let t = u + ((2 * j + 1) as f64 / segments as f64) * (v - u);
                let value = self.kernel.eval(t)?;
                ext.include(t, value);
                next.extend([pair[0], value]);
            }
            next.push(fv);
            samples = next;
            let spread = samples
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0, f64::max);
            if spread <= tol {
                ext.slack = tol;
                return Ok(ext);
            }
            if segments >= MAX_SAMPLE_SEGMENTS {
                ext.slack = spread;
                return Ok(ext);
            }
        }
    }
}

impl CellExtrema {
    fn include(&mut self, t: f64, value: f64) {
        if value < self.min {
            self.min = value;
            self.argmin = t;
        }
        if value > self.max {
            self.max = value;
            self.argmax = t;
        }
    }
}

fn endpoint_extrema(u: f64, v: f64, fu: f64, fv: f64) -> CellExtrema {
    let (min, argmin) = if fv < fu { (fv, v) } else { (fu, u) };
    let (max, argmax) = if fv > fu { (fv, v) } else { (fu, u) };
    CellExtrema {
        min,
        argmin,
        max,
        argmax,
        slack: 0.0,
    }
}

/// Locates sign changes of the derivative on a fixed grid, then bisects.
fn critical_strategy(kernel: &ScalarKernel, lo: f64, hi: f64) -> Option<Strategy> {
    let expr = kernel.expr()?;
    if !expr.is_smooth() {
        return None;
    }
    let derivative: Box<dyn Fn(f64) -> Option<f64>> = match expr.as_polynomial() {
        Some(coeffs) => {
            let d: Vec<f64> = coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect();
            Box::new(move |t| Some(horner(&d, t)))
        }
        None => {
            let d = differentiate(expr).ok()?;
            Box::new(move |t| d.eval(t).ok())
        }
    };
    let mut points = Vec::new();
    if hi > lo {
        let grid: Vec<f64> = (0..=ROOT_GRID)
            .map(|j| lo + (j as f64 / ROOT_GRID as f64) * (hi - lo))
            .collect();
        let slopes = grid
            .iter()
            .map(|&t| derivative(t))
            .collect::<Option<Vec<f64>>>()?;
        for j in 0..ROOT_GRID {
            let (a, b) = (slopes[j], slopes[j + 1]);
            if a == 0.0 {
                points.push(grid[j]);
            } else if a * b < 0.0 {
                points.push(bisect_root(&derivative, grid[j], grid[j + 1], a)?);
            }
        }
        if slopes[ROOT_GRID] == 0.0 {
            points.push(hi);
        }
    }
    let values = points
        .iter()
        .map(|&p| kernel.eval(p).ok())
        .collect::<Option<Vec<f64>>>()?;
    Some(Strategy::Critical { points, values })
}

fn bisect_root(d: &dyn Fn(f64) -> Option<f64>, mut a: f64, mut b: f64, mut da: f64) -> Option<f64> {
    while b - a > ROOT_WIDTH {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let dm = d(mid)?;
        if dm == 0.0 {
            return Some(mid);
        }
        if (dm < 0.0) == (da < 0.0) {
            a = mid;
            da = dm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

pub(crate) struct AtomExtrema {
    pub cell: CellExtrema,
    pub method: ExtremaMethod,
}

pub(crate) fn atom_extrema(
    kernel: &ScalarKernel,
    atom: usize,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<AtomExtrema> {
    let wrap = |source| Error::Eval { atom, source };
    let prepared = PreparedKernel::new(kernel, lo, hi, tol);
    let fu = kernel.eval(lo).map_err(wrap)?;
    let fv = kernel.eval(hi).map_err(wrap)?;
    Ok(AtomExtrema {
        cell: prepared.cell(lo, hi, fu, fv).map_err(wrap)?,
        method: prepared.method(),
    })
}

/// Per-atom infimum and supremum of a coordinatewise function over `interval`.
///
/// Monotone-hinted kernels use endpoint values. Smooth expression kernels add
/// the critical points found by isolating sign changes of the derivative.
/// Anything else is sampled on a refining grid until successive estimates move
/// by at most `tol`.
pub fn extrema(f: &LatticeFunction, interval: &OrderInterval, tol: f64) -> Result<ExtremaPair> {
    let (pair, _, _) = extrema_with_arguments(f, interval, tol)?;
    Ok(pair)
}

/// Extrema together with points attaining them.
pub(crate) fn extrema_with_arguments(
    f: &LatticeFunction,
    interval: &OrderInterval,
    tol: f64,
) -> Result<(ExtremaPair, Element, Element)> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    let kernels = f.require_kernels()?;
    f.check_dim(interval.dim())?;
    let mut method = ExtremaMethod::Exact;
    let mut tolerance = 0.0f64;
    let (mut m, mut big_m, mut argmin, mut argmax) = (vec![], vec![], vec![], vec![]);
    for (atom, k) in kernels.iter().enumerate() {
        let ext = atom_extrema(
            k,
            atom,
            interval.lo().get(atom),
            interval.hi().get(atom),
            tol,
        )?;
        method = method.worst(ext.method);
        tolerance = tolerance.max(ext.cell.slack);
        m.push(ext.cell.min);
        big_m.push(ext.cell.max);
        argmin.push(ext.cell.argmin);
        argmax.push(ext.cell.argmax);
    }
    Ok((
        ExtremaPair {
            m: Element::new(m)?,
            big_m: Element::new(big_m)?,
            method,
            tolerance,
        },
        Element::new(argmin)?,
        Element::new(argmax)?,
    ))
}

/// Extrema of a general map over the box `[lo, hi]` by corner evaluation.
pub(crate) fn corner_extrema(
    g: &GeneralMap,
    lo: &Element,
    hi: &Element,
) -> Result<(Element, Element)> {
    let dim = lo.dim();
    if !g.corner_extremal || dim > 3 {
        return Err(Error::NoExtrema);
    }
    let mut min: Option<Vec<f64>> = None;
    let mut max: Option<Vec<f64>> = None;
    for mask in 0..(1usize << dim) {
        let corner: Vec<f64> = (0..dim)
            .map(|i| {
                if mask & (1 << i) != 0 {
                    hi.get(i)
                } else {
                    lo.get(i)
                }
            })
            .collect();
        let y = (g.map)(&Element::new(corner)?)?;
        if y.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: y.dim(),
            });
        }
        let merge = |acc: &mut Option<Vec<f64>>, pick: fn(f64, f64) -> f64| match acc {
            Some(v) => v
                .iter_mut()
                .zip(y.coords())
                .for_each(|(a, &b)| *a = pick(*a, b)),
            None => *acc = Some(y.coords().to_vec()),
        };
        merge(&mut min, f64::min);
        merge(&mut max, f64::max);
    }
    Ok((Element::new(min.unwrap())?, Element::new(max.unwrap())?))
}

// ---------------------------------------------------------------------------
// Diagnostics

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum LbpVerdict {
    /// No violation found. `skipped` counts trials whose evaluation failed.
    Pass { trials: usize, skipped: usize },
    /// `P(x) = P(y)` but `P(f(x)) ≠ P(f(y))` for the band `P`.
    Counterexample { x: Element, y: Element, band: Band },
}

fn random_point(rng: &mut ChaCha8Rng, domain: &OrderInterval) -> Element {
    let coords = (0..domain.dim())
        .map(|i| {
            let (lo, hi) = (domain.lo().get(i), domain.hi().get(i));
            lo + rng.gen::<f64>() * (hi - lo)
        })
        .collect();
    Element::new(coords).expect("finite interior point")
}

/// Randomised search for a violation of local band preservation.
///
/// Coordinatewise functions pass without sampling. For general maps, each
/// trial mixes two random points across a random band `B` so that
/// `P_B(x) = P_B(y')`, then compares `P_B(f(x))` with `P_B(f(y'))`.
pub fn lbp_check(
    f: &LatticeFunction,
    domain: &OrderInterval,
    trials: usize,
    seed: u64,
) -> LbpVerdict {
    if f.kernels().is_some() {
        return LbpVerdict::Pass {
            trials: 0,
            skipped: 0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut skipped = 0;
    for _ in 0..trials.max(1) {
        let x = random_point(&mut rng, domain);
        let y = random_point(&mut rng, domain);
        let dim = domain.dim();
        let band = Band::new(dim, (0..dim).filter(|_| rng.gen::<bool>())).expect("atoms in range");
        let Some(verdict) = mixed_trial(f, x, &y, band) else {
            skipped += 1;
            continue;
        };
        if let Some(cx) = verdict {
            return cx;
        }
    }
    LbpVerdict::Pass {
        trials: trials.max(1),
        skipped,
    }
}

/// One band-mixing trial. `None` when evaluation fails.
pub(crate) fn mixed_trial(
    f: &LatticeFunction,
    x: Element,
    y: &Element,
    band: Band,
) -> Option<Option<LbpVerdict>> {
    let mixed = band
        .project(&x)
        .ok()?
        .add(&band.complement().project(y).ok()?)
        .ok()?;
    let fx = band.project(&f.eval(&x).ok()?).ok()?;
    let fy = band.project(&f.eval(&mixed).ok()?).ok()?;
    Some((fx != fy).then_some(LbpVerdict::Counterexample { x, y: mixed, band }))
}

const MODULUS_GRID: usize = 256;
const MODULUS_WINDOW: usize = 32;

/// Sampled estimate of `sup { |f(x) - f(y)| : |x - y| ≤ δ }` per atom, one
/// element per `δ`. A diagnostic only; finite sampling cannot decide uniform
/// order continuity.
pub fn continuity_modulus(
    f: &LatticeFunction,
    interval: &OrderInterval,
    deltas: &[Element],
) -> Result<Vec<Element>> {
    let kernels = f.require_kernels()?;
    f.check_dim(interval.dim())?;
    for (k, delta) in deltas.iter().enumerate() {
        f.check_dim(delta.dim())?;
        if let Some(atom) = (0..delta.dim()).find(|&i| !(delta.get(i) > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "delta {k} is not positive at atom {atom}"
            )));
        }
        if k > 0 && !delta.leq(&deltas[k - 1])? {
            return Err(Error::InvalidArgument("deltas must be descending".into()));
        }
    }
    deltas
        .iter()
        .map(|delta| {
            let coords = kernels
                .iter()
                .enumerate()
                .map(|(atom, k)| {
                    atom_modulus(
                        k,
                        interval.lo().get(atom),
                        interval.hi().get(atom),
                        delta.get(atom),
                    )
                    .map_err(|source| Error::Eval { atom, source })
                })
                .collect::<Result<Vec<f64>>>()?;
            Element::new(coords)
        })
        .collect()
}

fn atom_modulus(
    k: &ScalarKernel,
    lo: f64,
    hi: f64,
    delta: f64,
) -> std::result::Result<f64, EvalError> {
    let mut best = 0.0f64;
    if hi <= lo {
        return Ok(best);
    }
    for j in 0..=MODULUS_GRID {
        let x = lo + (j as f64 / MODULUS_GRID as f64) * (hi - lo);
        let fx = k.eval(x)?;
        for s in 1..=MODULUS_WINDOW {
            let y = (x + delta * (s as f64 / MODULUS_WINDOW as f64)).min(hi);
            best = best.max((k.eval(y)? - fx).abs());
            if y >= hi {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[f64]) -> Element {
        Element::new(v.to_vec()).unwrap()
    }

    fn interval(lo: &[f64], hi: &[f64]) -> OrderInterval {
        OrderInterval::new(e(lo), e(hi)).unwrap()
    }

    fn f(src: &str, dim: usize) -> LatticeFunction {
        LatticeFunction::parse(&[src], dim).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(f("t^2", 2).eval(&e(&[2.0, 3.0])).unwrap(), e(&[4.0, 9.0]));
        assert_eq!(
            LatticeFunction::swap_demo().eval(&e(&[1.0, 0.0])).unwrap(),
            e(&[0.0, 1.0])
        );
        assert_eq!(f("5", 2).eval(&e(&[-3.0, 8.0])).unwrap(), e(&[5.0, 5.0]));
    }

    #[test]
    fn eval_errors_report_atom() {
        let g = LatticeFunction::parse(&["t", "1/t"], 2).unwrap();
        match g.eval(&e(&[0.0, 0.0])) {
            Err(Error::Eval { atom: 1, source }) => {
                assert_eq!(source.kind, EvalErrorKind::DivisionByZero)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            g.eval(&e(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(LatticeFunction::parse(&["t", "t", "t"], 2).is_err());
    }

    #[test]
    fn swap_map_fails_lbp_check() {
        let verdict = lbp_check(
            &LatticeFunction::swap_demo(),
            &interval(&[0.0, 0.0], &[1.0, 1.0]),
            100,
            7,
        );
        let LbpVerdict::Counterexample { x, y, band } = verdict else {
            panic!("expected a counterexample");
        };
        let swap = LatticeFunction::swap_demo();
        assert_eq!(band.project(&x).unwrap(), band.project(&y).unwrap());
        assert_ne!(
            band.project(&swap.eval(&x).unwrap()).unwrap(),
            band.project(&swap.eval(&y).unwrap()).unwrap()
        );
    }

    #[test]
    fn swap_counterexample_by_hand() {
        let swap = LatticeFunction::swap_demo();
        let band = Band::new(2, [0]).unwrap();
        let verdict = mixed_trial(&swap, e(&[1.0, 0.0]), &e(&[1.0, 1.0]), band).unwrap();
        let Some(LbpVerdict::Counterexample { y, .. }) = verdict else {
            panic!("expected violation");
        };
        assert_eq!(y, e(&[1.0, 1.0]));
        let b = Band::new(2, [0]).unwrap();
        assert_eq!(
            b.project(&swap.eval(&e(&[1.0, 0.0])).unwrap()).unwrap(),
            e(&[0.0, 0.0])
        );
        assert_eq!(
            b.project(&swap.eval(&e(&[1.0, 1.0])).unwrap()).unwrap(),
            e(&[1.0, 0.0])
        );
    }

    #[test]
    fn coordinatewise_maps_pass_lbp_check() {
        let dom = interval(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0]);
        assert_eq!(
            lbp_check(&f("t^3", 3), &dom, 10, 0),
            LbpVerdict::Pass {
                trials: 0,
                skipped: 0
            }
        );

        let inner = f("t^3 - sin(t)", 3);
        let wrapped =
            LatticeFunction::general(3, "wrapped", false, move |x: &Element| inner.eval(x))
                .unwrap();
        assert_eq!(
            lbp_check(&wrapped, &dom, 1000, 3),
            LbpVerdict::Pass {
                trials: 1000,
                skipped: 0
            }
        );
    }

    #[test]
    fn extrema_examples() {
        let id = LatticeFunction::broadcast(ScalarKernel::identity(), 3).unwrap();
        let ext = extrema(&id, &interval(&[0.0; 3], &[1.0; 3]), 0.0).unwrap();
        assert_eq!(ext.m, e(&[0.0; 3]));
        assert_eq!(ext.big_m, e(&[1.0; 3]));
        assert_eq!(ext.method, ExtremaMethod::Exact);

        let sq = f("t^2", 1);
        let ext = extrema(&sq, &interval(&[-1.0], &[2.0]), 0.0).unwrap();
        assert!(ext.m.get(0).abs() < 1e-20, "{:?}", ext.m);
        assert_eq!(ext.big_m, e(&[4.0]));
        assert_eq!(ext.method, ExtremaMethod::Exact);

        let k = f("sin(t) + t^2", 2);
        let ext = extrema(&k, &interval(&[0.3, -2.0], &[0.3, 1.0]), 0.0).unwrap();
        let c = 0.3f64.sin() + 0.09;
        assert_eq!((ext.m.get(0), ext.big_m.get(0)), (c, c));
    }

    #[test]
    fn extrema_of_smooth_non_polynomial_kernel() {
        // sin on [0, 4]: max 1 at pi/2, min sin(4) at the right end.
        let ext = extrema(&f("sin(t)", 1), &interval(&[0.0], &[4.0]), 0.0).unwrap();
        assert!((ext.big_m.get(0) - 1.0).abs() < 1e-15);
        assert_eq!(ext.m.get(0), 4.0f64.sin());
    }

    #[test]
    fn sampled_extrema_for_non_smooth_kernels() {
        let ext = extrema(&f("abs(t - 0.3)", 1), &interval(&[0.0], &[1.0]), 1e-6).unwrap();
        assert_eq!(ext.method, ExtremaMethod::Sampled);
        assert!(
            ext.tolerance >= 1e-6 && ext.tolerance < 1e-3,
            "{}",
            ext.tolerance
        );
        assert!(ext.m.get(0) >= 0.0 && ext.m.get(0) <= ext.tolerance);
        assert_eq!(ext.big_m.get(0), 0.7);

        let ext = extrema(&f("abs(t - 0.3)", 1), &interval(&[0.0], &[1.0]), 1e-2).unwrap();
        assert_eq!(ext.tolerance, 1e-2);
        assert!(ext.m.get(0) <= 1e-2);
    }

    #[test]
    fn extrema_rejects_general_maps() {
        let err = extrema(
            &LatticeFunction::swap_demo(),
            &interval(&[0.0, 0.0], &[1.0, 1.0]),
            0.0,
        );
        assert_eq!(err, Err(Error::NotCoordinatewise));
    }

    #[test]
    fn continuity_modulus_examples() {
        let dom = interval(&[0.0, 0.0], &[1.0, 1.0]);
        let d = [e(&[0.1, 0.1])];
        let id = continuity_modulus(&f("t", 2), &dom, &d).unwrap();
        assert!((id[0].get(0) - 0.1).abs() < 1e-12);

        let sq = continuity_modulus(&f("t^2", 2), &dom, &d).unwrap();
        assert!((sq[0].get(1) - 0.19).abs() < 1e-3, "{:?}", sq);

        let c = continuity_modulus(&f("3", 2), &dom, &d).unwrap();
        assert!(c[0].is_zero());

        assert!(continuity_modulus(&f("t", 2), &dom, &[e(&[0.0, 0.1])]).is_err());
        assert!(continuity_modulus(&f("t", 2), &dom, &[e(&[0.1, 0.1]), e(&[0.2, 0.2])]).is_err());
    }

    #[test]
    fn descriptors() {
        let d: FunctionDescriptor =
            serde_json::from_str(r#"{"kind":"coordinatewise","kernels":["t^2"]}"#).unwrap();
        assert_eq!(d.build(3).unwrap().dim(), 3);
        let d: FunctionDescriptor = serde_json::from_str(r#"{"kind":"swap-demo"}"#).unwrap();
        assert!(d.build(2).unwrap().kernels().is_none());
        assert!(d.build(3).is_err());
    }

    #[test]
    fn kernel_algebra() {
        let a = ScalarKernel::parse("t^2").unwrap();
        let b = ScalarKernel::custom(|t| 2.0 * t, Monotonicity::Increasing);
        assert_eq!(a.mul(&b).eval(3.0).unwrap(), 54.0);
        assert_eq!(a.compose(&b).eval(3.0).unwrap(), 36.0);
        assert_eq!(b.compose(&a).eval(3.0).unwrap(), 18.0);
        assert_eq!(a.sub(&b).abs().eval(1.0).unwrap(), 1.0);
        assert!(b.derivative().is_err());
    }
}
