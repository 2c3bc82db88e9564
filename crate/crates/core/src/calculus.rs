//! Numerical order differentiation, antiderivatives, and executable checks of
//! the mean value theorem for integrals, both fundamental theorems,
//! substitution, and integration by parts.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{
    atom_extrema, extrema, LatticeFunction, Monotonicity, PreparedKernel, ScalarKernel,
};
use crate::integrator::{
    extrema_tolerance, integrate, signed_integrate, IntegralResult, ToleranceSchedule,
};
use crate::lattice::{Element, OrderInterval};
use crate::partition::uniform_point;

/// Default central-difference steps.
pub const DEFAULT_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Antiderivative grids are never coarser than `2^MIN_PRIMITIVE_DEPTH` cells.
const MIN_PRIMITIVE_DEPTH: u32 = 6;
const MAX_PRIMITIVE_DEPTH: u32 = 20;
const MVT_ITERATIONS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    pub value: Element,
    /// Step chosen on each atom.
    pub step: Element,
    /// The symbolic derivative at `x`, when every kernel has one.
    pub symbolic: Option<Element>,
}

/// Central difference on one atom at the most stable step of `steps`.
fn central_difference(
    eval: impl Fn(f64) -> Result<f64>,
    x: f64,
    lo: f64,
    hi: f64,
    steps: &[f64],
    atom: usize,
) -> Result<(f64, f64)> {
    let mut quotients = Vec::with_capacity(steps.len());
    for &h in steps {
        if x - h < lo || x + h > hi {
            continue;
        }
        quotients.push(((eval(x + h)? - eval(x - h)?) / (2.0 * h), h));
    }
    match quotients.len() {
        0 => Err(Error::Boundary { atom }),
        1 => Ok(quotients[0]),
        _ => {
            let best = (1..quotients.len())
                .min_by(|&a, &b| {
                    let da = (quotients[a].0 - quotients[a - 1].0).abs();
                    let db = (quotients[b].0 - quotients[b - 1].0).abs();
                    da.total_cmp(&db)
                })
                .expect("at least two quotients");
            Ok(quotients[best])
        }
    }
}

fn check_steps(steps: &[f64]) -> Result<()> {
    if steps.is_empty() {
        return Err(Error::InvalidArgument("empty step schedule".into()));
    }
    for (k, &h) in steps.iter().enumerate() {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("step {k} is not positive")));
        }
        if k > 0 && h >= steps[k - 1] {
            return Err(Error::InvalidArgument(
                "steps must be strictly descending".into(),
            ));
        }
    }
    Ok(())
}

fn check_interior(interval: &OrderInterval, x: &Element) -> Result<()> {
    if x.dim() != interval.dim() {
        return Err(Error::DimensionMismatch {
            left: interval.dim(),
            right: x.dim(),
        });
    }
    for atom in 0..x.dim() {
        let t = x.get(atom);
        if !(interval.lo().get(atom) < t && t < interval.hi().get(atom)) {
            return Err(Error::Boundary { atom });
        }
    }
    Ok(())
}

/// Per-atom central differences of `f` at an interior point `x` of `interval`.
///
/// Steps that leave `interval` are skipped. Among the remaining quotients the
/// one that moved least from its predecessor is reported.
pub fn numeric_derivative(
    f: &LatticeFunction,
    interval: &OrderInterval,
    x: &Element,
    steps: &[f64],
) -> Result<DerivativeEstimate> {
    let kernels = f.require_kernels()?;
    if f.dim() != interval.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: interval.dim(),
        });
    }
    check_steps(steps)?;
    check_interior(interval, x)?;
    let mut value = Vec::with_capacity(kernels.len());
    let mut step = Vec::with_capacity(kernels.len());
    for (atom, k) in kernels.iter().enumerate() {
        let eval = |t: f64| k.eval(t).map_err(|source| Error::Eval { atom, source });
        let (d, h) = central_difference(
            eval,
            x.get(atom),
            interval.lo().get(atom),
            interval.hi().get(atom),
            steps,
            atom,
        )?;
        value.push(d);
        step.push(h);
    }
    let symbolic = f.derivative().ok().and_then(|d| d.eval(x).ok());
    Ok(DerivativeEstimate {
        value: Element::from_computed(value)?,
        step: Element::new(step)?,
        symbolic,
    })
}

/// Central differences of an arbitrary evaluator, used on antiderivatives.
fn numeric_derivative_of(
    eval: impl Fn(&Element) -> Result<Element>,
    interval: &OrderInterval,
    x: &Element,
    steps: &[f64],
) -> Result<Element> {
    check_steps(steps)?;
    check_interior(interval, x)?;
    let mut value = Vec::with_capacity(x.dim());
    for atom in 0..x.dim() {
        let shifted = |t: f64| {
            let mut coords = x.coords().to_vec();
            coords[atom] = t;
            Ok(eval(&Element::new(coords)?)?.get(atom))
        };
        let (d, _) = central_difference(
            shifted,
            x.get(atom),
            interval.lo().get(atom),
            interval.hi().get(atom),
            steps,
            atom,
        )?;
        value.push(d);
    }
    Element::from_computed(value)
}

#[derive(Clone)]
struct AtomPrimitive {
    atom: usize,
    lo: f64,
    hi: f64,
    cells: usize,
    /// `cumulative[j]` approximates the integral over `[lo, x_j]`.
    cumulative: Vec<f64>,
    prepared: PreparedKernel,
}

impl AtomPrimitive {
    fn build(
        kernel: &ScalarKernel,
        atom: usize,
        lo: f64,
        hi: f64,
        depth: u32,
        tol: f64,
    ) -> Result<Self> {
        let wrap = |source| Error::Eval { atom, source };
        let cells = 1usize << depth;
        let prepared = PreparedKernel::new(kernel, lo, hi, extrema_tolerance(tol, hi - lo));
        let mut cumulative = Vec::with_capacity(cells + 1);
        cumulative.push(0.0);
        let mut u = lo;
        let mut fu = prepared.eval(u).map_err(wrap)?;
        let mut acc = 0.0;
        for j in 1..=cells {
            let v = uniform_point(lo, hi, j, cells);
            let fv = prepared.eval(v).map_err(wrap)?;
            let ext = prepared.cell(u, v, fu, fv).map_err(wrap)?;
            acc += 0.5 * (ext.min + ext.max) * (v - u);
            cumulative.push(acc);
            (u, fu) = (v, fv);
        }
        if !acc.is_finite() {
            return Err(Error::Overflow { atom });
        }
        Ok(Self {
            atom,
            lo,
            hi,
            cells,
            cumulative,
            prepared,
        })
    }

    fn eval(&self, t: f64) -> Result<f64> {
        if !(self.lo <= t && t <= self.hi) {
            return Err(Error::OutOfInterval { atom: self.atom });
        }
        if self.hi == self.lo {
            return Ok(0.0);
        }
        let n = self.cells;
        let mut j = (((t - self.lo) / (self.hi - self.lo)) * n as f64).floor() as usize;
        j = j.min(n - 1);
        while j > 0 && uniform_point(self.lo, self.hi, j, n) > t {
            j -= 1;
        }
        while j + 1 < n && uniform_point(self.lo, self.hi, j + 1, n) <= t {
            j += 1;
        }
        let u = uniform_point(self.lo, self.hi, j, n);
        let wrap = |source| Error::Eval {
            atom: self.atom,
            source,
        };
        let fu = self.prepared.eval(u).map_err(wrap)?;
        let ft = self.prepared.eval(t).map_err(wrap)?;
        let ext = self.prepared.cell(u, t, fu, ft).map_err(wrap)?;
        Ok(self.cumulative[j] + 0.5 * (ext.min + ext.max) * (t - u))
    }
}

/// `F(x) = ∫_lo^x f` on an order interval, backed by per-atom cumulative sums
/// on a uniform grid at least as fine as the one `integrate` converged on.
#[derive(Clone)]
pub struct Antiderivative {
    interval: OrderInterval,
    atoms: Arc<Vec<AtomPrimitive>>,
}

impl std::fmt::Debug for Antiderivative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Antiderivative")
            .field("interval", &self.interval)
            .field(
                "cells",
                &self.atoms.iter().map(|a| a.cells).collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl Antiderivative {
    pub fn new(
        f: &LatticeFunction,
        interval: &OrderInterval,
        sched: &ToleranceSchedule,
    ) -> Result<Self> {
        let kernels = f.require_kernels()?;
        let whole = integrate(f, interval, sched)?;
        let depth = whole.depth.clamp(MIN_PRIMITIVE_DEPTH, MAX_PRIMITIVE_DEPTH);
        let atoms = kernels
            .iter()
            .enumerate()
            .map(|(atom, k)| {
                AtomPrimitive::build(
                    k,
                    atom,
                    interval.lo().get(atom),
                    interval.hi().get(atom),
                    depth,
                    sched.tol,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            interval: interval.clone(),
            atoms: Arc::new(atoms),
        })
    }

    pub fn interval(&self) -> &OrderInterval {
        &self.interval
    }

    pub fn eval(&self, x: &Element) -> Result<Element> {
        if x.dim() != self.interval.dim() {
            return Err(Error::DimensionMismatch {
                left: self.interval.dim(),
                right: x.dim(),
            });
        }
        self.interval.check_contains(x)?;
        let coords = self
            .atoms
            .iter()
            .map(|a| a.eval(x.get(a.atom)))
            .collect::<Result<Vec<_>>>()?;
        Element::from_computed(coords)
    }

    /// `F` as a coordinatewise function; evaluation outside the interval fails.
    pub fn as_function(&self) -> LatticeFunction {
        let kernels = self
            .atoms
            .iter()
            .map(|a| {
                let a = a.clone();
                ScalarKernel::custom(move |t| a.eval(t).unwrap_or(f64::NAN), Monotonicity::None)
            })
            .collect();
        LatticeFunction::coordinatewise(kernels).expect("at least one atom")
    }
}

pub fn antiderivative(
    f: &LatticeFunction,
    interval: &OrderInterval,
    sched: &ToleranceSchedule,
) -> Result<Antiderivative> {
    Antiderivative::new(f, interval, sched)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvtSolution {
    pub c: Element,
    /// `|(y_i - x_i) f_i(c_i) - ∫_x^y f_i|` per atom.
    pub residual: Element,
    pub integral: IntegralResult,
}

/// Finds `c` between `x ∧ y` and `x ∨ y` with `(y - x) f(c) = ∫_x^y f`.
///
/// The midpoint is tried first. Otherwise each atom bisects between points
/// attaining the kernel's minimum and maximum on `[x_i ∧ y_i, x_i ∨ y_i]`.
pub fn mvt_integral_solve(
    f: &LatticeFunction,
    x: &Element,
    y: &Element,
    tol: f64,
    sched: &ToleranceSchedule,
) -> Result<MvtSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let kernels = f.require_kernels()?;
    let integral = signed_integrate(f, x, y, sched)?;
    let span = OrderInterval::spanned_by(x, y)?;
    let mut c = Vec::with_capacity(kernels.len());
    let mut residual = Vec::with_capacity(kernels.len());
    for (atom, k) in kernels.iter().enumerate() {
        let (xi, yi) = (x.get(atom), y.get(atom));
        if xi == yi {
            c.push(xi);
            residual.push(0.0);
            continue;
        }
        let (lo, hi) = (span.lo().get(atom), span.hi().get(atom));
        let dir = yi - xi;
        let target = integral.value.get(atom);
        let g = |t: f64| {
            k.eval(t)
                .map(|v| dir * v - target)
                .map_err(|source| Error::Eval { atom, source })
        };
        let (ci, ri) = solve_atom(&g, k, atom, lo, hi, tol)?;
        c.push(ci);
        residual.push(ri);
    }
    Ok(MvtSolution {
        c: Element::new(c)?,
        residual: Element::from_computed(residual)?,
        integral,
    })
}

fn solve_atom(
    g: &dyn Fn(f64) -> Result<f64>,
    k: &ScalarKernel,
    atom: usize,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let mid = 0.5 * (lo + hi);
    let gm = g(mid)?;
    if gm.abs() <= tol {
        return Ok((mid, gm.abs()));
    }
    let ext = atom_extrema(k, atom, lo, hi, tol * 1e-3)?.cell;
    let (mut a, mut b) = (ext.argmin, ext.argmax);
    let (mut ga, gb) = (g(a)?, g(b)?);
    for (t, gt) in [(a, ga), (b, gb)] {
        if gt.abs() <= tol {
            return Ok((t, gt.abs()));
        }
    }
    if (ga < 0.0) == (gb < 0.0) {
        return Err(Error::BracketFailure { atom });
    }
    let mut best = (a, ga.abs());
    for _ in 0..MVT_ITERATIONS {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            // The bracket has collapsed without reaching the target: the
            // kernel jumps across it.
            return Err(Error::BracketFailure { atom });
        }
        let gm = g(m)?;
        best = (m, gm.abs());
        if gm.abs() <= tol {
            break;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Verification harness

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResidual {
    pub x: Element,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Element>,
    pub residual: Element,
    /// The mean value point, for MVT samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Element>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub max_residual: Element,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
    pub details: Vec<SampleResidual>,
}

impl VerificationReport {
    pub fn from_samples(
        name: impl Into<String>,
        tolerance: f64,
        details: Vec<SampleResidual>,
    ) -> Result<Self> {
        let first = details.first().ok_or(Error::EmptyInput)?;
        let mut max = first.residual.coords().to_vec();
        for d in &details[1..] {
            for (m, &r) in max.iter_mut().zip(d.residual.coords()) {
                *m = m.max(r);
            }
        }
        let pass = max.iter().all(|&r| r <= tolerance);
        Ok(Self {
            name: name.into(),
            max_residual: Element::new(max)?,
            tolerance,
            pass,
            samples: details.len(),
            details,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub sched: ToleranceSchedule,
    /// Multiplies the central-difference steps used by `verify_ftc1`.
    pub step_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 10,
            tol: 1e-5,
            seed: 0,
            sched: ToleranceSchedule::default(),
            step_scale: 1.0,
        }
    }
}

fn sample_point(rng: &mut ChaCha8Rng, interval: &OrderInterval, margin: f64) -> Result<Element> {
    let coords = (0..interval.dim())
        .map(|i| {
            let (lo, hi) = (interval.lo().get(i), interval.hi().get(i));
            lo + (margin + (1.0 - 2.0 * margin) * rng.gen::<f64>()) * (hi - lo)
        })
        .collect();
    Element::new(coords)
}

fn residual(a: &Element, b: &Element) -> Result<Element> {
    Ok(a.sub(b)?.abs())
}

/// `F(x) = ∫_lo^x f` differentiates back to `f` at sampled interior points.
pub fn verify_ftc1(
    f: &LatticeFunction,
    interval: &OrderInterval,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if !interval.is_solid() {
        return Err(Error::InvalidInterval {
            atom: (0..interval.dim())
                .find(|&i| interval.width().get(i) <= 0.0)
                .unwrap_or(0),
        });
    }
    let prim = Antiderivative::new(f, interval, &opts.sched)?;
    let width = interval
        .width()
        .coords()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let steps: Vec<f64> = DEFAULT_STEPS
        .iter()
        .map(|h| h * width * opts.step_scale)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut details = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples.max(1) {
        let x = sample_point(&mut rng, interval, 0.05)?;
        let d = numeric_derivative_of(|p| prim.eval(p), interval, &x, &steps)?;
        details.push(SampleResidual {
            residual: residual(&d, &f.eval(&x)?)?,
            x,
            y: None,
            witness: None,
        });
    }
    VerificationReport::from_samples("ftc1", opts.tol, details)
}

/// `∫_x^y f = F(y) - F(x)` at the given pairs, which may be incomparable.
pub fn verify_ftc2_pairs(
    big_f: &LatticeFunction,
    f: &LatticeFunction,
    pairs: &[(Element, Element)],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let details = pairs
        .iter()
        .map(|(x, y)| {
            let lhs = signed_integrate(f, x, y, &opts.sched)?.value;
            let rhs = big_f.eval(y)?.sub(&big_f.eval(x)?)?;
            Ok(SampleResidual {
                x: x.clone(),
                y: Some(y.clone()),
                residual: residual(&lhs, &rhs)?,
                witness: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    VerificationReport::from_samples("ftc2", opts.tol, details)
}

/// `∫_x^y f = F(y) - F(x)` at random pairs drawn from `interval`.
pub fn verify_ftc2(
    big_f: &LatticeFunction,
    f: &LatticeFunction,
    interval: &OrderInterval,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pairs = (0..opts.samples.max(1))
        .map(|_| {
            Ok((
                sample_point(&mut rng, interval, 0.0)?,
                sample_point(&mut rng, interval, 0.0)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    verify_ftc2_pairs(big_f, f, &pairs, opts)
}

/// Solves the integral mean value equation at random pairs drawn from
/// `interval`.
pub fn verify_mvt(
    f: &LatticeFunction,
    interval: &OrderInterval,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pairs = (0..opts.samples.max(1))
        .map(|_| {
            Ok((
                sample_point(&mut rng, interval, 0.0)?,
                sample_point(&mut rng, interval, 0.0)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    verify_mvt_pairs(f, &pairs, opts)
}

/// Solves the integral mean value equation at the given pairs. The residual
/// also absorbs any distance of `c` from `[x ∧ y, x ∨ y]`.
pub fn verify_mvt_pairs(
    f: &LatticeFunction,
    pairs: &[(Element, Element)],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let mut details = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let (x, y) = (x.clone(), y.clone());
        let sol = mvt_integral_solve(f, &x, &y, opts.tol * 1e-3, &opts.sched)?;
        let span = OrderInterval::spanned_by(&x, &y)?;
        let coords = (0..x.dim())
            .map(|i| {
                let c = sol.c.get(i);
                let outside = (span.lo().get(i) - c).max(c - span.hi().get(i)).max(0.0);
                sol.residual.get(i).max(outside)
            })
            .collect();
        details.push(SampleResidual {
            x,
            y: Some(y),
            residual: Element::from_computed(coords)?,
            witness: Some(sol.c),
        });
    }
    VerificationReport::from_samples("mvt", opts.tol, details)
}

/// `∫_lo^hi f(G(t)) g(t) dt = ∫_{G(lo)}^{G(hi)} f(u) du`.
///
/// When `f_domain` is given, the range of `G` over `interval` must lie in it.
pub fn verify_substitution(
    f: &LatticeFunction,
    g: &LatticeFunction,
    big_g: &LatticeFunction,
    interval: &OrderInterval,
    opts: &VerifyOptions,
    f_domain: Option<&OrderInterval>,
) -> Result<VerificationReport> {
    if let Some(domain) = f_domain {
        let range = extrema(big_g, interval, opts.sched.tol)?;
        domain.check_contains(&range.m)?;
        domain.check_contains(&range.big_m)?;
    }
    let composite = f.compose(big_g)?.mul(g)?;
    let lhs = integrate(&composite, interval, &opts.sched)?.value;
    let ga = big_g.eval(interval.lo())?;
    let gb = big_g.eval(interval.hi())?;
    let rhs = signed_integrate(f, &ga, &gb, &opts.sched)?.value;
    let details = vec![SampleResidual {
        x: interval.lo().clone(),
        y: Some(interval.hi().clone()),
        residual: residual(&lhs, &rhs)?,
        witness: None,
    }];
    VerificationReport::from_samples("usub", opts.tol, details)
}

/// `∫ f g' = f(hi)g(hi) - f(lo)g(lo) - ∫ f' g` over `interval`.
pub fn verify_by_parts(
    f: &LatticeFunction,
    g: &LatticeFunction,
    df: &LatticeFunction,
    dg: &LatticeFunction,
    interval: &OrderInterval,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let (a, b) = (interval.lo(), interval.hi());
    let lhs = integrate(&f.mul(dg)?, interval, &opts.sched)?.value;
    let boundary = f
        .eval(b)?
        .mul(&g.eval(b)?)?
        .sub(&f.eval(a)?.mul(&g.eval(a)?)?)?;
    let rhs = boundary.sub(&integrate(&df.mul(g)?, interval, &opts.sched)?.value)?;
    let details = vec![SampleResidual {
        x: a.clone(),
        y: Some(b.clone()),
        residual: residual(&lhs, &rhs)?,
        witness: None,
    }];
    VerificationReport::from_samples("parts", opts.tol, details)
}
