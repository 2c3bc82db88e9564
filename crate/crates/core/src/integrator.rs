//! Darboux and Riemann sums and the integral as their common limit.
//!
//! The integral over `[a, b]` is approached along the uniform dyadic
//! partitions `P_k = uniform([a, b], 2^k)`, which are cofinal under `⪯`.
//! Each atom is summed independently, left to right over cells, so the result
//! does not depend on how atoms are scheduled across threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{
    corner_extrema, ExtremaMethod, FunctionKind, GeneralMap, LatticeFunction, PreparedKernel,
    ScalarKernel,
};
use crate::lattice::{band_lt, Element, OrderInterval};
use crate::partition::{uniform_point, Partition, TaggedPartition};

/// Deepest refinement used on the general-map path.
pub const GENERAL_MAX_DEPTH: u32 = 8;

/// Finite stand-in for a regulator `Ε ↘ 0`: stop once every atom satisfies
/// `gap_i ≤ tol·(1 + |value_i|)`, or give up after `max_depth` halvings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSchedule {
    pub tol: f64,
    pub max_depth: u32,
}

impl ToleranceSchedule {
    pub fn new(tol: f64, max_depth: u32) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if max_depth == 0 || max_depth > 30 {
            return Err(Error::InvalidArgument(format!(
                "max_depth must be in 1..=30, got {max_depth}"
            )));
        }
        Ok(Self { tol, max_depth })
    }
}

impl Default for ToleranceSchedule {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_depth: 22,
        }
    }
}

/// `L(f, P)` and `U(f, P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DarbouxSums {
    pub lower: Element,
    pub upper: Element,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: Element,
    pub lower: Element,
    pub upper: Element,
    pub gap: Element,
    pub depth: u32,
    pub converged: bool,
    pub tolerance: ToleranceSchedule,
    pub method: ExtremaMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Sums `Σ m_j (x_j - x_{j-1})` and `Σ M_j (x_j - x_{j-1})` for one atom.
fn atom_sums(
    prepared: &PreparedKernel,
    xs: impl Iterator<Item = f64>,
    values: &[f64],
    atom: usize,
) -> Result<(f64, f64)> {
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut prev: Option<f64> = None;
    for (j, x) in xs.enumerate() {
        if let Some(u) = prev {
            let w = x - u;
            let ext = prepared
                .cell(u, x, values[j - 1], values[j])
                .map_err(|source| Error::Eval { atom, source })?;
            lower += (ext.min - ext.slack) * w;
            upper += (ext.max + ext.slack) * w;
        }
        prev = Some(x);
    }
    if !(lower.is_finite() && upper.is_finite()) {
        return Err(Error::Overflow { atom });
    }
    Ok((lower, upper))
}

/// Lower and upper Darboux sums of `f` over `partition`.
///
/// Coordinatewise functions use per-atom extrema; `tol` bounds the error of
/// sampled extrema, which widen the sums by `tol` per unit width. General maps
/// are only supported when their cell extrema sit at box corners.
pub fn darboux_sums(f: &LatticeFunction, partition: &Partition, tol: f64) -> Result<DarbouxSums> {
    check_dim(f, partition.interval())?;
    let points = partition.points();
    match f.kind() {
        FunctionKind::Coordinatewise(kernels) => {
            let interval = partition.interval();
            let mut lower = Vec::with_capacity(kernels.len());
            let mut upper = Vec::with_capacity(kernels.len());
            for (atom, k) in kernels.iter().enumerate() {
                let prepared =
                    PreparedKernel::new(k, interval.lo().get(atom), interval.hi().get(atom), tol);
                let values = points
                    .iter()
                    .map(|p| k.eval(p.get(atom)))
                    .collect::<std::result::Result<Vec<f64>, _>>()
                    .map_err(|source| Error::Eval { atom, source })?;
                let (l, u) =
                    atom_sums(&prepared, points.iter().map(|p| p.get(atom)), &values, atom)?;
                lower.push(l);
                upper.push(u);
            }
            Ok(DarbouxSums {
                lower: Element::new(lower)?,
                upper: Element::new(upper)?,
            })
        }
        FunctionKind::General(g) => general_darboux(g, points),
    }
}

fn general_darboux(g: &GeneralMap, points: &[Element]) -> Result<DarbouxSums> {
    let dim = points[0].dim();
    let mut lower = vec![0.0; dim];
    let mut upper = vec![0.0; dim];
    for w in points.windows(2) {
        let (m, big_m) = corner_extrema(g, &w[0], &w[1])?;
        for i in 0..dim {
            let width = w[1].get(i) - w[0].get(i);
            lower[i] += m.get(i) * width;
            upper[i] += big_m.get(i) * width;
        }
    }
    Ok(DarbouxSums {
        lower: Element::from_computed(lower)?,
        upper: Element::from_computed(upper)?,
    })
}

/// `R(f, P, {c_i}) = Σ f(c_i)(x_i - x_{i-1})`.
pub fn riemann_sum(f: &LatticeFunction, tagged: &TaggedPartition) -> Result<Element> {
    let partition = tagged.partition();
    check_dim(f, partition.interval())?;
    let mut acc = vec![0.0; f.dim()];
    for (tag, w) in tagged.tags().iter().zip(partition.points().windows(2)) {
        let y = f.eval(tag)?;
        for (i, a) in acc.iter_mut().enumerate() {
            *a += y.get(i) * (w[1].get(i) - w[0].get(i));
        }
    }
    Element::from_computed(acc)
}

fn check_dim(f: &LatticeFunction, interval: &OrderInterval) -> Result<()> {
    if f.dim() != interval.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: interval.dim(),
        });
    }
    Ok(())
}

/// Integral of `f` over `interval`, with atoms evaluated in parallel.
pub fn integrate(
    f: &LatticeFunction,
    interval: &OrderInterval,
    sched: &ToleranceSchedule,
) -> Result<IntegralResult> {
    integrate_with(f, interval, sched, Execution::Parallel)
}

pub fn integrate_with(
    f: &LatticeFunction,
    interval: &OrderInterval,
    sched: &ToleranceSchedule,
    exec: Execution,
) -> Result<IntegralResult> {
    check_dim(f, interval)?;
    match f.kind() {
        FunctionKind::Coordinatewise(kernels) => integrate_kernels(kernels, interval, sched, exec),
        FunctionKind::General(_) => integrate_general(f, interval, sched),
    }
}

/// Tolerance handed to sampled extrema so their widening costs at most half
/// of the stopping tolerance.
pub(crate) fn extrema_tolerance(tol: f64, width: f64) -> f64 {
    tol / (4.0 * width.max(1.0))
}

/// One atom's kernel values on the current dyadic grid.
struct AtomGrid<'a> {
    atom: usize,
    lo: f64,
    hi: f64,
    kernel: &'a ScalarKernel,
    prepared: PreparedKernel,
    depth: u32,
    values: Vec<f64>,
    sums: (f64, f64),
}

impl<'a> AtomGrid<'a> {
    fn new(atom: usize, kernel: &'a ScalarKernel, lo: f64, hi: f64, tol: f64) -> Result<Self> {
        let wrap = |source| Error::Eval { atom, source };
        let prepared = PreparedKernel::new(kernel, lo, hi, extrema_tolerance(tol, hi - lo));
        let values = vec![
            kernel.eval(lo).map_err(wrap)?,
            kernel.eval(hi).map_err(wrap)?,
        ];
        let mut grid = Self {
            atom,
            lo,
            hi,
            kernel,
            prepared,
            depth: 0,
            values,
            sums: (0.0, 0.0),
        };
        grid.sums = grid.compute_sums()?;
        Ok(grid)
    }

    fn cells(&self) -> usize {
        1 << self.depth
    }

    fn compute_sums(&self) -> Result<(f64, f64)> {
        let n = self.cells();
        let (lo, hi) = (self.lo, self.hi);
        atom_sums(
            &self.prepared,
            (0..=n).map(|j| uniform_point(lo, hi, j, n)),
            &self.values,
            self.atom,
        )
    }

    /// Halves every cell, reusing the kernel values already computed.
    fn refine(&mut self) -> Result<()> {
        let n = 2 * self.cells();
        let mut values = Vec::with_capacity(n + 1);
        for j in 0..=n {
            if j % 2 == 0 {
                values.push(self.values[j / 2]);
            } else {
                let x = uniform_point(self.lo, self.hi, j, n);
                let v = self.kernel.eval(x).map_err(|source| Error::Eval {
                    atom: self.atom,
                    source,
                })?;
                values.push(v);
            }
        }
        self.values = values;
        self.depth += 1;
        self.sums = self.compute_sums()?;
        Ok(())
    }

    fn converged(&self, tol: f64) -> bool {
        let (l, u) = self.sums;
        u - l <= tol * (1.0 + midpoint(l, u).abs())
    }
}

fn midpoint(l: f64, u: f64) -> f64 {
    0.5 * (l + u)
}

fn integrate_kernels(
    kernels: &[ScalarKernel],
    interval: &OrderInterval,
    sched: &ToleranceSchedule,
    exec: Execution,
) -> Result<IntegralResult> {
    let mut grids = kernels
        .iter()
        .enumerate()
        .map(|(atom, k)| {
            AtomGrid::new(
                atom,
                k,
                interval.lo().get(atom),
                interval.hi().get(atom),
                sched.tol,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut depth = 0;
    let mut converged = grids.iter().all(|g| g.converged(sched.tol));
    while !converged && depth < sched.max_depth {
        match exec {
            Execution::Parallel => grids.par_iter_mut().try_for_each(AtomGrid::refine)?,
            Execution::Sequential => grids.iter_mut().try_for_each(AtomGrid::refine)?,
        }
        depth += 1;
        converged = grids.iter().all(|g| g.converged(sched.tol));
    }
    let method = grids
        .iter()
        .fold(ExtremaMethod::Exact, |m, g| m.worst(g.prepared.method()));
    let lower: Vec<f64> = grids.iter().map(|g| g.sums.0).collect();
    let upper: Vec<f64> = grids.iter().map(|g| g.sums.1).collect();
    build_result(lower, upper, depth, converged, *sched, method)
}

fn build_result(
    lower: Vec<f64>,
    upper: Vec<f64>,
    depth: u32,
    converged: bool,
    tolerance: ToleranceSchedule,
    method: ExtremaMethod,
) -> Result<IntegralResult> {
    let value: Vec<f64> = lower
        .iter()
        .zip(&upper)
        .map(|(&l, &u)| midpoint(l, u))
        .collect();
    let gap: Vec<f64> = lower.iter().zip(&upper).map(|(&l, &u)| u - l).collect();
    Ok(IntegralResult {
        value: Element::from_computed(value)?,
        lower: Element::from_computed(lower)?,
        upper: Element::from_computed(upper)?,
        gap: Element::from_computed(gap)?,
        depth,
        converged,
        tolerance,
        method,
    })
}

/// Chain that sweeps the atoms one at a time in the given order, `n` steps each.
pub fn staircase_partition(
    interval: &OrderInterval,
    order: &[usize],
    n: usize,
) -> Result<Partition> {
    if n == 0 {
        return Err(Error::InvalidArgument("staircase needs n >= 1".into()));
    }
    let mut current = interval.lo().coords().to_vec();
    let mut points = vec![interval.lo().clone()];
    for &atom in order {
        if atom >= interval.dim() {
            return Err(Error::AtomOutOfRange {
                atom,
                dim: interval.dim(),
            });
        }
        for j in 1..=n {
            current[atom] = uniform_point(interval.lo().get(atom), interval.hi().get(atom), j, n);
            points.push(Element::new(current.clone())?);
        }
    }
    Partition::new(points, interval.clone())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Integration attempt for a general map with corner-extremal cells.
///
/// Without local band preservation the Darboux sums are not monotone under
/// `⪯`, so a single cofinal chain proves nothing. At each depth this path
/// evaluates the diagonal uniform partition together with every axis-ordered
/// staircase, and reports the envelope `[min L, max U]`. For the swap map the
/// staircases disagree at every depth and the envelope never closes.
fn integrate_general(
    f: &LatticeFunction,
    interval: &OrderInterval,
    sched: &ToleranceSchedule,
) -> Result<IntegralResult> {
    let dim = interval.dim();
    let orders = permutations(dim);
    let max_depth = sched.max_depth.min(GENERAL_MAX_DEPTH);
    let mut depth = 0;
    loop {
        let n = 1usize << depth;
        let mut family = vec![Partition::uniform(interval, n)?];
        if dim > 1 {
            for order in &orders {
                family.push(staircase_partition(interval, order, n)?);
            }
        }
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        for p in &family {
            let sums = darboux_sums(f, p, 0.0)?;
            for i in 0..dim {
                lower[i] = lower[i].min(sums.lower.get(i));
                upper[i] = upper[i].max(sums.upper.get(i));
            }
        }
        let converged = (0..dim)
            .all(|i| upper[i] - lower[i] <= sched.tol * (1.0 + midpoint(lower[i], upper[i]).abs()));
        if converged || depth >= max_depth {
            return build_result(lower, upper, depth, converged, *sched, ExtremaMethod::Exact);
        }
        depth += 1;
    }
}

/// `∫_a^b f = P_{a<b}(∫_{a∧b}^{a∨b} f) - P_{b<a}(∫_{a∧b}^{a∨b} f)` for
/// arbitrary, possibly incomparable, endpoints.
pub fn signed_integrate(
    f: &LatticeFunction,
    a: &Element,
    b: &Element,
    sched: &ToleranceSchedule,
) -> Result<IntegralResult> {
    let interval = OrderInterval::spanned_by(a, b)?;
    let whole = integrate(f, &interval, sched)?;
    let forward = band_lt(a, b)?;
    let backward = band_lt(b, a)?;
    let dim = a.dim();
    let mut lower = vec![0.0; dim];
    let mut upper = vec![0.0; dim];
    let mut value = vec![0.0; dim];
    for i in 0..dim {
        let (fwd, bwd) = (
            if forward.contains(i) { 1.0 } else { 0.0 },
            if backward.contains(i) { 1.0 } else { 0.0 },
        );
        value[i] = fwd * whole.value.get(i) - bwd * whole.value.get(i);
        if backward.contains(i) {
            lower[i] = -whole.upper.get(i);
            upper[i] = -whole.lower.get(i);
        } else if forward.contains(i) {
            lower[i] = whole.lower.get(i);
            upper[i] = whole.upper.get(i);
        }
    }
    let gap: Vec<f64> = lower.iter().zip(&upper).map(|(&l, &u)| u - l).collect();
    Ok(IntegralResult {
        value: Element::from_computed(value)?,
        lower: Element::from_computed(lower)?,
        upper: Element::from_computed(upper)?,
        gap: Element::from_computed(gap)?,
        ..whole
    })
}

/// Integrals over `[lo, c]` and `[c, hi]`.
pub fn split_integrate(
    f: &LatticeFunction,
    interval: &OrderInterval,
    c: &Element,
    sched: &ToleranceSchedule,
) -> Result<(IntegralResult, IntegralResult)> {
    interval.check_contains(c)?;
    let left = OrderInterval::new(interval.lo().clone(), c.clone())?;
    let right = OrderInterval::new(c.clone(), interval.hi().clone())?;
    Ok((integrate(f, &left, sched)?, integrate(f, &right, sched)?))
}
