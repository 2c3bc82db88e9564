//! The atomic f-algebra `R^A`.
//!
//! Every band of `R^A` is a set of coordinates, so band projections, the
//! trichotomy `E = B_{x<y} + B_{y<x} + B_{x=y}` and the total orderisation of
//! a finite set all reduce to exact coordinatewise computations. The
//! multiplicative unit is the all-ones element and the product is taken
//! coordinatewise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A member of `R^A`: one finite real per atom.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Element {
    coords: Vec<f64>,
}

impl Element {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { coords })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::splat(dim, 0.0)
    }

    /// The multiplicative unit (a weak order unit).
    pub fn one(dim: usize) -> Result<Self> {
        Self::splat(dim, 1.0)
    }

    pub fn splat(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    /// Builds an element from computed coordinates, rejecting overflow.
    pub(crate) fn from_computed(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn get(&self, atom: usize) -> f64 {
        self.coords[atom]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    fn check_dim(&self, other: &Element) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Element, op: impl Fn(f64, f64) -> f64) -> Result<Element> {
        self.check_dim(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Element::from_computed(coords)
    }

    fn map(&self, op: impl Fn(f64) -> f64) -> Result<Element> {
        Element::from_computed(self.coords.iter().map(|&a| op(a)).collect())
    }

    /// `x ∨ y`
    pub fn sup(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, f64::max)
    }

    /// `x ∧ y`
    pub fn inf(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, f64::min)
    }

    pub fn abs(&self) -> Element {
        Element {
            coords: self.coords.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, r: f64) -> Result<Element> {
        self.map(|a| r * a)
    }

    /// The f-algebra product.
    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn neg(&self) -> Element {
        Element {
            coords: self.coords.iter().map(|v| -v).collect(),
        }
    }

    pub fn leq(&self, other: &Element) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b))
    }

    /// `x ≪ y`: `y - x` is a weak order unit, i.e. strictly positive on every atom.
    pub fn strictly_below(&self, other: &Element) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.coords.iter().zip(&other.coords).all(|(a, b)| a < b))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&v| v == 0.0)
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coords).finish()
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl TryFrom<Vec<f64>> for Element {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Element::new(coords)
    }
}

impl From<Element> for Vec<f64> {
    fn from(e: Element) -> Self {
        e.coords
    }
}

/// A band of `R^A`, i.e. a set of atoms. Doubles as its band projection.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Band {
    atoms: BTreeSet<usize>,
    dim: usize,
}

impl Band {
    pub fn new(dim: usize, atoms: impl IntoIterator<Item = usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let atoms: BTreeSet<usize> = atoms.into_iter().collect();
        if let Some(&atom) = atoms.iter().find(|&&a| a >= dim) {
            return Err(Error::AtomOutOfRange { atom, dim });
        }
        Ok(Self { atoms, dim })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, [])
    }

    pub fn full(dim: usize) -> Result<Self> {
        Self::new(dim, 0..dim)
    }

    fn from_predicate(dim: usize, pred: impl Fn(usize) -> bool) -> Band {
        Band {
            atoms: (0..dim).filter(|&i| pred(i)).collect(),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.atoms.iter().copied()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.atoms.contains(&atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The disjoint complement `B^d`.
    pub fn complement(&self) -> Band {
        Band::from_predicate(self.dim, |i| !self.contains(i))
    }

    pub fn union(&self, other: &Band) -> Result<Band> {
        self.check_dim(other.dim)?;
        Ok(Band {
            atoms: self.atoms.union(&other.atoms).copied().collect(),
            dim: self.dim,
        })
    }

    pub fn intersection(&self, other: &Band) -> Result<Band> {
        self.check_dim(other.dim)?;
        Ok(Band {
            atoms: self.atoms.intersection(&other.atoms).copied().collect(),
            dim: self.dim,
        })
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: dim,
            });
        }
        Ok(())
    }

    /// Band projection: zeroes every coordinate outside the band.
    pub fn project(&self, x: &Element) -> Result<Element> {
        self.check_dim(x.dim())?;
        let coords = (0..self.dim)
            .map(|i| if self.contains(i) { x.get(i) } else { 0.0 })
            .collect();
        Ok(Element { coords })
    }
}

impl fmt::Debug for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.atoms).finish()
    }
}

impl Serialize for Band {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.atoms.iter())
    }
}

/// `E = ⊕ B_i`: pairwise disjoint bands covering every atom. Parts may be empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BandDecomposition {
    parts: Vec<Band>,
}

impl BandDecomposition {
    pub fn new(parts: Vec<Band>) -> Result<Self> {
        let dim = parts.first().ok_or(Error::EmptyInput)?.dim();
        let mut seen = vec![false; dim];
        for part in &parts {
            part.check_dim(dim)?;
            for atom in part.atoms() {
                if seen[atom] {
                    return Err(Error::InvalidArgument(format!(
                        "atom {atom} appears in two parts"
                    )));
                }
                seen[atom] = true;
            }
        }
        if let Some(atom) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "atom {atom} is not covered"
            )));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[Band] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Band> {
        self.parts
    }
}

/// `[lo, hi] = { x : lo ≤ x ≤ hi }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct OrderInterval {
    lo: Element,
    hi: Element,
}

#[derive(Deserialize)]
struct RawInterval {
    lo: Element,
    hi: Element,
}

impl TryFrom<RawInterval> for OrderInterval {
    type Error = Error;

    fn try_from(raw: RawInterval) -> Result<Self> {
        OrderInterval::new(raw.lo, raw.hi)
    }
}

impl OrderInterval {
    pub fn new(lo: Element, hi: Element) -> Result<Self> {
        lo.check_dim(&hi)?;
        if let Some(atom) = (0..lo.dim()).find(|&i| lo.get(i) > hi.get(i)) {
            return Err(Error::InvalidInterval { atom });
        }
        Ok(Self { lo, hi })
    }

    /// `[a ∧ b, a ∨ b]` for arbitrary, possibly incomparable, endpoints.
    pub fn spanned_by(a: &Element, b: &Element) -> Result<Self> {
        Ok(Self {
            lo: a.inf(b)?,
            hi: a.sup(b)?,
        })
    }

    pub fn lo(&self) -> &Element {
        &self.lo
    }

    pub fn hi(&self) -> &Element {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    /// `hi - lo`
    pub fn width(&self) -> Element {
        Element {
            coords: (0..self.dim())
                .map(|i| self.hi.get(i) - self.lo.get(i))
                .collect(),
        }
    }

    pub fn contains(&self, x: &Element) -> Result<bool> {
        Ok(self.lo.leq(x)? && x.leq(&self.hi)?)
    }

    pub fn check_contains(&self, x: &Element) -> Result<()> {
        self.lo.check_dim(x)?;
        match (0..self.dim()).find(|&i| x.get(i) < self.lo.get(i) || x.get(i) > self.hi.get(i)) {
            Some(atom) => Err(Error::OutOfInterval { atom }),
            None => Ok(()),
        }
    }

    /// `lo ≪ hi`
    pub fn is_solid(&self) -> bool {
        (0..self.dim()).all(|i| self.lo.get(i) < self.hi.get(i))
    }
}

/// `B_{x≤y}`: the largest band on which `P(x) ≤ P(y)`.
pub fn band_leq(x: &Element, y: &Element) -> Result<Band> {
    x.check_dim(y)?;
    Ok(Band::from_predicate(x.dim(), |i| x.get(i) <= y.get(i)))
}

/// `B_{x=y}` with exact equality.
pub fn band_eq(x: &Element, y: &Element) -> Result<Band> {
    band_eq_within(x, y, 0.0)
}

/// `B_{x=y}` treating coordinates within `tol` of each other as equal.
pub fn band_eq_within(x: &Element, y: &Element, tol: f64) -> Result<Band> {
    x.check_dim(y)?;
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    Ok(Band::from_predicate(x.dim(), |i| {
        (x.get(i) - y.get(i)).abs() <= tol
    }))
}

/// `B_{x<y}`: the largest band on which `y - x` is a weak order unit.
pub fn band_lt(x: &Element, y: &Element) -> Result<Band> {
    x.check_dim(y)?;
    Ok(Band::from_predicate(x.dim(), |i| x.get(i) < y.get(i)))
}

/// `[B_{x<y}, B_{y<x}, B_{x=y}]`
pub fn trichotomy(x: &Element, y: &Element) -> Result<BandDecomposition> {
    Ok(BandDecomposition {
        parts: vec![band_lt(x, y)?, band_lt(y, x)?, band_eq(x, y)?],
    })
}

fn check_points(points: &[Element]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    for p in &points[1..] {
        first.check_dim(p)?;
    }
    Ok(first.dim())
}

/// Groups atoms by the weak ordering the points induce on them.
///
/// Atoms share a part exactly when the dense ranks of `(x_1[i], ..., x_n[i])`
/// coincide, so each projected point set is totally ordered. Parts are listed
/// by their smallest atom.
pub fn totally_ordered_decomposition(points: &[Element]) -> Result<BandDecomposition> {
    let dim = check_points(points)?;
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for atom in 0..dim {
        let column: Vec<f64> = points.iter().map(|p| p.get(atom)).collect();
        groups.entry(dense_ranks(&column)).or_default().push(atom);
    }
    let mut parts: Vec<Vec<usize>> = groups.into_values().collect();
    parts.sort_by_key(|atoms| atoms[0]);
    Ok(BandDecomposition {
        parts: parts
            .into_iter()
            .map(|atoms| Band {
                atoms: atoms.into_iter().collect(),
                dim,
            })
            .collect(),
    })
}

fn dense_ranks(values: &[f64]) -> Vec<usize> {
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| a == b);
    values
        .iter()
        .map(|v| distinct.partition_point(|d| d < v))
        .collect()
}

/// Total orderisation: the chain `M_1 ≤ ... ≤ M_n`, built by sorting each atom.
pub fn totord(points: &[Element]) -> Result<Vec<Element>> {
    let dim = check_points(points)?;
    let n = points.len();
    let mut chain = vec![Vec::with_capacity(dim); n];
    for atom in 0..dim {
        let mut column: Vec<f64> = points.iter().map(|p| p.get(atom)).collect();
        column.sort_by(f64::total_cmp);
        for (k, v) in column.into_iter().enumerate() {
            chain[k].push(v);
        }
    }
    Ok(chain.into_iter().map(|coords| Element { coords }).collect())
}

/// Total orderisation via the lattice polynomials
/// `M_k = ⋁_{|S| = n+1-k} ⋀_{x ∈ S} x`.
///
/// Exponential in `points.len()`; an independent route to [`totord`].
pub fn totord_lattice_polynomial(points: &[Element]) -> Result<Vec<Element>> {
    check_points(points)?;
    let n = points.len();
    (1..=n)
        .map(|k| {
            let mut acc: Option<Element> = None;
            for subset in Combinations::new(n, n + 1 - k) {
                let mut meet = points[subset[0]].clone();
                for &j in &subset[1..] {
                    meet = meet.inf(&points[j])?;
                }
                acc = Some(match acc {
                    Some(a) => a.sup(&meet)?,
                    None => meet,
                });
            }
            Ok(acc.expect("at least one subset"))
        })
        .collect()
}

/// Lexicographic k-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (0..k).collect());
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
