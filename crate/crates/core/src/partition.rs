//! Partitions and tagged partitions of order intervals, and the refinement
//! preorder `⪯`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::{totord, Element, OrderInterval};

/// A chain `lo = x_0 ≤ x_1 ≤ ... ≤ x_n = hi`. Repeated points are allowed and
/// act as zero-width cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    points: Vec<Element>,
    interval: OrderInterval,
}

impl Partition {
    pub fn new(points: Vec<Element>, interval: OrderInterval) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPartition("need at least two points".into()));
        }
        for p in &points {
            if p.dim() != interval.dim() {
                return Err(Error::DimensionMismatch {
                    left: interval.dim(),
                    right: p.dim(),
                });
            }
        }
        if points[0] != *interval.lo() || points[points.len() - 1] != *interval.hi() {
            return Err(Error::InvalidPartition(
                "first and last points must be the interval endpoints".into(),
            ));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !w[0].leq(&w[1])? {
                return Err(Error::InvalidPartition(format!(
                    "points {i} and {} are not ordered",
                    i + 1
                )));
            }
        }
        Ok(Self { points, interval })
    }

    /// Builds a partition from a chain whose ends define the interval.
    pub fn from_chain(points: Vec<Element>) -> Result<Self> {
        let lo = points.first().ok_or(Error::EmptyInput)?.clone();
        let hi = points.last().unwrap().clone();
        let interval = OrderInterval::new(lo, hi)?;
        Self::new(points, interval)
    }

    /// `x_i = a + (i/n)(b - a)` for `i = 0..=n`.
    pub fn uniform(interval: &OrderInterval, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "uniform partition needs n >= 1".into(),
            ));
        }
        let points = (0..=n)
            .map(|i| {
                if i == n {
                    return interval.hi().clone();
                }
                let coords = (0..interval.dim())
                    .map(|atom| {
                        uniform_point(interval.lo().get(atom), interval.hi().get(atom), i, n)
                    })
                    .collect();
                Element::new(coords).expect("finite")
            })
            .collect();
        Ok(Self {
            points,
            interval: interval.clone(),
        })
    }

    pub fn points(&self) -> &[Element] {
        &self.points
    }

    pub fn interval(&self) -> &OrderInterval {
        &self.interval
    }

    pub fn cells(&self) -> usize {
        self.points.len() - 1
    }

    /// The chain with consecutive duplicates removed.
    pub fn collapsed(&self) -> Partition {
        let mut points = self.points.clone();
        points.dedup();
        if points.len() == 1 {
            points.push(points[0].clone());
        }
        Partition {
            points,
            interval: self.interval.clone(),
        }
    }

    fn check_interval(&self, other: &Partition) -> Result<()> {
        if self.interval != other.interval {
            return Err(Error::IntervalMismatch);
        }
        Ok(())
    }

    /// Decides `self ⪯ other`: on every atom the projected points of `self`
    /// are among those of `other`. Atoms are the minimal bands, so this is the
    /// existence of a decomposition with `P_i(self) ⊆ P_i(other)`.
    pub fn refines(&self, other: &Partition) -> Result<bool> {
        self.check_interval(other)?;
        Ok((0..self.interval.dim()).all(|atom| {
            let mut theirs: Vec<f64> = other.points.iter().map(|q| q.get(atom)).collect();
            theirs.sort_by(f64::total_cmp);
            self.points.iter().all(|p| {
                let v = p.get(atom);
                theirs.binary_search_by(|q| q.total_cmp(&v)).is_ok() || theirs.contains(&v)
            })
        }))
    }

    /// `totord(P ∪ Q)`, an upper bound of both partitions under `⪯`.
    pub fn common_refinement(&self, other: &Partition) -> Result<Partition> {
        self.check_interval(other)?;
        let mut union: Vec<Element> = Vec::with_capacity(self.points.len() + other.points.len());
        for p in self.points.iter().chain(&other.points) {
            if !union.contains(p) {
                union.push(p.clone());
            }
        }
        if union.len() == 1 {
            union.push(union[0].clone());
        }
        Ok(Partition {
            points: totord(&union)?,
            interval: self.interval.clone(),
        })
    }

    pub fn tag(&self, rule: TagRule) -> TaggedPartition {
        let mut rng = match rule {
            TagRule::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        let tags = self
            .points
            .windows(2)
            .map(|w| {
                let coords = (0..self.interval.dim())
                    .map(|atom| {
                        let (u, v) = (w[0].get(atom), w[1].get(atom));
                        match rule {
                            TagRule::Left => u,
                            TagRule::Right => v,
                            TagRule::Midpoint => (u + 0.5 * (v - u)).clamp(u, v),
                            TagRule::Random(_) => {
                                let r: f64 = rng.as_mut().unwrap().gen();
                                (u + r * (v - u)).clamp(u, v)
                            }
                        }
                    })
                    .collect();
                Element::new(coords).expect("finite")
            })
            .collect();
        TaggedPartition {
            partition: self.clone(),
            tags,
        }
    }
}

pub(crate) fn uniform_point(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i == n {
        return hi;
    }
    lo + (i as f64 / n as f64) * (hi - lo)
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut points = self.points.clone();
        points.dedup();
        serializer.collect_seq(points.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagRule {
    Midpoint,
    Left,
    Right,
    Random(u64),
}

/// A partition with one tag `c_i ∈ [x_{i-1}, x_i]` per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPartition {
    partition: Partition,
    tags: Vec<Element>,
}

impl TaggedPartition {
    pub fn new(partition: Partition, tags: Vec<Element>) -> Result<Self> {
        if tags.len() != partition.cells() {
            return Err(Error::InvalidPartition(format!(
                "{} tags for {} cells",
                tags.len(),
                partition.cells()
            )));
        }
        for (i, (tag, w)) in tags.iter().zip(partition.points.windows(2)).enumerate() {
            if !(w[0].leq(tag)? && tag.leq(&w[1])?) {
                return Err(Error::InvalidPartition(format!(
                    "tag {i} is outside its cell"
                )));
            }
        }
        Ok(Self { partition, tags })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn tags(&self) -> &[Element] {
        &self.tags
    }
}
