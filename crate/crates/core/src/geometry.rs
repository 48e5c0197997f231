//! Points of the unit cube, the sup-norm metric and dyadic cells.
//!
//! The hierarchical partition used by the adaptive agents is the dyadic
//! refinement of `[0,1]^d` under the `ℓ∞` metric: a cell at level `ℓ` is the
//! product of intervals `[i·2^-ℓ, (i+1)·2^-ℓ]`, has diameter `2^-ℓ`, and splits
//! into `2^d` children at level `ℓ + 1`.
//!
//! Cells are half-open for membership purposes (`[a, b)`), except the last
//! cell along each axis which also contains `1`. This makes
//! [`cell_containing`] total and deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Deepest admissible level. Cell widths below `2^-30` carry no useful signal.
pub const MAX_DEPTH: u32 = 30;

/// A point of `[0,1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point<T>(Vec<T>);

impl<T: Real> Point<T> {
    /// Builds a point, rejecting coordinates outside `[0,1]` (and NaN).
    pub fn new(coords: Vec<T>) -> Result<Self> {
        for &c in &coords {
            if !(c >= T::zero() && c <= T::one()) {
                return Err(Error::OutOfUnitCube { value: c.as_f64() });
            }
        }
        Ok(Point(coords))
    }

    /// Builds a point by clamping every coordinate into `[0,1]`.
    pub fn clamped(coords: Vec<T>) -> Self {
        Point(
            coords
                .into_iter()
                .map(|c| c.max(T::zero()).min(T::one()))
                .collect(),
        )
    }

    pub fn splat(value: T, dim: usize) -> Self {
        Self::clamped(vec![value; dim])
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| T::lit(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    /// Concatenates a state and an action into a point of `S × A`.
    pub fn concat(&self, other: &Point<T>) -> Point<T> {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Point(v)
    }
}

impl<T> std::ops::Index<usize> for Point<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// Dimensions of the state space, the action space and their product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub state_dim: usize,
    pub action_dim: usize,
}

impl MetricSpec {
    pub fn new(state_dim: usize, action_dim: usize) -> Result<Self> {
        if state_dim == 0 || action_dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "state and action dimensions must be positive (got {state_dim}, {action_dim})"
            )));
        }
        Ok(Self {
            state_dim,
            action_dim,
        })
    }

    /// Dimension of `S × A`.
    pub fn dim(&self) -> usize {
        self.state_dim + self.action_dim
    }
}

/// `max_i |p_i - q_i|`.
pub fn dist_inf<T: Real>(p: &Point<T>, q: &Point<T>) -> Result<T> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(sup_distance(p.coords(), q.coords()))
}

/// Sup-norm distance of two equally long coordinate slices.
#[inline]
pub(crate) fn sup_distance<T: Real>(p: &[T], q: &[T]) -> T {
    p.iter()
        .zip(q)
        .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
}

/// A cell of the dyadic grid at `level`, identified by its per-axis index.
///
/// Ordering is by level first and then lexicographically by index, which is
/// the order used for deterministic tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCell {
    pub level: u32,
    pub index: Vec<u32>,
}

impl DyadicCell {
    /// The level-0 cell covering `[0,1]^dim`.
    pub fn root(dim: usize) -> Self {
        Self {
            level: 0,
            index: vec![0; dim],
        }
    }

    pub fn new(level: u32, index: Vec<u32>) -> Result<Self> {
        if level > MAX_DEPTH {
            return Err(Error::DepthExceeded {
                level,
                max: MAX_DEPTH,
            });
        }
        let side = 1u64 << level;
        if let Some(&bad) = index.iter().find(|&&i| u64::from(i) >= side) {
            return Err(Error::InvalidParameter(format!(
                "cell index {bad} out of range for level {level}"
            )));
        }
        Ok(Self { level, index })
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn diameter<T: Real>(&self) -> T {
        T::dyadic(self.level)
    }

    /// Lower corner along `axis`.
    pub fn lower<T: Real>(&self, axis: usize) -> T {
        T::from_count(u64::from(self.index[axis])) * T::dyadic(self.level)
    }

    pub fn upper<T: Real>(&self, axis: usize) -> T {
        T::from_count(u64::from(self.index[axis]) + 1) * T::dyadic(self.level)
    }

    /// The enclosing cell one level up, or `None` at the root.
    pub fn parent(&self) -> Option<DyadicCell> {
        (self.level > 0).then(|| DyadicCell {
            level: self.level - 1,
            index: self.index.iter().map(|i| i >> 1).collect(),
        })
    }

    /// The ancestor at `level`, which must not exceed `self.level`.
    pub fn ancestor_at(&self, level: u32) -> DyadicCell {
        debug_assert!(level <= self.level);
        let shift = self.level - level;
        DyadicCell {
            level,
            index: self.index.iter().map(|i| i >> shift).collect(),
        }
    }

    /// Whether `other` lies inside `self` (including equality).
    pub fn contains_cell(&self, other: &DyadicCell) -> bool {
        other.level >= self.level && other.ancestor_at(self.level) == *self
    }

    /// Membership under the half-open convention.
    pub fn contains<T: Real>(&self, p: &[T]) -> bool {
        p.len() == self.dim() && index_at_level(p, self.level).eq(self.index.iter().copied())
    }
}

/// The midpoint `(index + 1/2) · 2^-level` of a cell.
pub fn cell_center<T: Real>(c: &DyadicCell) -> Point<T> {
    Point(center_coords(c))
}

pub(crate) fn center_coords<T: Real>(c: &DyadicCell) -> Vec<T> {
    let w = T::dyadic(c.level);
    let half = T::lit(0.5);
    c.index
        .iter()
        .map(|&i| (T::from_count(u64::from(i)) + half) * w)
        .collect()
}

/// The `2^d` children of `c`, ordered with the first axis most significant.
pub fn cell_children(c: &DyadicCell, max_depth: u32) -> Result<Vec<DyadicCell>> {
    let level = c.level + 1;
    if level > max_depth.min(MAX_DEPTH) {
        return Err(Error::DepthExceeded {
            level,
            max: max_depth.min(MAX_DEPTH),
        });
    }
    let d = c.dim();
    Ok((0..1usize << d)
        .map(|offset| DyadicCell {
            level,
            index: c
                .index
                .iter()
                .enumerate()
                .map(|(axis, &i)| 2 * i + ((offset >> (d - 1 - axis)) & 1) as u32)
                .collect(),
        })
        .collect())
}

/// The unique level-`level` cell containing `p`.
pub fn cell_containing<T: Real>(p: &Point<T>, level: u32) -> DyadicCell {
    DyadicCell {
        level,
        index: index_at_level(p.coords(), level).collect(),
    }
}

pub(crate) fn index_at_level<T: Real>(p: &[T], level: u32) -> impl Iterator<Item = u32> + '_ {
    let side = T::from_count(1u64 << level);
    let last = (1u64 << level) - 1;
    p.iter().map(move |&x| {
        // scaling by a power of two is exact, so the floor is too
        let raw = (x * side).floor().to_u64().unwrap_or(0);
        raw.min(last) as u32
    })
}

/// Every cell of level `level` in dimension `dim`, in lexicographic order.
pub fn cells_at_level(dim: usize, level: u32) -> impl Iterator<Item = DyadicCell> {
    let side = 1u64 << level;
    let total = side.pow(dim as u32);
    (0..total).map(move |mut flat| {
        let mut index = vec![0u32; dim];
        for slot in index.iter_mut().rev() {
            *slot = (flat % side) as u32;
            flat /= side;
        }
        DyadicCell { level, index }
    })
}
