//! Grid geometry: axes, tensor grids, extended values, hyperplanes and
//! axis-aligned affine subspaces.
//!
//! Grids are uniform tensor products in dimension 1 to 3. Node values are
//! stored axis-major (axis 0 slowest, last axis contiguous); the node of
//! multi-index `(i_0, .., i_{d-1})` on axis `k` sits at
//! `lo_k + i_k * spacing_k`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::tol;

/// One uniform axis: `count` nodes from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::BadArgument(format!(
                "axis bounds must be finite, got [{lo}, {hi}]"
            )));
        }
        if !(lo < hi) {
            return Err(Error::BadArgument(format!(
                "axis bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        if count < 3 {
            return Err(Error::BadArgument(format!(
                "axis needs at least 3 nodes, got {count}"
            )));
        }
        Ok(AxisSpec { lo, hi, count })
    }

    /// Node spacing `h = (hi - lo) / (count - 1)`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    /// Coordinate of node `i` (callers keep `i < count`).
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    /// All node coordinates in order.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }

    #[inline]
    pub fn extent(&self) -> f64 {
        self.hi - self.lo
    }

    /// Index of the node nearest to `x`, clamped to the axis.
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = (x - self.lo) / self.spacing();
        if t <= 0.0 {
            return 0;
        }
        let i = t.round() as usize;
        i.min(self.count - 1)
    }
}

/// A uniform tensor-product grid in dimension 1 to 3.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<AxisSpec>,
}

impl GridSpec {
    /// Builds a grid with the default node cap of [`tol::DEFAULT_NODE_CAP`].
    pub fn new(axes: Vec<AxisSpec>) -> Result<Self> {
        Self::with_cap(axes, tol::DEFAULT_NODE_CAP)
    }

    /// Builds a grid with an explicit cap on the total node count.
    pub fn with_cap(axes: Vec<AxisSpec>, cap: usize) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::BadArgument(format!(
                "grid dimension must be 1..=3, got {}",
                axes.len()
            )));
        }
        let mut total: usize = 1;
        for ax in &axes {
            total = total.checked_mul(ax.count).ok_or_else(|| {
                Error::BadArgument(String::from("grid node count overflows usize"))
            })?;
        }
        if total > cap {
            return Err(Error::BadArgument(format!(
                "grid has {total} nodes, cap is {cap}"
            )));
        }
        Ok(GridSpec { axes })
    }

    /// Convenience: the same symmetric axis `[-half, half]` in every
    /// dimension.
    pub fn cube(dim: usize, half: f64, count: usize) -> Result<Self> {
        let ax = AxisSpec::new(-half, half, count)?;
        Self::new(alloc::vec![ax; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    #[inline]
    pub fn axis(&self, k: usize) -> &AxisSpec {
        &self.axes[k]
    }

    #[inline]
    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn total_nodes(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Product of axis spacings: the volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    /// Largest axis extent, the scale used by point tolerances.
    pub fn max_extent(&self) -> f64 {
        self.axes.iter().map(|a| a.extent()).fold(0.0, f64::max)
    }

    /// Stride of `axis` in the axis-major linear layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.count).product()
    }

    /// Linear index of a multi-index.
    pub fn linear_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        let mut idx = 0usize;
        for (k, &i) in multi.iter().enumerate() {
            debug_assert!(i < self.axes[k].count);
            idx = idx * self.axes[k].count + i;
        }
        idx
    }

    /// Multi-index of a linear index.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = alloc::vec![0usize; self.dim()];
        for k in (0..self.dim()).rev() {
            out[k] = idx % self.axes[k].count;
            idx /= self.axes[k].count;
        }
        out
    }

    /// Coordinates of the node at a linear index.
    pub fn node_coords(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.axes[k].node(i))
            .collect()
    }

    /// Enumerates the base linear index of every grid line along `axis`.
    /// A line visits `axis.count` nodes starting at the base with
    /// `stride(axis)` between consecutive nodes.
    pub fn line_bases(&self, axis: usize) -> impl Iterator<Item = usize> + '_ {
        let stride = self.stride(axis);
        let block = stride * self.axes[axis].count;
        let blocks = self.total_nodes() / block;
        (0..blocks).flat_map(move |outer| (0..stride).map(move |inner| outer * block + inner))
    }

    /// True if some node of `axis` lies within snap tolerance of `x`;
    /// returns that node index.
    pub fn node_at(&self, axis: usize, x: f64) -> Option<usize> {
        let ax = &self.axes[axis];
        let i = ax.nearest_index(x);
        let d = x - ax.node(i);
        if d.abs() <= tol::OFFSET_SNAP * ax.spacing() {
            Some(i)
        } else {
            None
        }
    }

    /// True when every node of this grid is a boundary-or-interior point of
    /// the same lattice as `other` (same dim, same per-axis spacing).
    pub fn same_spacing(&self, other: &GridSpec) -> bool {
        self.dim() == other.dim()
            && self
                .axes
                .iter()
                .zip(other.axes.iter())
                .all(|(a, b)| relative_close(a.spacing(), b.spacing(), 1e-12))
    }
}

fn relative_close(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() <= eps * a.abs().max(b.abs())
}

/// An extended real: a finite double or plus infinity. Used for convex
/// profiles `phi = -log f`, where `phi = +inf` marks `f = 0`. The tag is
/// explicit so arithmetic can never produce NaN from sentinel abuse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedValue {
    Finite(f64),
    PlusInfinity,
}

impl ExtendedValue {
    /// Classifies a raw double: `+inf` becomes the tag, NaN and `-inf` are
    /// rejected.
    pub fn from_raw(x: f64) -> Result<Self> {
        if x.is_nan() {
            Err(Error::BadArgument(String::from(
                "NaN is not an extended value",
            )))
        } else if x == f64::INFINITY {
            Ok(ExtendedValue::PlusInfinity)
        } else if x == f64::NEG_INFINITY {
            Err(Error::BadArgument(String::from(
                "-inf is not an extended value",
            )))
        } else {
            Ok(ExtendedValue::Finite(x))
        }
    }

    /// Raw double representation (`+inf` for the infinite tag).
    #[inline]
    pub fn to_raw(self) -> f64 {
        match self {
            ExtendedValue::Finite(x) => x,
            ExtendedValue::PlusInfinity => f64::INFINITY,
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedValue::Finite(_))
    }

    /// Addition with absorbing infinity.
    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => ExtendedValue::Finite(a + b),
            _ => ExtendedValue::PlusInfinity,
        }
    }

    /// Maximum; infinity wins.
    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => {
                ExtendedValue::Finite(a.max(b))
            }
            _ => ExtendedValue::PlusInfinity,
        }
    }
}

impl PartialOrd for ExtendedValue {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        match (self, other) {
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => a.partial_cmp(b),
            (ExtendedValue::Finite(_), ExtendedValue::PlusInfinity) => {
                Some(core::cmp::Ordering::Less)
            }
            (ExtendedValue::PlusInfinity, ExtendedValue::Finite(_)) => {
                Some(core::cmp::Ordering::Greater)
            }
            (ExtendedValue::PlusInfinity, ExtendedValue::PlusInfinity) => {
                Some(core::cmp::Ordering::Equal)
            }
        }
    }
}

/// The hyperplane `{ x : x[axis] = offset }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperplane {
    pub axis: usize,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(axis: usize, offset: f64) -> Self {
        Hyperplane { axis, offset }
    }

    /// The node index the offset sits on, or `OffsetNotOnGrid`. Operations
    /// that permute values along lines require node alignment; callers snap
    /// (e.g. via `santalo::lambda_split`) before symmetrizing.
    pub fn node_index(&self, spec: &GridSpec) -> Result<usize> {
        if self.axis >= spec.dim() {
            return Err(Error::BadArgument(format!(
                "hyperplane axis {} out of range for dim {}",
                self.axis,
                spec.dim()
            )));
        }
        spec.node_at(self.axis, self.offset)
            .ok_or_else(|| Error::OffsetNotOnGrid {
                axis: self.axis,
                offset: self.offset,
                nearest: spec
                    .axis(self.axis)
                    .node(spec.axis(self.axis).nearest_index(self.offset)),
            })
    }
}

/// An axis-aligned affine subspace: a set of fixed coordinates; the rest
/// are free. `fixed` is kept sorted by axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    fixed: Vec<(usize, f64)>,
}

impl AffineSubspace {
    /// The whole space (nothing fixed).
    pub fn full() -> Self {
        AffineSubspace { fixed: Vec::new() }
    }

    pub fn new(mut fixed: Vec<(usize, f64)>) -> Result<Self> {
        fixed.sort_by_key(|&(axis, _)| axis);
        for pair in fixed.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::BadArgument(format!(
                    "axis {} fixed twice in affine subspace",
                    pair[0].0
                )));
            }
        }
        for &(_, v) in &fixed {
            if !v.is_finite() {
                return Err(Error::BadArgument(String::from(
                    "affine subspace offsets must be finite",
                )));
            }
        }
        Ok(AffineSubspace { fixed })
    }

    /// Intersects with one more fixed hyperplane.
    pub fn and_fixed(&self, axis: usize, value: f64) -> Result<Self> {
        let mut fixed = self.fixed.clone();
        fixed.push((axis, value));
        Self::new(fixed)
    }

    pub fn fixed(&self) -> &[(usize, f64)] {
        &self.fixed
    }

    pub fn is_fixed(&self, axis: usize) -> bool {
        self.fixed.iter().any(|&(a, _)| a == axis)
    }

    /// Replaces the fixed coordinates of `point` with their pinned values.
    pub fn project(&self, point: &mut [f64]) {
        for &(axis, v) in &self.fixed {
            point[axis] = v;
        }
    }

    /// Number of free axes for a grid of dimension `dim`.
    pub fn free_dim(&self, dim: usize) -> usize {
        dim - self.fixed.len()
    }
}
