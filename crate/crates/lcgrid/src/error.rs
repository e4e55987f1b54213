//! Error type shared across the crate.

use alloc::string::String;
use alloc::vec::Vec;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while building grids or running transforms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A grid or grid function failed a structural invariant.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Total mass fell outside the admissible open interval.
    #[error("mass {mass:e} outside admissible range ({lo:e}, {hi:e})")]
    MassOutOfRange { mass: f64, lo: f64, hi: f64 },

    /// A hyperplane offset does not coincide with a grid node.
    #[error("offset {offset} on axis {axis} is not a grid node (nearest {nearest})")]
    OffsetNotOnGrid {
        axis: usize,
        offset: f64,
        nearest: f64,
    },

    /// A rearranged support would spill past the grid edge, losing mass.
    #[error("rearranged support spills off the grid (axis {axis}, center index {center})")]
    CenterTooCloseToEdge { axis: usize, center: usize },

    /// A conjugate was requested for a function with empty effective domain.
    #[error("conjugate of an everywhere-infinite input")]
    AllInfinite,

    /// Two grids that must agree (dimension, spacing, alignment) do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A plan's source or target does not match the operand grids.
    #[error("plan mismatch: {0}")]
    PlanMismatch(String),

    /// The marginal used for a lambda split carries no mass over the bracket.
    #[error("degenerate marginal on axis {axis}: no mass to split")]
    DegenerateMarginal { axis: usize },

    /// A slice height exceeded the grid window.
    #[error("slice at height {height} outside grid range on axis {axis}")]
    SliceOutOfRange { axis: usize, height: f64 },

    /// A Ball-lemma hypothesis failed at a located witness pair.
    #[error("hypothesis failed at x={x}, y={y}: lhs={lhs:e} < rhs={rhs:e}")]
    HypothesisFailed { x: f64, y: f64, lhs: f64, rhs: f64 },

    /// A function claimed unconditional is not symmetric about the center.
    #[error("not unconditional: symmetry defect {defect:e} on axis {axis}")]
    NotUnconditional { axis: usize, defect: f64 },

    /// The affine subspace misses the interior of the support.
    #[error("affine subspace does not meet the interior of supp f near {point:?}")]
    SubspaceOutsideSupport { point: Vec<f64> },

    /// Random generation kept violating construction invariants.
    #[error("corpus generation exhausted {attempts} attempts for one entry")]
    CorpusExhausted { attempts: usize },

    /// Malformed caller input (sizes, ranges, NaNs) that is not a grid issue.
    #[error("bad argument: {0}")]
    BadArgument(String),
}
