//! Centralized numeric tolerances and limits.
//!
//! Every inequality check and invariant validation in the crate pulls its
//! slack from here, so the knobs are auditable in one place. Each constant
//! documents what it guards and why the magnitude is right for `f64` grids
//! at desk scale.

/// Relative slack for the per-line log-concavity invariant:
/// `v[i]^2 >= v[i-1] * v[i+1] * (1 - EPS_LOG_CONCAVE)` at interior nodes
/// with positive neighbors. Sampled closed forms satisfy the exact
/// inequality; the slack only absorbs rounding of `exp` at evaluation time.
pub const EPS_LOG_CONCAVE: f64 = 1e-9;

/// Relative slack for discrete midpoint convexity of `phi` lines:
/// `v[i] <= (v[i-1] + v[i+1]) / 2 + EPS_CONVEX * range` where `range` is the
/// spread of finite values on the grid.
pub const EPS_CONVEX: f64 = 1e-9;

/// Absolute ceiling for symmetry defects that should vanish identically
/// (mirror-paired node values are equal as reals and compared directly).
pub const EPS_SYMMETRY: f64 = 1e-12;

/// Relative slack for inequality verdicts (Blaschke-Santalo, separation,
/// Prekopa, Ball-type lemmas): `lhs <= rhs * (1 + EPS_INEQ)` or the
/// matching `>=` form. Covers quadrature rounding on both sides, not
/// discretization error, which each checker budgets explicitly.
pub const EPS_INEQ: f64 = 1e-6;

/// Step-to-step slack for the pipeline's monotone product chain:
/// `product[i+1] >= product[i] * (1 - EPS_MONOTONE)`.
pub const EPS_MONOTONE: f64 = 1e-6;

/// Node-wise relative slack for the slice inequality check, applied on top
/// of the one-cell interpolation allowance.
pub const EPS_SLICE: f64 = 1e-6;

/// Certified-range floor for pointwise slice comparisons, relative to the
/// peak of the functions under test. Sampled values this far below the peak
/// sit in conjugate tails whose relative error is dominated by sub-cell
/// placement of effective-domain facets and does not shrink with the value,
/// while their share of any mass stays below the floor itself.
pub const SLICE_FLOOR: f64 = 1e-3;

/// Maximum boundary value relative to the global maximum for a log-concave
/// grid function: enforces that the grid window captures the decaying tail.
pub const DECAY_RATIO: f64 = 1e-6;

/// Admissible open interval for total mass; values outside indicate an
/// unusable sampling window or overflow, and construction fails.
pub const MASS_MIN: f64 = 1e-300;
/// See [`MASS_MIN`].
pub const MASS_MAX: f64 = 1e300;

/// Default cap on total node count per grid (2^24), keeping worst-case
/// desk-scale memory near a few hundred MB.
pub const DEFAULT_NODE_CAP: usize = 1 << 24;

/// Fraction of target nodes whose conjugate argmax may touch the source
/// boundary before the transform flags probable y-window truncation.
pub const BOUNDARY_ARGMAX_WARN: f64 = 1e-3;

/// Relative (to one cell) tolerance when deciding whether a hyperplane
/// offset sits on a grid node.
pub const OFFSET_SNAP: f64 = 1e-6;

/// Default relative gradient-norm stopping rule for the Santalo-point
/// optimizer: stop when `|proj grad| <= TOL_GRAD * F(z)`.
pub const TOL_GRAD: f64 = 1e-7;

/// Default evaluation cap for the Santalo-point optimizer. Plain projected
/// gradient descent converges linearly with the conditioning of the polar
/// mass; anisotropic corpus functions need a few thousand evaluations to
/// push the projected gradient down to [`TOL_GRAD`], and each evaluation is
/// a single cheap pass over the dual grid.
pub const MAX_ITERS: usize = 4000;

/// Bisection tolerance for `lambda_split`, relative to the axis extent.
pub const TOL_SPLIT: f64 = 1e-9;

/// Default pass tolerance for Santalo-point invariance under
/// symmetrization, relative to the grid extent.
pub const TOL_POINT: f64 = 1e-3;

/// Relative budget for end-to-end volume-product bounds (base product
/// against `(2 pi)^n / (4 l (1 - l))`, final product against `(2 pi)^n`).
/// Unlike [`EPS_INEQ`] this covers accumulated discretization error over a
/// whole pipeline — transform lag `O(h^2)` per step plus quadrature bias —
/// hence the coarser 2% at the default desk-scale resolutions.
pub const BOUND_BUDGET: f64 = 2e-2;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_are_positive_and_ordered() {
        assert!(EPS_SYMMETRY < EPS_LOG_CONCAVE);
        assert!(EPS_LOG_CONCAVE <= EPS_INEQ);
        assert!(EPS_CONVEX <= EPS_INEQ);
        assert!(MASS_MIN < 1.0 && 1.0 < MASS_MAX);
        assert!(DECAY_RATIO > 0.0 && DECAY_RATIO < 1.0);
        assert!(TOL_GRAD > 0.0 && TOL_GRAD < 1e-3);
        assert!(DEFAULT_NODE_CAP >= 1 << 20);
    }
}
