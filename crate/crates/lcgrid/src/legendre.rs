//! Discrete Legendre (convex-conjugate) transforms and polar functions.
//!
//! For a convex profile `phi` on a source grid and a target grid of dual
//! points, the transform computes
//!
//! ```text
//! psi(y) = max_x [ <x - xshift, y - yshift> - phi(x) ]
//! ```
//!
//! over the source nodes. The multi-dimensional maximum factorizes into one
//! pass per axis; each pass maximizes `x_k * y_k + g` along source lines
//! (with `g = -phi` in the first pass and the previous pass's output after
//! that), storing one rounded double per intermediate value.
//!
//! # Value contract
//!
//! Every stored value is `fl(x * y + g)` — the *correctly rounded* value of
//! the exact term, via fused multiply-add — at the smallest index `j`
//! maximizing the exact (infinite-precision) term. Because rounding is
//! monotone, the rounded value at the exact argmax equals the maximum of
//! the rounded values, so the output is a deterministic function of the
//! inputs: any algorithm honoring the contract produces bit-identical
//! results. The crate ships two: a brute scan over every source node
//! ([`conjugate_profile_brute`]) and a monotone-argmax walk
//! ([`conjugate_profile`]) that exploits exact line concavity to run in
//! `O(n + m)` per line, falling back to the scan on lines that are not
//! exactly concave or whose finite window is not contiguous. Comparisons
//! that are ambiguous after rounding are settled in exact arithmetic
//! (see [`crate::exact`]), which is what makes the walk's resume pointer
//! sound across target nodes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact;
use crate::func::{ConvexFnGrid, ConvexityCheck, LogConcaveFnGrid};
use crate::grid::GridSpec;
#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::tol;

/// A validated description of one conjugate transform: source and target
/// grids plus the two shift vectors in
/// `max_x <x - xshift, y - yshift> - phi(x)`.
///
/// The polar transform about a Santalo candidate `z` uses
/// `xshift = yshift = z`; the plain Legendre transform uses zero shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatePlan {
    source: GridSpec,
    target: GridSpec,
    xshift: Vec<f64>,
    yshift: Vec<f64>,
}

impl ConjugatePlan {
    pub fn new(
        source: GridSpec,
        target: GridSpec,
        xshift: Vec<f64>,
        yshift: Vec<f64>,
    ) -> Result<Self> {
        if source.dim() != target.dim() {
            return Err(Error::PlanMismatch(alloc::format!(
                "source dim {} != target dim {}",
                source.dim(),
                target.dim()
            )));
        }
        if xshift.len() != source.dim() || yshift.len() != source.dim() {
            return Err(Error::PlanMismatch(alloc::format!(
                "shift length must be {}, got {} and {}",
                source.dim(),
                xshift.len(),
                yshift.len()
            )));
        }
        if !xshift.iter().chain(yshift.iter()).all(|v| v.is_finite()) {
            return Err(Error::PlanMismatch(alloc::string::String::from(
                "shifts must be finite",
            )));
        }
        Ok(ConjugatePlan {
            source,
            target,
            xshift,
            yshift,
        })
    }

    /// The plain Legendre transform `max <x, y> - phi(x)`.
    pub fn legendre(source: GridSpec, target: GridSpec) -> Result<Self> {
        let d = source.dim();
        Self::new(source, target, alloc::vec![0.0; d], alloc::vec![0.0; d])
    }

    /// The polar transform about `z`: `max <x - z, y - z> - phi(x)`.
    pub fn polar(source: GridSpec, target: GridSpec, z: &[f64]) -> Result<Self> {
        Self::new(source, target, z.to_vec(), z.to_vec())
    }

    pub fn source(&self) -> &GridSpec {
        &self.source
    }

    pub fn target(&self) -> &GridSpec {
        &self.target
    }

    pub fn xshift(&self) -> &[f64] {
        &self.xshift
    }

    pub fn yshift(&self) -> &[f64] {
        &self.yshift
    }

    /// The reverse plan (target becomes source and vice versa, shifts
    /// swapped), used for double transforms.
    pub fn reversed(&self) -> ConjugatePlan {
        ConjugatePlan {
            source: self.target.clone(),
            target: self.source.clone(),
            xshift: self.yshift.clone(),
            yshift: self.xshift.clone(),
        }
    }
}

/// Counters from one transform. `boundary_hits` counts computed values
/// whose maximizer sat on the first or last node of the source axis — a
/// sign the true maximizer may lie outside the grid and the dual range is
/// too tight (unless the function is compactly supported inside the grid,
/// where edge maximizers are legitimate).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConjugateDiagnostics {
    /// Grid lines processed across all passes.
    pub total_lines: usize,
    /// Lines that used the brute scan (not exactly concave, gaps in the
    /// finite window, or brute forced).
    pub brute_lines: usize,
    /// Values computed across all passes (empty lines excluded).
    pub outputs: usize,
    /// Values whose exact maximizer was the first or last axis node.
    pub boundary_hits: usize,
}

impl ConjugateDiagnostics {
    pub fn boundary_fraction(&self) -> f64 {
        if self.outputs == 0 {
            0.0
        } else {
            self.boundary_hits as f64 / self.outputs as f64
        }
    }

    /// True when the boundary fraction exceeds
    /// [`tol::BOUNDARY_ARGMAX_WARN`].
    pub fn boundary_warning(&self) -> bool {
        self.boundary_fraction() > tol::BOUNDARY_ARGMAX_WARN
    }

    fn absorb(&mut self, other: ConjugateDiagnostics) {
        self.total_lines += other.total_lines;
        self.brute_lines += other.brute_lines;
        self.outputs += other.outputs;
        self.boundary_hits += other.boundary_hits;
    }
}

/// Exact comparison of `xs[a] * y + g[a]` versus `xs[b] * y + g[b]`,
/// fast-pathed through the correctly rounded values: if those differ their
/// order is the exact order (rounding is monotone); only rounded ties fall
/// through to expansion arithmetic.
#[inline]
fn exact_term_gt(xs: &[f64], g: &[f64], a: usize, b: usize, y: f64) -> bool {
    let va = xs[a].mul_add(y, g[a]);
    let vb = xs[b].mul_add(y, g[b]);
    if va != vb {
        return va > vb;
    }
    if va == f64::NEG_INFINITY {
        return false;
    }
    exact::cmp_conj_terms(xs[a], g[a], xs[b], g[b], y) == core::cmp::Ordering::Greater
}

/// Rigorous double-precision filter for the exact concavity predicate.
/// Returns `Some(true/false)` when the sign of
/// `(g1-g0)(x2-x1) - (g2-g1)(x1-x0)` is certain in doubles, `None` when it
/// must be settled exactly. Misclassification is impossible: the margin
/// dominates every rounding error of the two products and the subtraction.
#[inline]
fn concave_filter(x0: f64, x1: f64, x2: f64, g0: f64, g1: f64, g2: f64) -> Option<bool> {
    let lhs = (g1 - g0) * (x2 - x1);
    let rhs = (g2 - g1) * (x1 - x0);
    let diff = lhs - rhs;
    let margin = 16.0 * f64::EPSILON * (lhs.abs() + rhs.abs());
    if diff > margin {
        Some(true)
    } else if diff < -margin {
        Some(false)
    } else {
        None
    }
}

fn triple_concave(x0: f64, x1: f64, x2: f64, g0: f64, g1: f64, g2: f64) -> bool {
    match concave_filter(x0, x1, x2, g0, g1, g2) {
        Some(ans) => ans,
        None => exact::concave_triple(x0, x1, x2, g0, g1, g2),
    }
}

/// One line of the pass: writes `out[k] = fl(xs[j*] * ys[k] + g[j*])` with
/// `j*` the smallest exact maximizer. `g` uses `-inf` for nodes outside
/// the effective domain; an entirely infinite line yields `-inf` outputs.
fn conj_line(
    xs: &[f64],
    g: &[f64],
    ys: &[f64],
    out: &mut [f64],
    force_brute: bool,
    xs_strictly_increasing: bool,
    diag: &mut ConjugateDiagnostics,
) {
    diag.total_lines += 1;
    let n = g.len();
    let first = match g.iter().position(|v| v.is_finite()) {
        Some(p) => p,
        None => {
            out.fill(f64::NEG_INFINITY);
            return;
        }
    };
    let last = g.iter().rposition(|v| v.is_finite()).unwrap();
    let contiguous = g[first..=last].iter().all(|v| v.is_finite());

    let fast = !force_brute
        && xs_strictly_increasing
        && contiguous
        && (first..last.saturating_sub(1)).all(|j| {
            triple_concave(xs[j], xs[j + 1], xs[j + 2], g[j], g[j + 1], g[j + 2])
        });

    if fast {
        let mut p = first;
        for (k, &y) in ys.iter().enumerate() {
            while p < last && exact_term_gt(xs, g, p + 1, p, y) {
                p += 1;
            }
            out[k] = xs[p].mul_add(y, g[p]);
            diag.outputs += 1;
            if p == 0 || p == n - 1 {
                diag.boundary_hits += 1;
            }
        }
    } else {
        diag.brute_lines += 1;
        for (k, &y) in ys.iter().enumerate() {
            let mut best = first;
            for j in first + 1..=last {
                if g[j].is_finite() && exact_term_gt(xs, g, j, best, y) {
                    best = j;
                }
            }
            out[k] = xs[best].mul_add(y, g[best]);
            diag.outputs += 1;
            if best == 0 || best == n - 1 {
                diag.boundary_hits += 1;
            }
        }
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

/// One factorized pass: replaces axis `axis` of `data` (current shape
/// `dims`) by the target axis, maximizing `x * y + g` along every line.
fn conjugate_pass(
    dims: &mut [usize],
    data: Vec<f64>,
    axis: usize,
    xs: &[f64],
    ys: &[f64],
    force_brute: bool,
    diag: &mut ConjugateDiagnostics,
) -> Vec<f64> {
    let n = dims[axis];
    let m = ys.len();
    debug_assert_eq!(xs.len(), n);
    let stride: usize = dims[axis + 1..].iter().product();
    let blocks: usize = dims[..axis].iter().product();
    let in_block = stride * n;
    let out_block = stride * m;
    let mut out = alloc::vec![0.0f64; blocks * out_block];
    let mut line_in = alloc::vec![0.0f64; n];
    let mut line_out = alloc::vec![0.0f64; m];
    let xs_inc = strictly_increasing(xs);
    for outer in 0..blocks {
        for inner in 0..stride {
            let base_in = outer * in_block + inner;
            let base_out = outer * out_block + inner;
            for (t, slot) in line_in.iter_mut().enumerate() {
                *slot = data[base_in + t * stride];
            }
            conj_line(
                xs,
                &line_in,
                ys,
                &mut line_out,
                force_brute,
                xs_inc,
                diag,
            );
            for (s, &v) in line_out.iter().enumerate() {
                out[base_out + s * stride] = v;
            }
        }
    }
    dims[axis] = m;
    out
}

fn run_conjugate(
    phi: &ConvexFnGrid,
    plan: &ConjugatePlan,
    force_brute: bool,
) -> Result<(ConvexFnGrid, ConjugateDiagnostics)> {
    if phi.spec() != plan.source() {
        return Err(Error::PlanMismatch(alloc::string::String::from(
            "profile grid differs from the plan's source grid",
        )));
    }
    let d = plan.source.dim();
    // Max-plus orientation: maximize <x~, y~> + g with g = -phi. Negation
    // is written `0.0 - v` so phi = 0 maps to +0.0, not -0.0 — keeping a
    // zero conjugate value bitwise +0.0 (fma(-x, 0, -0.0) would be -0.0).
    let mut data: Vec<f64> = phi
        .values()
        .iter()
        .map(|&v| if v.is_finite() { 0.0 - v } else { f64::NEG_INFINITY })
        .collect();
    let mut dims: Vec<usize> = (0..d).map(|k| plan.source.axis(k).count).collect();
    let mut diag = ConjugateDiagnostics::default();
    for axis in 0..d {
        let xs: Vec<f64> = plan
            .source
            .axis(axis)
            .nodes()
            .iter()
            .map(|x| x - plan.xshift[axis])
            .collect();
        let ys: Vec<f64> = plan
            .target
            .axis(axis)
            .nodes()
            .iter()
            .map(|y| y - plan.yshift[axis])
            .collect();
        data = conjugate_pass(&mut dims, data, axis, &xs, &ys, force_brute, &mut diag);
    }
    // A proper profile leaves every final value finite.
    debug_assert!(data.iter().all(|v| v.is_finite()));
    let psi = ConvexFnGrid::with_check(plan.target.clone(), data, ConvexityCheck::Strict)?;
    Ok((psi, diag))
}

/// The conjugate `psi(y) = max_x <x - xshift, y - yshift> - phi(x)` using
/// the fast monotone-argmax walk (with automatic per-line fallback).
pub fn conjugate_profile(
    phi: &ConvexFnGrid,
    plan: &ConjugatePlan,
) -> Result<(ConvexFnGrid, ConjugateDiagnostics)> {
    run_conjugate(phi, plan, false)
}

/// Reference path: the same contract computed by scanning every source
/// node for every output. Bit-identical to [`conjugate_profile`] by
/// construction; exists so tests can prove that claim.
pub fn conjugate_profile_brute(
    phi: &ConvexFnGrid,
    plan: &ConjugatePlan,
) -> Result<(ConvexFnGrid, ConjugateDiagnostics)> {
    run_conjugate(phi, plan, true)
}

/// Plain Legendre transform onto `target`.
pub fn legendre_profile(
    phi: &ConvexFnGrid,
    target: GridSpec,
) -> Result<(ConvexFnGrid, ConjugateDiagnostics)> {
    let plan = ConjugatePlan::legendre(phi.spec().clone(), target)?;
    conjugate_profile(phi, &plan)
}

/// The polar density `f^z = exp(-max_x [<x - z, y - z> - phi(x)])` of a
/// log-concave `f = exp(-phi)`, sampled on `target`.
pub fn polar_density(
    f: &LogConcaveFnGrid,
    target: GridSpec,
    z: &[f64],
) -> Result<(LogConcaveFnGrid, ConjugateDiagnostics)> {
    let plan = ConjugatePlan::polar(f.spec().clone(), target, z)?;
    let (psi, diag) = conjugate_profile(&f.neg_log(), &plan)?;
    Ok((psi.exp_neg()?, diag))
}

/// The double polar `(f^z)^z` back on the source grid, staying in profile
/// space throughout (no `exp`/`log` round trip between the two
/// transforms).
pub fn double_polar_density(
    f: &LogConcaveFnGrid,
    dual: GridSpec,
    z: &[f64],
) -> Result<(LogConcaveFnGrid, ConjugateDiagnostics)> {
    let plan = ConjugatePlan::polar(f.spec().clone(), dual, z)?;
    let (psi, mut diag) = conjugate_profile(&f.neg_log(), &plan)?;
    let (chi, diag2) = conjugate_profile(&psi, &plan.reversed())?;
    diag.absorb(diag2);
    Ok((chi.exp_neg()?, diag))
}

/// Range of discrete slopes `(phi(x+h) - phi(x)) / h` along `axis`, over
/// all finite node pairs. A dual axis covering this interval keeps
/// maximizers off the grid boundary. `None` when no line has two adjacent
/// finite values.
pub fn slope_range(phi: &ConvexFnGrid, axis: usize) -> Option<(f64, f64)> {
    let spec = phi.spec();
    let stride = spec.stride(axis);
    let len = spec.axis(axis).count;
    let h = spec.axis(axis).spacing();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for base in spec.line_bases(axis) {
        for t in 0..len - 1 {
            let a = phi.value(base + t * stride);
            let b = phi.value(base + (t + 1) * stride);
            if a.is_finite() && b.is_finite() {
                let s = (b - a) / h;
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
    }
    if lo <= hi {
        Some((lo, hi))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisSpec;
    use crate::sample;
    use alloc::vec;

    fn grid_1d(half: f64, count: usize) -> GridSpec {
        GridSpec::new(vec![AxisSpec::new(-half, half, count).unwrap()]).unwrap()
    }

    #[test]
    fn gaussian_conjugate_matches_closed_form() {
        // phi = x^2/2 is self-conjugate; the node-restricted maximum over a
        // grid with spacing h lags the true y^2/2 by at most h^2/8. The
        // dual grid deliberately uses a different spacing so duals fall
        // between source nodes and the lag is exercised.
        let spec = grid_1d(8.0, 1025);
        let phi = ConvexFnGrid::from_fn(spec.clone(), |x| 0.5 * x[0] * x[0]).unwrap();
        let dual = grid_1d(8.0, 769);
        let (psi, diag) = legendre_profile(&phi, dual.clone()).unwrap();
        let h: f64 = spec.axis(0).spacing();
        for (idx, &v) in psi.values().iter().enumerate() {
            let y = dual.node_coords(idx)[0];
            let err = 0.5 * y * y - v;
            assert!(err >= -1e-12, "conjugate exceeded closed form by {err:e}");
            assert!(err <= h * h / 8.0 + 1e-12, "lag {err:e} at y={y}");
        }
        // The maximizer sits on the grid edge only for the two extreme
        // duals y = -8 and y = 8.
        assert_eq!(diag.boundary_hits, 2);
    }

    #[test]
    fn box_profile_conjugate_is_exact_support_function() {
        // phi = 0 on [-1, 1], +inf outside: psi(y) = max |x|<=1 of x*y = |y|
        // exactly, because +-1 are grid nodes and fl(1 * y + 0) = y.
        let spec = grid_1d(2.0, 17);
        let phi = ConvexFnGrid::from_fn(spec.clone(), |x| {
            if x[0].abs() <= 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let dual = grid_1d(3.0, 25);
        let (psi, _) = legendre_profile(&phi, dual.clone()).unwrap();
        for (idx, &v) in psi.values().iter().enumerate() {
            let y = dual.node_coords(idx)[0];
            assert_eq!(v.to_bits(), y.abs().to_bits());
        }
    }

    #[test]
    fn fast_walk_matches_brute_bit_for_bit_2d() {
        let spec = GridSpec::cube(2, 4.0, 33).unwrap();
        let f = sample::gaussian_correlated(spec.clone(), &[1.0, 0.4, 0.4, 1.3]).unwrap();
        let dual = GridSpec::cube(2, 5.0, 41).unwrap();
        let plan = ConjugatePlan::legendre(spec, dual).unwrap();
        let phi = f.neg_log();
        let (fast, dfast) = conjugate_profile(&phi, &plan).unwrap();
        let (brute, dbrute) = conjugate_profile_brute(&phi, &plan).unwrap();
        for (a, b) in fast.values().iter().zip(brute.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(dfast.boundary_hits, dbrute.boundary_hits);
        assert_eq!(dfast.outputs, dbrute.outputs);
        assert_eq!(dfast.brute_lines, 0);
        assert_eq!(dbrute.brute_lines, dbrute.total_lines);
    }

    #[test]
    fn empty_columns_pass_through_2d_box() {
        // A box occupying the middle third of the grid: the first pass
        // leaves entirely infinite columns, which must flow through as
        // empty lines rather than poison the result.
        let spec = GridSpec::cube(2, 3.0, 25).unwrap();
        let f = sample::box_indicator(spec.clone(), &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let dual = GridSpec::cube(2, 2.0, 17).unwrap();
        let (polar, diag) = polar_density(&f, dual.clone(), &[0.0, 0.0]).unwrap();
        // The polar of the indicator of [-1,1]^2 about 0 is
        // exp(-(|y_0| + |y_1|)).
        for (idx, &v) in polar.values().iter().enumerate() {
            let y = dual.node_coords(idx);
            let want = (-(y[0].abs() + y[1].abs())).exp();
            assert!((v - want).abs() <= 1e-15, "at {y:?}: {v} vs {want}");
        }
        assert_eq!(diag.brute_lines, 0);
    }

    #[test]
    fn clipped_dual_range_raises_boundary_warning() {
        // Slopes of x^2/2 on [-4,4] span [-4,4]; asking for duals out to 8
        // clips half of them to the grid edge.
        let spec = grid_1d(4.0, 129);
        let phi = ConvexFnGrid::from_fn(spec.clone(), |x| 0.5 * x[0] * x[0]).unwrap();
        let dual = grid_1d(8.0, 129);
        let (_, diag) = legendre_profile(&phi, dual).unwrap();
        assert!(diag.boundary_fraction() > 0.4);
        assert!(diag.boundary_warning());
    }

    #[test]
    fn polar_about_offcenter_point_matches_closed_form() {
        // For phi = x^2/2 and center z, the continuum polar profile is
        // (y-z)^2/2 - z(y-z); on the grid it lags by at most h^2/8.
        let spec = grid_1d(8.0, 2049);
        let f = sample::standard_gaussian(spec.clone()).unwrap();
        let z = [0.5];
        let dual = grid_1d(6.0, 1537);
        let (fz, _) = polar_density(&f, dual.clone(), &z).unwrap();
        let h: f64 = spec.axis(0).spacing();
        for (idx, &v) in fz.values().iter().enumerate() {
            let y = dual.node_coords(idx)[0];
            let t = y - z[0];
            let want = 0.5 * t * t - z[0] * t;
            let got = -v.ln();
            // The grid maximum lags the continuum supremum:
            // want - h^2/8 <= got <= want (+ rounding slack).
            assert!(
                got - want <= 1e-10 && got - want >= -(h * h / 8.0) - 1e-10,
                "y={y}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn double_conjugate_recovers_convex_profile() {
        // phi = x^2/2 is convex and closed, so L(L phi) = phi up to the
        // O(h^2) grid lag in each transform.
        let spec = grid_1d(8.0, 1025);
        let phi = ConvexFnGrid::from_fn(spec.clone(), |x| 0.5 * x[0] * x[0]).unwrap();
        let plan = ConjugatePlan::legendre(spec.clone(), spec.clone()).unwrap();
        let (psi, _) = conjugate_profile(&phi, &plan).unwrap();
        let (chi, _) = conjugate_profile(&psi, &plan.reversed()).unwrap();
        let h: f64 = spec.axis(0).spacing();
        for (a, b) in chi.values().iter().zip(phi.values()) {
            // L L phi <= phi always; the lag is at most the one-transform
            // bound h^2/8 (the second transform only tightens).
            let lag = b - a;
            assert!((-1e-12..=h * h / 8.0 + 1e-12).contains(&lag), "lag {lag:e}");
        }
    }

    #[test]
    fn slope_range_of_quadratic() {
        let spec = grid_1d(8.0, 1025);
        let phi = ConvexFnGrid::from_fn(spec, |x| 0.5 * x[0] * x[0]).unwrap();
        let (lo, hi) = slope_range(&phi, 0).unwrap();
        // Discrete slopes of x^2/2 live at cell midpoints: +-(8 - h/2).
        assert!((lo + 8.0).abs() < 0.01 && (hi - 8.0).abs() < 0.01);
    }

    #[test]
    fn plan_validation() {
        let a = grid_1d(1.0, 5);
        let b = GridSpec::cube(2, 1.0, 5).unwrap();
        assert!(ConjugatePlan::legendre(a.clone(), b).is_err());
        assert!(ConjugatePlan::new(a.clone(), a.clone(), vec![0.0], vec![f64::NAN]).is_err());
        assert!(ConjugatePlan::new(a.clone(), a, vec![0.0, 1.0], vec![0.0]).is_err());
    }
}
