//! Functional Steiner symmetrization and the Asplund calculus.
//!
//! Symmetrization about a node-aligned hyperplane permutes the values of
//! every grid line crossing the plane into symmetric-decreasing order
//! around the center node. Because it is a pure permutation, per-line value
//! multisets — and with them the exact quadrature of [`crate::func`] — are
//! preserved bit for bit.
//!
//! The module also carries the Asplund (sup-convolution) product, the
//! lambda-homothety `(lambda . f)(x) = f(x / lambda)^lambda`, and a
//! Prekopa-type inequality check tying the two together.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::func::{ConvexityCheck, LogConcaveFnGrid};
use crate::grid::{AxisSpec, GridSpec, Hyperplane};
#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::tol;

/// Slot order for a symmetric-decreasing rearrangement of a line of length
/// `len` about `center`: the center first, then outward by distance,
/// right before left. `paired` marks slots whose mirror at the same
/// distance is on the grid; unpaired slots may only receive zeros if the
/// rearrangement is to stay symmetric in the off-grid-mirrors-are-zero
/// convention.
fn slot_order(len: usize, center: usize) -> Vec<(usize, bool)> {
    let mut slots = Vec::with_capacity(len);
    slots.push((center, true));
    for d in 1..len {
        let right = center + d;
        let left = center as isize - d as isize;
        let right_ok = right < len;
        let left_ok = left >= 0;
        if right_ok {
            slots.push((right, left_ok));
        }
        if left_ok {
            slots.push((left as usize, right_ok));
        }
        if !right_ok && !left_ok {
            break;
        }
    }
    debug_assert_eq!(slots.len(), len);
    slots
}

/// Symmetric-decreasing rearrangement of one line of nonnegative values
/// about the node `center`: the largest value moves to the center, the
/// rest alternate right-left outward. Fails with `CenterTooCloseToEdge`
/// when a positive value would land on a slot with no mirror (the line
/// does not fit symmetrically around the center).
pub fn rearrange_line(values: &[f64], center: usize, axis: usize) -> Result<Vec<f64>> {
    if center >= values.len() {
        return Err(Error::BadArgument(alloc::format!(
            "center {center} out of range for line of {}",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut out = alloc::vec![0.0f64; values.len()];
    for (&v, &(pos, paired)) in sorted.iter().zip(slot_order(values.len(), center).iter()) {
        if !paired && v > 0.0 {
            return Err(Error::CenterTooCloseToEdge { axis, center });
        }
        out[pos] = v;
    }
    Ok(out)
}

/// Steiner symmetrization of `f` about a node-aligned hyperplane: every
/// grid line along `plane.axis` is rearranged symmetric-decreasing about
/// the plane. Per-line value multisets are preserved exactly, so the mass
/// (and every per-line sum along that axis) is bit-identical to the input.
///
/// The result is built with [`ConvexityCheck::OneCellAllowance`]: a
/// permutation of finitely many sampled values is log-concave only up to
/// half its largest adjacent log gap per line.
pub fn steiner_symmetrize(f: &LogConcaveFnGrid, plane: &Hyperplane) -> Result<LogConcaveFnGrid> {
    let spec = f.spec().clone();
    let center = plane.node_index(&spec)?;
    let axis = plane.axis;
    let stride = spec.stride(axis);
    let len = spec.axis(axis).count;
    let mut out = f.values().to_vec();
    let mut line = alloc::vec![0.0f64; len];
    for base in spec.line_bases(axis) {
        for (t, slot) in line.iter_mut().enumerate() {
            *slot = f.value(base + t * stride);
        }
        let re = rearrange_line(&line, center, axis)?;
        for (t, &v) in re.iter().enumerate() {
            out[base + t * stride] = v;
        }
    }
    LogConcaveFnGrid::with_check(spec, out, ConvexityCheck::OneCellAllowance)
}

fn add_axes(a: &AxisSpec, b: &AxisSpec) -> Result<AxisSpec> {
    AxisSpec::new(a.lo + b.lo, a.hi + b.hi, a.count + b.count - 1)
}

/// The Asplund (sup-convolution) product
/// `(f * g)(x) = sup_(u + v = x) f(u) g(v)`, computed by brute force over
/// all node pairs with `u + v` matched by index. Requires equal per-axis
/// spacing; the output grid's bounds add and its node counts add minus
/// one, so out-node `i + j` is source-node `i` plus source-node `j`.
pub fn asplund_product(
    f: &LogConcaveFnGrid,
    g: &LogConcaveFnGrid,
) -> Result<LogConcaveFnGrid> {
    let out_spec = asplund_out_spec(f.spec(), g.spec())?;
    let d = f.spec().dim();
    let mut out = alloc::vec![0.0f64; out_spec.total_nodes()];
    let mut mi = alloc::vec![0usize; d];
    let mut mj = alloc::vec![0usize; d];
    let mut ms = alloc::vec![0usize; d];
    for (i, &fv) in f.values().iter().enumerate() {
        if fv == 0.0 {
            continue;
        }
        decode(f.spec(), i, &mut mi);
        for (j, &gv) in g.values().iter().enumerate() {
            if gv == 0.0 {
                continue;
            }
            decode(g.spec(), j, &mut mj);
            for k in 0..d {
                ms[k] = mi[k] + mj[k];
            }
            let slot = &mut out[out_spec.linear_index(&ms)];
            let p = fv * gv;
            if p > *slot {
                *slot = p;
            }
        }
    }
    LogConcaveFnGrid::with_check(out_spec, out, ConvexityCheck::OneCellAllowance)
}

/// Reference path for [`asplund_product`]: the same maximum carried out as
/// a min-plus convolution of the profiles `-log f`, `-log g`, exponentiated
/// at the end. Agrees with the f-space product to roundoff (relative
/// ~1e-13 for profiles up to a few hundred); exists so tests can compare
/// two genuinely different routes.
pub fn asplund_product_via_profiles(
    f: &LogConcaveFnGrid,
    g: &LogConcaveFnGrid,
) -> Result<LogConcaveFnGrid> {
    let out_spec = asplund_out_spec(f.spec(), g.spec())?;
    let d = f.spec().dim();
    let pf = f.neg_log();
    let pg = g.neg_log();
    let mut out = alloc::vec![f64::INFINITY; out_spec.total_nodes()];
    let mut mi = alloc::vec![0usize; d];
    let mut mj = alloc::vec![0usize; d];
    let mut ms = alloc::vec![0usize; d];
    for (i, &a) in pf.values().iter().enumerate() {
        if !a.is_finite() {
            continue;
        }
        decode(f.spec(), i, &mut mi);
        for (j, &b) in pg.values().iter().enumerate() {
            if !b.is_finite() {
                continue;
            }
            decode(g.spec(), j, &mut mj);
            for k in 0..d {
                ms[k] = mi[k] + mj[k];
            }
            let slot = &mut out[out_spec.linear_index(&ms)];
            let s = a + b;
            if s < *slot {
                *slot = s;
            }
        }
    }
    let vals = out
        .iter()
        .map(|&v| if v.is_finite() { (-v).exp() } else { 0.0 })
        .collect();
    LogConcaveFnGrid::with_check(out_spec, vals, ConvexityCheck::OneCellAllowance)
}

fn asplund_out_spec(a: &GridSpec, b: &GridSpec) -> Result<GridSpec> {
    if a.dim() != b.dim() {
        return Err(Error::GridMismatch(alloc::format!(
            "dims {} and {} differ",
            a.dim(),
            b.dim()
        )));
    }
    if !a.same_spacing(b) {
        return Err(Error::GridMismatch(alloc::string::String::from(
            "Asplund factors need equal per-axis spacing",
        )));
    }
    let axes = a
        .axes()
        .iter()
        .zip(b.axes())
        .map(|(x, y)| add_axes(x, y))
        .collect::<Result<Vec<_>>>()?;
    GridSpec::new(axes)
}

fn decode(spec: &GridSpec, mut idx: usize, out: &mut [usize]) {
    for k in (0..spec.dim()).rev() {
        let c = spec.axis(k).count;
        out[k] = idx % c;
        idx /= c;
    }
}

/// The lambda-homothety `(lambda . f)(x) = f(x / lambda)^lambda` for
/// `lambda > 0`, sampled on the scaled grid starting at `lambda * lo` with
/// *exactly* the input spacing, so homotheties of a common grid can always
/// enter [`asplund_product`] together. The step count rounds down (never
/// extrapolating past `lambda * hi`), clipping at most one trailing cell.
/// Values between source nodes interpolate linearly in the profile
/// `-log f` — geometrically in `f` — which keeps the interpolant exactly
/// convex piecewise-linear.
pub fn homothety(f: &LogConcaveFnGrid, lambda: f64) -> Result<LogConcaveFnGrid> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::BadArgument(alloc::format!(
            "homothety factor must be positive and finite, got {lambda}"
        )));
    }
    let spec = f.spec();
    let d = spec.dim();
    let mut axes = Vec::with_capacity(d);
    for k in 0..d {
        let ax = spec.axis(k);
        let steps = (lambda * (ax.count - 1) as f64 + 1e-9).floor().max(2.0) as usize;
        let lo = lambda * ax.lo;
        axes.push(AxisSpec::new(lo, lo + steps as f64 * ax.spacing(), steps + 1)?);
    }
    let out_spec = GridSpec::new(axes)?;
    let phi = f.neg_log();
    let mut out = alloc::vec![0.0f64; out_spec.total_nodes()];
    let mut multi = alloc::vec![0usize; d];
    // Per-axis interpolation state: node position and fraction.
    for (idx, slot) in out.iter_mut().enumerate() {
        decode(&out_spec, idx, &mut multi);
        // phi_out(y) = lambda * phi(y / lambda), with phi interpolated
        // axis-by-axis (multilinear in profile space).
        let mut value = 0.0f64;
        let mut weight_stack: Vec<(usize, usize, f64)> = Vec::with_capacity(d);
        for k in 0..d {
            let ax = spec.axis(k);
            let y = out_spec.axis(k).node(multi[k]);
            let t = ((y / lambda) - ax.lo) / ax.spacing();
            let t = t.clamp(0.0, (ax.count - 1) as f64);
            let i0 = (t.floor() as usize).min(ax.count - 2);
            let frac = t - i0 as f64;
            weight_stack.push((i0, i0 + 1, frac));
        }
        // Multilinear interpolation over the 2^d corner nodes.
        let corners = 1usize << d;
        let mut acc = 0.0f64;
        let mut any_inf = false;
        let mut inf_weight = 0.0f64;
        for c in 0..corners {
            let mut w = 1.0f64;
            let mut mk = alloc::vec![0usize; d];
            for k in 0..d {
                let (i0, i1, frac) = weight_stack[k];
                if (c >> k) & 1 == 1 {
                    w *= frac;
                    mk[k] = i1;
                } else {
                    w *= 1.0 - frac;
                    mk[k] = i0;
                }
            }
            if w == 0.0 {
                continue;
            }
            let pv = phi.value(spec.linear_index(&mk));
            if pv.is_finite() {
                acc += w * pv;
            } else {
                any_inf = true;
                inf_weight += w;
            }
        }
        if any_inf && inf_weight > 0.0 {
            value = f64::INFINITY;
        } else {
            value += acc;
        }
        *slot = if value.is_finite() {
            (-lambda * value).exp()
        } else {
            0.0
        };
    }
    LogConcaveFnGrid::with_check(out_spec, out, ConvexityCheck::OneCellAllowance)
}

/// Result of one Prekopa-type inequality check: the Asplund product of the
/// `(1 - lambda)`- and `lambda`-homotheties of two densities must carry at
/// least the geometric mean of their masses,
/// `integral((1-lambda).f * lambda.g) >= (integral f)^(1-lambda) * (integral g)^lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrekopaReport {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl PrekopaReport {
    /// Inequality satisfied up to the relative slack [`tol::EPS_INEQ`].
    pub fn ok(&self) -> bool {
        self.lhs >= self.rhs * (1.0 - tol::EPS_INEQ)
    }
}

/// Runs the Prekopa-type check for `lambda` strictly between 0 and 1.
pub fn prekopa_check(
    f: &LogConcaveFnGrid,
    g: &LogConcaveFnGrid,
    lambda: f64,
) -> Result<PrekopaReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::BadArgument(alloc::format!(
            "lambda must lie strictly between 0 and 1, got {lambda}"
        )));
    }
    let fh = homothety(f, 1.0 - lambda)?;
    let gh = homothety(g, lambda)?;
    let prod = asplund_product(&fh, &gh)?;
    let lhs = prod.integrate()?;
    let rhs = f.integrate()?.powf(1.0 - lambda) * g.integrate()?.powf(lambda);
    Ok(PrekopaReport { lambda, lhs, rhs })
}
