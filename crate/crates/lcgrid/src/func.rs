//! Grid functions: log-concave densities `f` and convex profiles
//! `phi = -log f`, with construction-time invariant checks, exactly rounded
//! quadrature, barycenters and symmetry diagnostics.
//!
//! Values are stored as raw doubles. A log-concave function keeps finite
//! nonnegative values (`f = 0` marks points outside the support); a convex
//! profile keeps finite values or `+inf` (never NaN, never `-inf`). The two
//! views convert losslessly into each other through `-log` / `exp(-..)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact::ExactSum;
use crate::grid::GridSpec;
#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::tol;

/// How strictly line convexity is enforced at construction.
///
/// `Strict` admits a midpoint-convexity defect of at most
/// [`tol::EPS_CONVEX`] (resp. [`tol::EPS_LOG_CONCAVE`]) per grid line.
/// `OneCellAllowance` additionally admits a defect up to half the largest
/// adjacent finite gap of the line's profile: a value permutation that
/// rearranges a line into symmetric-decreasing order is convex only up to
/// the discreteness of the values it was handed, and half the largest
/// adjacent gap is the sharp bound for that defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityCheck {
    Strict,
    OneCellAllowance,
}

/// Checks midpoint convexity of one line of profile values (`+inf` allowed)
/// and returns the worst defect `2 phi_i - phi_{i-1} - phi_{i+1}` over
/// triples with a finite middle, the largest adjacent finite gap, and the
/// largest finite magnitude. A `+inf` middle with a finite neighbor on
/// each side is a hole in the support and is reported as an infinite
/// defect.
fn line_convexity_defect(line: &[f64]) -> (f64, f64, f64) {
    let mut worst = f64::NEG_INFINITY;
    let mut max_gap = 0.0f64;
    let mut scale = 0.0f64;
    for &v in line {
        if v.is_finite() {
            scale = scale.max(v.abs());
        }
    }
    for w in line.windows(2) {
        if w[0].is_finite() && w[1].is_finite() {
            max_gap = max_gap.max((w[1] - w[0]).abs());
        }
    }
    for w in line.windows(3) {
        let (l, m, r) = (w[0], w[1], w[2]);
        if m.is_finite() {
            if l.is_finite() && r.is_finite() {
                worst = worst.max(2.0 * m - l - r);
            }
        } else if l.is_finite() && r.is_finite() {
            // A support hole: f vanishes strictly between two points where
            // it is positive. Never convex.
            worst = f64::INFINITY;
        }
    }
    (worst, max_gap, scale)
}

fn check_profile_lines(spec: &GridSpec, values: &[f64], mode: ConvexityCheck) -> Result<()> {
    let mut line = Vec::new();
    for axis in 0..spec.dim() {
        let stride = spec.stride(axis);
        let len = spec.axis(axis).count;
        for base in spec.line_bases(axis) {
            line.clear();
            line.extend((0..len).map(|t| values[base + t * stride]));
            let (defect, max_gap, scale) = line_convexity_defect(&line);
            // The fixed epsilon dominates for profiles of ordinary
            // magnitude; the scale term keeps exactly convex data of huge
            // magnitude (where one ulp exceeds the epsilon) from being
            // rejected for its rounding noise alone.
            let rounding = 64.0 * f64::EPSILON * scale;
            let allow = match mode {
                ConvexityCheck::Strict => tol::EPS_CONVEX + rounding,
                ConvexityCheck::OneCellAllowance => 0.5 * max_gap + tol::EPS_CONVEX + rounding,
            };
            if defect > allow {
                return Err(Error::InvariantViolation(format!(
                    "axis {axis}: line convexity defect {defect:.3e} exceeds {allow:.3e}"
                )));
            }
        }
    }
    Ok(())
}

fn validate_profile_values(spec: &GridSpec, values: &[f64]) -> Result<()> {
    if values.len() != spec.total_nodes() {
        return Err(Error::GridMismatch(format!(
            "expected {} values, got {}",
            spec.total_nodes(),
            values.len()
        )));
    }
    let mut any_finite = false;
    for &v in values {
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::InvariantViolation(String::from(
                "profile values must be finite or +inf",
            )));
        }
        any_finite |= v.is_finite();
    }
    if !any_finite {
        return Err(Error::AllInfinite);
    }
    Ok(())
}

/// A convex profile `phi` sampled on a grid; `+inf` marks nodes outside
/// the effective domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFnGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ConvexFnGrid {
    /// Builds a profile, enforcing midpoint convexity along every
    /// axis-aligned grid line (up to [`tol::EPS_CONVEX`]) and properness.
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::with_check(spec, values, ConvexityCheck::Strict)
    }

    /// Builds a profile with an explicit convexity mode; see
    /// [`ConvexityCheck`].
    pub fn with_check(spec: GridSpec, values: Vec<f64>, mode: ConvexityCheck) -> Result<Self> {
        validate_profile_values(&spec, &values)?;
        check_profile_lines(&spec, &values, mode)?;
        Ok(ConvexFnGrid { spec, values })
    }

    /// Samples `phi` at every node of `spec`.
    pub fn from_fn(spec: GridSpec, mut phi: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values = (0..spec.total_nodes())
            .map(|idx| phi(&spec.node_coords(idx)))
            .collect();
        Self::new(spec, values)
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn finite_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }

    /// The log-concave density `exp(-phi)`.
    pub fn exp_neg(&self) -> Result<LogConcaveFnGrid> {
        let values = self
            .values
            .iter()
            .map(|&v| if v.is_finite() { (-v).exp() } else { 0.0 })
            .collect();
        LogConcaveFnGrid::with_check(self.spec.clone(), values, ConvexityCheck::OneCellAllowance)
    }
}

/// A nonnegative log-concave density `f` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LogConcaveFnGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl LogConcaveFnGrid {
    /// Builds a density, enforcing nonnegativity, properness (positive
    /// somewhere) and log-concavity along every axis-aligned grid line (up
    /// to [`tol::EPS_LOG_CONCAVE`] in log space).
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::with_check(spec, values, ConvexityCheck::Strict)
    }

    /// Builds a density with an explicit convexity mode for the log-space
    /// line check; see [`ConvexityCheck`].
    pub fn with_check(spec: GridSpec, values: Vec<f64>, mode: ConvexityCheck) -> Result<Self> {
        if values.len() != spec.total_nodes() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                spec.total_nodes(),
                values.len()
            )));
        }
        let mut any_positive = false;
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvariantViolation(format!(
                    "density values must be finite and nonnegative, got {v}"
                )));
            }
            any_positive |= v > 0.0;
        }
        if !any_positive {
            return Err(Error::AllInfinite);
        }
        let profile: Vec<f64> = values
            .iter()
            .map(|&v| if v > 0.0 { -v.ln() } else { f64::INFINITY })
            .collect();
        check_profile_lines(&spec, &profile, mode).map_err(|e| match e {
            Error::InvariantViolation(msg) => {
                Error::InvariantViolation(format!("log-concavity: {msg}"))
            }
            other => other,
        })?;
        Ok(LogConcaveFnGrid { spec, values })
    }

    /// Samples `f` at every node of `spec`.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values = (0..spec.total_nodes())
            .map(|idx| f(&spec.node_coords(idx)))
            .collect();
        Self::new(spec, values)
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// The convex profile `-log f` (`+inf` where `f = 0`). Always succeeds
    /// on a constructed density: the log-space invariant already holds.
    pub fn neg_log(&self) -> ConvexFnGrid {
        let values = self
            .values
            .iter()
            .map(|&v| if v > 0.0 { -v.ln() } else { f64::INFINITY })
            .collect();
        ConvexFnGrid {
            spec: self.spec.clone(),
            values,
        }
    }

    /// The quadrature mass `h^n * sum f`, with the node sum computed in
    /// exact arithmetic and rounded once: the result is bit-identical under
    /// any permutation of the nodes. Masses outside
    /// `[MASS_MIN, MASS_MAX]` are rejected as numerically untrustworthy.
    pub fn integrate(&self) -> Result<f64> {
        let total = crate::exact::exact_total(&self.values);
        let mass = total * self.spec.cell_volume();
        if !(mass >= tol::MASS_MIN && mass <= tol::MASS_MAX) {
            return Err(Error::MassOutOfRange {
                mass,
                lo: tol::MASS_MIN,
                hi: tol::MASS_MAX,
            });
        }
        Ok(mass)
    }

    /// The barycenter `(1/mass) * h^n * sum x f(x)`, one exact node sum per
    /// coordinate.
    pub fn barycenter(&self) -> Result<Vec<f64>> {
        let mass = self.integrate()?;
        let dim = self.spec.dim();
        let mut sums: Vec<ExactSum> = (0..dim).map(|_| ExactSum::new()).collect();
        let mut multi = alloc::vec![0usize; dim];
        for (idx, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            decode(&self.spec, idx, &mut multi);
            for k in 0..dim {
                sums[k].add(self.spec.axis(k).node(multi[k]) * v);
            }
        }
        let vol = self.spec.cell_volume();
        Ok(sums.iter().map(|s| s.value() * vol / mass).collect())
    }

    /// Largest mirror mismatch `|f(c+t) - f(c-t)|` along `axis` about the
    /// node `center`; indices whose mirror falls off the grid are compared
    /// against zero.
    pub fn symmetry_defect(&self, axis: usize, center: usize) -> f64 {
        let stride = self.spec.stride(axis);
        let len = self.spec.axis(axis).count;
        let mut worst = 0.0f64;
        for base in self.spec.line_bases(axis) {
            for i in 0..len {
                let mirror = 2 * center as isize - i as isize;
                let fi = self.values[base + i * stride];
                let fm = if mirror >= 0 && (mirror as usize) < len {
                    self.values[base + mirror as usize * stride]
                } else {
                    0.0
                };
                worst = worst.max((fi - fm).abs());
            }
        }
        worst
    }

    /// Exact per-line node sums along `axis`, in `line_bases` order. A
    /// value permutation of each line leaves this vector unchanged bit for
    /// bit, which is how mass preservation of rearrangements is audited.
    pub fn line_sums(&self, axis: usize) -> Vec<f64> {
        let stride = self.spec.stride(axis);
        let len = self.spec.axis(axis).count;
        self.spec
            .line_bases(axis)
            .map(|base| {
                let mut s = ExactSum::new();
                for t in 0..len {
                    s.add(self.values[base + t * stride]);
                }
                s.value()
            })
            .collect()
    }
}

fn decode(spec: &GridSpec, mut idx: usize, out: &mut [usize]) {
    for k in (0..spec.dim()).rev() {
        let c = spec.axis(k).count;
        out[k] = idx % c;
        idx /= c;
    }
}
