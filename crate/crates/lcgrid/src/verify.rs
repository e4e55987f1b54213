//! End-to-end verification of the symmetrization pipeline and the
//! standalone inequalities behind it.
//!
//! The centrepiece is [`run_pipeline`]: starting from a log-concave `f` and
//! a separating hyperplane `H_1`, it performs one Steiner symmetrization per
//! axis. Each step pins one more coordinate of the Santalo point, builds
//! the polar about that point, symmetrizes it about the (dual) image of the
//! step's hyperplane, and recovers the next function by a second polar.
//! The report records masses, products and residuals for every step plus
//! pass/fail verdicts for the facts the construction promises:
//!
//! * the product chain `mass_i * polar_mass_i` is non-decreasing in `i`,
//! * the first step loses at most the factor `4*lambda*(1-lambda)`,
//! * every symmetrization conserves polar mass *bit-for-bit* (rearranged
//!   node values are summed exactly, so the rounded total is identical),
//! * the final function is unconditional about its center and its volume
//!   product is below `(2*pi)^n`, which chains back to the bound
//!   `(2*pi)^n / (4*lambda*(1-lambda))` for the input product.
//!
//! Around the pipeline sit standalone checkers usable on any grid function:
//! [`verify_separation_lemma`] (the `4*lambda*(1-lambda)` mass bound for a
//! symmetrized polar), [`slice_inequality_check`] (the Asplund-product
//! inequality between polar slices that drives the separation lemma),
//! [`ball_lemma_check`] (the harmonic-mean lemma for triples of ray
//! functions), [`unconditional_product_check`] (the `(2*pi)^n` bound at an
//! unconditional center), [`verify_santalo_invariance`] (symmetrizing the
//! polar does not move the constrained Santalo point) and
//! [`polar_symmetry_defect`] (a mirror-symmetric function has a
//! mirror-symmetric polar about any center on the mirror plane).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::func::{ConvexityCheck, LogConcaveFnGrid};
use crate::grid::{AffineSubspace, GridSpec, Hyperplane};
use crate::legendre::{conjugate_profile, ConjugatePlan};
#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::santalo::{
    axis_slab_sums, lambda_split, plane_lambda, santalo_point_with_model, PolarMassModel,
};
use crate::steiner::{asplund_product, homothety, steiner_symmetrize};
use crate::tol;

/// `(2*pi)^d` without pulling in a power function.
fn two_pi_pow(dim: usize) -> f64 {
    let mut v = 1.0;
    for _ in 0..dim {
        v *= core::f64::consts::TAU;
    }
    v
}

/// Validates that `plan` is a zero-shift plan from `f`'s grid and returns
/// the dual (target) grid. All verifiers in this module take the dual grid
/// through a plan so callers state the conjugate geometry exactly once.
fn checked_dual(f: &LogConcaveFnGrid, plan: &ConjugatePlan) -> Result<GridSpec> {
    if plan.source() != f.spec() {
        return Err(Error::PlanMismatch(String::from(
            "plan source grid does not match the function grid",
        )));
    }
    if plan.xshift().iter().any(|&v| v != 0.0) || plan.yshift().iter().any(|&v| v != 0.0) {
        return Err(Error::PlanMismatch(String::from(
            "verification plans must be zero-shift; centers enter through z",
        )));
    }
    Ok(plan.target().clone())
}

/// Checks `z` lies on the hyperplane (within the node-snapping tolerance
/// used everywhere else for offsets).
fn require_on_plane(z: &[f64], plane: &Hyperplane, spec: &GridSpec) -> Result<()> {
    if z.len() != spec.dim() || z.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadArgument(format!(
            "center must be a finite point of dimension {}",
            spec.dim()
        )));
    }
    let snap = tol::OFFSET_SNAP * spec.axis(plane.axis).spacing();
    if (z[plane.axis] - plane.offset).abs() > snap {
        return Err(Error::BadArgument(format!(
            "center coordinate {} is not on the hyperplane offset {}",
            z[plane.axis], plane.offset
        )));
    }
    Ok(())
}

/// Recovers a function on `xgrid` from its polar weights about `z`: the
/// profile of `w` lives on the dual lattice `u`, and the returned function
/// is `exp(-sup_u(<u, x - z> - profile(u)))` evaluated at the nodes of
/// `xgrid`. On a grid this is the double polar, i.e. a convexification.
fn back_polar(w: &LogConcaveFnGrid, z: &[f64], xgrid: &GridSpec) -> Result<LogConcaveFnGrid> {
    let dim = w.spec().dim();
    let plan = ConjugatePlan::new(
        w.spec().clone(),
        xgrid.clone(),
        alloc::vec![0.0; dim],
        z.to_vec(),
    )?;
    let (profile, _) = conjugate_profile(&w.neg_log(), &plan)?;
    profile.exp_neg()
}

/// Largest absolute difference between adjacent node values along `axis`.
/// This is the natural resolution limit for symmetry defects of rearranged
/// outputs: the alternation convention places consecutive order statistics
/// at mirror slots, so defects up to one adjacent gap are expected.
fn max_adjacent_gap(f: &LogConcaveFnGrid, axis: usize) -> f64 {
    let spec = f.spec();
    let stride = spec.stride(axis);
    let len = spec.axis(axis).count;
    let mut gap = 0.0f64;
    for base in spec.line_bases(axis) {
        for t in 0..len - 1 {
            let d = (f.value(base + (t + 1) * stride) - f.value(base + t * stride)).abs();
            if d > gap {
                gap = d;
            }
        }
    }
    gap
}

/// Extracts the `(d-1)`-dimensional slice `x_axis = node(index)` of `f`.
/// Only meaningful for `d >= 2`; one-dimensional callers read node values
/// directly.
fn slice_grid(f: &LogConcaveFnGrid, axis: usize, index: usize) -> Result<LogConcaveFnGrid> {
    let spec = f.spec();
    let dim = spec.dim();
    let axes: Vec<_> = (0..dim).filter(|&k| k != axis).map(|k| *spec.axis(k)).collect();
    let sub = GridSpec::new(axes)?;
    let mut vals = Vec::with_capacity(sub.total_nodes());
    let mut multi = alloc::vec![0usize; dim];
    for sidx in 0..sub.total_nodes() {
        let smulti = sub.multi_index(sidx);
        let mut si = 0;
        for (k, slot) in multi.iter_mut().enumerate() {
            if k == axis {
                *slot = index;
            } else {
                *slot = smulti[si];
                si += 1;
            }
        }
        vals.push(f.value(spec.linear_index(&multi)));
    }
    LogConcaveFnGrid::with_check(sub, vals, ConvexityCheck::OneCellAllowance)
}

/// Log-linear interpolation between two non-negative values; zero as soon
/// as an endpoint with positive weight vanishes. Under-estimates any
/// log-concave profile between its nodes, which is the conservative
/// direction for every lower-bound check in this module.
fn log_interp(a: f64, b: f64, frac: f64) -> f64 {
    if frac <= 0.0 {
        return a;
    }
    if frac >= 1.0 {
        return b;
    }
    if a > 0.0 && b > 0.0 {
        ((1.0 - frac) * a.ln() + frac * b.ln()).exp()
    } else {
        0.0
    }
}

/// Multilinear interpolation of `f`'s profile at an arbitrary point; zero
/// outside the grid box. Corners with vanishing density force zero.
fn interp_density(f: &LogConcaveFnGrid, point: &[f64]) -> f64 {
    let spec = f.spec();
    let dim = spec.dim();
    let mut cells = Vec::with_capacity(dim);
    for k in 0..dim {
        let ax = spec.axis(k);
        let t = (point[k] - ax.lo) / ax.spacing();
        let top = (ax.count - 1) as f64;
        if t < -1e-9 || t > top + 1e-9 {
            return 0.0;
        }
        let t = t.clamp(0.0, top);
        let i0 = (t as usize).min(ax.count - 2);
        cells.push((i0, t - i0 as f64));
    }
    let mut acc = 0.0f64;
    let mut multi = alloc::vec![0usize; dim];
    for corner in 0..(1usize << dim) {
        let mut weight = 1.0f64;
        for (k, &(i0, frac)) in cells.iter().enumerate() {
            if (corner >> k) & 1 == 1 {
                weight *= frac;
                multi[k] = i0 + 1;
            } else {
                weight *= 1.0 - frac;
                multi[k] = i0;
            }
        }
        if weight == 0.0 {
            continue;
        }
        let v = f.value(spec.linear_index(&multi));
        if v > 0.0 {
            acc += weight * v.ln();
        } else {
            return 0.0;
        }
    }
    acc.exp()
}

/// Uniform index in `0..n`.
fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Splits `f` into per-node slab masses on either side of a node-aligned
/// hyperplane: entry `k` of the first vector is the mass of the slice
/// `x_axis = node(i + k)` (the plane itself at `k = 0`), entry `k` of the
/// second is the slice at `node(i - k)`. Masses carry the transverse cell
/// volume, so in one dimension they are plain node values.
pub fn ray_masses(f: &LogConcaveFnGrid, plane: Hyperplane) -> Result<(Vec<f64>, Vec<f64>)> {
    let spec = f.spec();
    let mid = plane.node_index(spec)?;
    let count = spec.axis(plane.axis).count;
    let (slabs, _) = axis_slab_sums(f, plane.axis)?;
    let transverse = spec.cell_volume() / spec.axis(plane.axis).spacing();
    let plus = (mid..count).map(|i| slabs[i] * transverse).collect();
    let minus = (0..=mid).rev().map(|i| slabs[i] * transverse).collect();
    Ok((plus, minus))
}

/// One named inequality checked by a verifier, with the raw numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub label: &'static str,
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// One symmetrization step of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Axis symmetrized at this step.
    pub axis: usize,
    /// The hyperplane `H_i` in source coordinates.
    pub plane: Hyperplane,
    /// The constrained Santalo point `z_i`.
    pub z: Vec<f64>,
    /// Achieved mass fraction below the plane (requested 1/2 for `i >= 2`).
    pub lambda: f64,
    /// `integral(f_i)`.
    pub mass: f64,
    /// `integral(f_i^{z_i})`, the defining (symmetrized) polar mass.
    pub polar_mass: f64,
    /// `mass * polar_mass`.
    pub product: f64,
    /// Sup distance between the defining polar of `f_i` and the polar
    /// recomputed from `f_i`; measures how far the grid double polar is
    /// from a true involution at this step.
    pub involution_residual: f64,
    /// Whether the Santalo optimizer met its gradient tolerance.
    pub santalo_converged: bool,
}

/// Full record of a pipeline run. Built by [`run_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    /// The split fraction the caller asked `H_1` to realize.
    pub lambda_requested: f64,
    /// The split fraction `H_1` actually realizes on the grid; every
    /// `4*lambda*(1-lambda)` factor below uses this value.
    pub lambda_1: f64,
    /// `(2*pi)^n / (4*lambda_1*(1-lambda_1))`.
    pub bound: f64,
    /// `integral(f)`.
    pub base_mass: f64,
    /// `integral(f^{z_1})`.
    pub base_polar_mass: f64,
    /// `base_mass * base_polar_mass`, the quantity the final bound is about.
    pub base_product: f64,
    pub steps: Vec<StepRecord>,
    /// Mirror defect of the final function about each step's plane, in step
    /// order.
    pub final_symmetry_defects: Vec<f64>,
    /// One-adjacent-gap resolution limit for each defect above.
    pub final_defect_allowances: Vec<f64>,
    pub verdicts: Vec<CheckOutcome>,
    /// `Some(message)` when a step failed and the report is partial.
    pub aborted: Option<String>,
}

impl PipelineReport {
    /// True when the run completed and every verdict passed.
    pub fn all_pass(&self) -> bool {
        self.aborted.is_none() && self.verdicts.iter().all(|v| v.pass)
    }

    /// Looks up a verdict by label.
    pub fn verdict(&self, label: &str) -> Option<&CheckOutcome> {
        self.verdicts.iter().find(|v| v.label == label)
    }

    /// Renders the report as a single JSON record. Numbers use shortest
    /// round-trip formatting. Schema (stable): `lambda_requested`,
    /// `lambda_1`, `bound`, `base: {mass, polar_mass, product}`, `steps:
    /// [{i, axis, offset, lambda, z, mass, polar_mass, product,
    /// involution_residual, santalo_converged}]`, `final_symmetry_defects`,
    /// `final_defect_allowances`, `verdicts: [{label, pass, lhs, rhs}]`,
    /// `aborted`, `all_pass`.
    pub fn to_json(&self) -> String {
        fn arr(vals: &[f64]) -> String {
            let items: Vec<String> = vals.iter().map(|v| format!("{v}")).collect();
            format!("[{}]", items.join(","))
        }
        let mut s = String::new();
        s.push_str(&format!(
            "{{\"lambda_requested\":{},\"lambda_1\":{},\"bound\":{},",
            self.lambda_requested, self.lambda_1, self.bound
        ));
        s.push_str(&format!(
            "\"base\":{{\"mass\":{},\"polar_mass\":{},\"product\":{}}},\"steps\":[",
            self.base_mass, self.base_polar_mass, self.base_product
        ));
        for (i, st) in self.steps.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&format!(
                "{{\"i\":{},\"axis\":{},\"offset\":{},\"lambda\":{},\"z\":{},\"mass\":{},\"polar_mass\":{},\"product\":{},\"involution_residual\":{},\"santalo_converged\":{}}}",
                i + 1,
                st.axis,
                st.plane.offset,
                st.lambda,
                arr(&st.z),
                st.mass,
                st.polar_mass,
                st.product,
                st.involution_residual,
                st.santalo_converged
            ));
        }
        s.push_str(&format!(
            "],\"final_symmetry_defects\":{},\"final_defect_allowances\":{},\"verdicts\":[",
            arr(&self.final_symmetry_defects),
            arr(&self.final_defect_allowances)
        ));
        for (i, v) in self.verdicts.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&format!(
                "{{\"label\":\"{}\",\"pass\":{},\"lhs\":{},\"rhs\":{}}}",
                v.label, v.pass, v.lhs, v.rhs
            ));
        }
        match &self.aborted {
            Some(msg) => s.push_str(&format!(
                "],\"aborted\":\"{}\",\"all_pass\":{}}}",
                msg.replace('"', "'"),
                self.all_pass()
            )),
            None => s.push_str(&format!("],\"aborted\":null,\"all_pass\":{}}}", self.all_pass())),
        }
        s
    }

    /// Renders the per-step numbers as a flat CSV. Row `i = 0` holds the
    /// base quantities (columns without a base analogue are left empty);
    /// rows `i >= 1` are the steps. Header:
    /// `i,axis,offset,lambda,mass,polar_mass,product,involution_residual,santalo_converged`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "i,axis,offset,lambda,mass,polar_mass,product,involution_residual,santalo_converged\n",
        );
        s.push_str(&format!(
            "0,,,,{},{},{},,\n",
            self.base_mass, self.base_polar_mass, self.base_product
        ));
        for (i, st) in self.steps.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                i + 1,
                st.axis,
                st.plane.offset,
                st.lambda,
                st.mass,
                st.polar_mass,
                st.product,
                st.involution_residual,
                st.santalo_converged
            ));
        }
        s
    }
}

/// Executes one pipeline step: constrained Santalo point, polar,
/// symmetrization about the dual image of the plane, second polar back.
/// Returns the step record, the next function, its polar model, and the
/// absolute mass drift through the symmetrization (zero bit-for-bit).
fn pipeline_step(
    current: &LogConcaveFnGrid,
    model: &PolarMassModel,
    xgrid: &GridSpec,
    dual: &GridSpec,
    plane: Hyperplane,
    step_lambda: f64,
    subspace: &AffineSubspace,
) -> Result<(StepRecord, LogConcaveFnGrid, PolarMassModel, f64)> {
    let sres = santalo_point_with_model(current, model, subspace)?;
    let w = model.polar_grid(&sres.z)?;
    let pre_mass = w.integrate()?;
    let wsym = steiner_symmetrize(&w, &Hyperplane::new(plane.axis, 0.0))?;
    let polar_mass = wsym.integrate()?;
    let drift = (polar_mass - pre_mass).abs();
    let next = back_polar(&wsym, &sres.z, xgrid)?;
    let mass = next.integrate()?;
    let (nmodel, _) = PolarMassModel::new(&next, dual.clone())?;
    let recomputed = nmodel.polar_grid(&sres.z)?;
    let mut residual = 0.0f64;
    for (a, b) in recomputed.values().iter().zip(wsym.values()) {
        let d = (a - b).abs();
        if d > residual {
            residual = d;
        }
    }
    let record = StepRecord {
        axis: plane.axis,
        plane,
        z: sres.z,
        lambda: step_lambda,
        mass,
        polar_mass,
        product: mass * polar_mass,
        involution_residual: residual,
        santalo_converged: sres.converged,
    };
    Ok((record, next, nmodel, drift))
}

/// Runs the full symmetrization pipeline on `f`.
///
/// `h1` is the first (separating) hyperplane; `lambda` is the split the
/// caller asked of it (recorded; all factors use the achieved split). The
/// plan fixes the dual grid: it must be zero-shift from `f`'s grid, and the
/// dual must contain the origin as a node on every axis, because every
/// plane maps to `u_axis = 0` in dual coordinates. Axes are processed
/// starting with `h1.axis`, then the remaining axes in increasing order;
/// steps `i >= 2` use the medial (half-mass) plane of the current function.
///
/// A step failure aborts the run and returns a partial report with
/// [`PipelineReport::aborted`] set; precondition failures error directly.
pub fn run_pipeline(
    f: &LogConcaveFnGrid,
    h1: Hyperplane,
    lambda: f64,
    plan: &ConjugatePlan,
) -> Result<PipelineReport> {
    let dual = checked_dual(f, plan)?;
    let spec = f.spec().clone();
    let dim = spec.dim();
    for k in 0..dim {
        Hyperplane::new(k, 0.0).node_index(&dual)?;
    }
    let c1 = h1.node_index(&spec)?;
    let h1 = Hyperplane::new(h1.axis, spec.axis(h1.axis).node(c1));
    let lambda_1 = plane_lambda(f, h1)?;
    if !(lambda_1 > 0.0 && lambda_1 < 1.0) {
        return Err(Error::DegenerateMarginal { axis: h1.axis });
    }
    let factor = 4.0 * lambda_1 * (1.0 - lambda_1);
    let bound = two_pi_pow(dim) / factor;

    let base_mass = f.integrate()?;
    let (mut model, _) = PolarMassModel::new(f, dual.clone())?;
    let mut current = f.clone();
    let mut subspace = AffineSubspace::full();
    let mut steps: Vec<StepRecord> = Vec::with_capacity(dim);
    let mut worst_drift = 0.0f64;
    let mut aborted = None;

    let axis_order: Vec<usize> =
        core::iter::once(h1.axis).chain((0..dim).filter(|&k| k != h1.axis)).collect();
    for (i, &axis) in axis_order.iter().enumerate() {
        let step = (|| -> Result<(StepRecord, LogConcaveFnGrid, PolarMassModel, f64)> {
            let (plane, step_lambda) = if i == 0 {
                (h1, lambda_1)
            } else {
                let split = lambda_split(&current, axis, 0.5)?;
                (split.plane, split.achieved)
            };
            subspace = subspace.and_fixed(axis, plane.offset)?;
            pipeline_step(&current, &model, &spec, &dual, plane, step_lambda, &subspace)
        })();
        match step {
            Ok((record, next, nmodel, drift)) => {
                if drift > worst_drift {
                    worst_drift = drift;
                }
                steps.push(record);
                current = next;
                model = nmodel;
            }
            Err(err) => {
                aborted = Some(format!("step {}: {}", i + 1, err));
                break;
            }
        }
    }

    let base_polar_mass = steps.first().map_or(f64::NAN, |s| s.polar_mass);
    let base_product = base_mass * base_polar_mass;

    let mut final_symmetry_defects = Vec::with_capacity(steps.len());
    let mut final_defect_allowances = Vec::with_capacity(steps.len());
    for st in &steps {
        let idx = st.plane.node_index(&spec)?;
        final_symmetry_defects.push(current.symmetry_defect(st.axis, idx));
        final_defect_allowances.push(max_adjacent_gap(&current, st.axis) + tol::EPS_SYMMETRY);
    }

    let mut verdicts = Vec::new();
    if let Some(first) = steps.first() {
        let rhs = factor * base_product * (1.0 - tol::EPS_INEQ);
        verdicts.push(CheckOutcome {
            label: "first-step-bound",
            pass: first.product >= rhs,
            lhs: first.product,
            rhs,
        });
        let mut worst_ratio = 1.0f64;
        for pair in steps.windows(2) {
            let r = pair[1].product / pair[0].product;
            if r < worst_ratio {
                worst_ratio = r;
            }
        }
        verdicts.push(CheckOutcome {
            label: "monotone-products",
            pass: worst_ratio >= 1.0 - tol::EPS_MONOTONE,
            lhs: worst_ratio,
            rhs: 1.0 - tol::EPS_MONOTONE,
        });
        verdicts.push(CheckOutcome {
            label: "polar-mass-conserved",
            pass: worst_drift == 0.0,
            lhs: worst_drift,
            rhs: 0.0,
        });
        let n_conv = steps.iter().filter(|s| s.santalo_converged).count();
        verdicts.push(CheckOutcome {
            label: "santalo-converged",
            pass: n_conv == steps.len(),
            lhs: n_conv as f64 / steps.len() as f64,
            rhs: 1.0,
        });
        let final_rhs = bound * (1.0 + tol::BOUND_BUDGET);
        verdicts.push(CheckOutcome {
            label: "final-bound",
            pass: base_product <= final_rhs,
            lhs: base_product,
            rhs: final_rhs,
        });
    }
    if steps.len() == dim {
        let last = steps.last().expect("non-empty steps");
        let rhs = two_pi_pow(dim) * (1.0 + tol::BOUND_BUDGET);
        verdicts.push(CheckOutcome {
            label: "unconditional-bound",
            pass: last.product <= rhs,
            lhs: last.product,
            rhs,
        });
        let mut worst = (0.0f64, tol::EPS_SYMMETRY);
        let mut pass = true;
        for (d, a) in final_symmetry_defects.iter().zip(&final_defect_allowances) {
            if d > a {
                pass = false;
            }
            if d - a > worst.0 - worst.1 {
                worst = (*d, *a);
            }
        }
        verdicts.push(CheckOutcome {
            label: "unconditional-defects",
            pass,
            lhs: worst.0,
            rhs: worst.1,
        });
    }

    Ok(PipelineReport {
        lambda_requested: lambda,
        lambda_1,
        bound,
        base_mass,
        base_polar_mass,
        base_product,
        steps,
        final_symmetry_defects,
        final_defect_allowances,
        verdicts,
        aborted,
    })
}

/// Result of [`verify_separation_lemma`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    /// Mass fraction of the polar below the plane (half the plane slab on
    /// each side).
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl SeparationReport {
    pub fn ok(&self) -> bool {
        self.lhs >= self.rhs * (1.0 - tol::EPS_INEQ)
    }

    /// Relative slack `lhs/rhs - 1`.
    pub fn slack(&self) -> f64 {
        self.lhs / self.rhs - 1.0
    }
}

/// Checks the separation lower bound: symmetrizing `f` about a hyperplane
/// `H` through `z` costs its polar at most the factor `4*lambda*(1-lambda)`,
///
/// ```text
/// integral((S_H f)^z) >= 4*lambda*(1-lambda) * integral(f^z),
/// ```
///
/// where `lambda` is measured from the polar itself: the fraction of
/// `integral(f^z)` on the lower side of `H`. `H` must be a node plane of
/// `f`'s grid and contain `z`.
pub fn verify_separation_lemma(
    f: &LogConcaveFnGrid,
    z: &[f64],
    h: Hyperplane,
    plan: &ConjugatePlan,
) -> Result<SeparationReport> {
    let dual = checked_dual(f, plan)?;
    let spec = f.spec();
    let ci = h.node_index(spec)?;
    let plane = Hyperplane::new(h.axis, spec.axis(h.axis).node(ci));
    require_on_plane(z, &plane, spec)?;
    let (model, _) = PolarMassModel::new(f, dual.clone())?;
    let w = model.polar_grid(z)?;
    let lambda = plane_lambda(&w, Hyperplane::new(plane.axis, 0.0))?;
    let polar_mass = model.mass(z)?;
    let fsym = steiner_symmetrize(f, &plane)?;
    let (smodel, _) = PolarMassModel::new(&fsym, dual)?;
    let lhs = smodel.mass(z)?;
    let rhs = 4.0 * lambda * (1.0 - lambda) * polar_mass;
    Ok(SeparationReport { lambda, lhs, rhs })
}

/// One sampled `(s, t)` pair of [`slice_inequality_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSample {
    pub s: f64,
    pub t: f64,
    /// The compared height `2*s*t/(s+t)`.
    pub height: f64,
    /// Homothety weight `t/(s+t)` on the `+s` slice.
    pub lambda: f64,
    /// Largest node-wise violation after tolerances; non-positive passes.
    pub worst_excess: f64,
    pub pass: bool,
}

/// Result of [`slice_inequality_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCheckReport {
    pub axis: usize,
    pub samples: Vec<SliceSample>,
}

impl SliceCheckReport {
    pub fn ok(&self) -> bool {
        self.samples.iter().all(|s| s.pass)
    }

    pub fn worst_excess(&self) -> f64 {
        self.samples.iter().map(|s| s.worst_excess).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Checks the slice inequality behind the separation lemma: for heights
/// `s, t > 0` and `w = f^z`, the Asplund combination of the polar's slices,
///
/// ```text
/// (t/(s+t) * w_(s)) star (s/(s+t) * w_(-t))  <=  ((S_H f)^z)_(2st/(s+t)),
/// ```
///
/// node-wise on the slice grid, within `EPS_SLICE` relative plus a one-cell
/// interpolation allowance on each side. `samples` pairs `(s, t)` are drawn
/// from the positive dual offsets with the seeded generator.
pub fn slice_inequality_check(
    f: &LogConcaveFnGrid,
    z: &[f64],
    h: Hyperplane,
    plan: &ConjugatePlan,
    samples: usize,
    seed: u64,
) -> Result<SliceCheckReport> {
    let dual = checked_dual(f, plan)?;
    let spec = f.spec();
    let ci = h.node_index(spec)?;
    let plane = Hyperplane::new(h.axis, spec.axis(h.axis).node(ci));
    require_on_plane(z, &plane, spec)?;
    let axis = plane.axis;
    let dim = spec.dim();
    let mid = Hyperplane::new(axis, 0.0).node_index(&dual)?;
    let side = (dual.axis(axis).count - 1 - mid).min(mid);
    if side < 2 {
        return Err(Error::BadArgument(String::from(
            "dual grid too small for slice sampling",
        )));
    }
    let hu = dual.axis(axis).spacing();

    let (model, _) = PolarMassModel::new(f, dual.clone())?;
    let w = model.polar_grid(z)?;
    let fsym = steiner_symmetrize(f, &plane)?;
    let (smodel, _) = PolarMassModel::new(&fsym, dual.clone())?;
    let ws = smodel.polar_grid(z)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let i = 1 + pick(&mut rng, side - 1);
        let j = 1 + pick(&mut rng, side - 1);
        let s = i as f64 * hu;
        let t = j as f64 * hu;
        let q = 2.0 * (i * j) as f64 / (i + j) as f64;
        let height = q * hu;
        let k0 = q as usize;
        let frac = q - k0 as f64;
        if k0 + 1 > side {
            // Unreachable for sampled offsets (the height never exceeds
            // max(s, t)), kept as the documented contract for callers.
            return Err(Error::SliceOutOfRange { axis, height });
        }
        let lambda = t / (s + t);
        let worst_excess = if dim == 1 {
            let lhs = w.value(mid + i).powf(lambda) * w.value(mid - j).powf(1.0 - lambda);
            let dn = ws.value(mid + k0);
            let up = ws.value(mid + k0 + 1);
            let rhs = log_interp(dn, up, frac);
            lhs - rhs - (tol::EPS_SLICE * rhs.abs() + (up - dn).abs())
        } else {
            let s1 = slice_grid(&w, axis, mid + i)?;
            let s2 = slice_grid(&w, axis, mid - j)?;
            let lhsf = asplund_product(&homothety(&s1, lambda)?, &homothety(&s2, 1.0 - lambda)?)?;
            let mut one_cell = 0.0f64;
            for k in 0..lhsf.spec().dim() {
                one_cell = one_cell.max(max_adjacent_gap(&lhsf, k));
            }
            let dn = slice_grid(&ws, axis, mid + k0)?;
            let up = slice_grid(&ws, axis, mid + k0 + 1)?;
            let mut worst = f64::NEG_INFINITY;
            for idx in 0..dn.spec().total_nodes() {
                let rhs = log_interp(dn.value(idx), up.value(idx), frac);
                let unc = (up.value(idx) - dn.value(idx)).abs();
                let point = dn.spec().node_coords(idx);
                let lhs = interp_density(&lhsf, &point);
                let excess = lhs - rhs - (tol::EPS_SLICE * rhs.abs() + unc + one_cell);
                if excess > worst {
                    worst = excess;
                }
            }
            worst
        };
        out.push(SliceSample {
            s,
            t,
            height,
            lambda,
            worst_excess,
            pass: worst_excess <= 0.0,
        });
    }
    Ok(SliceCheckReport { axis, samples: out })
}

/// Result of [`ball_lemma_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct BallLemmaReport {
    pub mass0: f64,
    pub mass1: f64,
    pub mass2: f64,
    /// `1 / mass0`.
    pub lhs: f64,
    /// `(1/mass1 + 1/mass2) / 2`.
    pub rhs: f64,
    /// Smallest raw `F0(2xy/(x+y)) - F1(x)^(y/(x+y)) * F2(y)^(x/(x+y))`
    /// seen during the hypothesis scan.
    pub hypothesis_margin: f64,
    /// Quadrature headroom for the conclusion. Each mass is a half-weight
    /// trapezoid sum whose distance from the true integral is bounded by
    /// `h/8 * sum_k |F(k+1) - 2F(k) + F(k-1)|` (per-cell error is
    /// `h^3 |F''| / 12` where the profile is smooth and `h^2 |dF'| / 8`
    /// across a slope break, and the second differences bound both; slab
    /// profiles routinely carry a break where a support facet ends). This
    /// field maps those three bounds through the reciprocals, shrinks under
    /// grid refinement, and cannot absorb a real violation, which is `O(1)`.
    pub quad_allowance: f64,
}

impl BallLemmaReport {
    pub fn ok(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + tol::EPS_INEQ) + self.quad_allowance
    }
}

/// Checks the harmonic-mean lemma for ray functions sampled on `0, h, 2h,
/// ...`: if `F0(2xy/(x+y)) >= F1(x)^(y/(x+y)) * F2(y)^(x/(x+y))` for all
/// `x, y > 0`, then `1/integral(F0) <= (1/integral(F1) + 1/integral(F2))/2`.
///
/// The hypothesis is scanned on `pairs` seeded node pairs with `F0`
/// interpolated log-linearly (an under-estimate for log-concave data, so
/// the scan cannot pass by interpolation optimism); a violation beyond
/// `EPS_SLICE` relative plus one adjacent gap of `F0` fails with
/// [`Error::HypothesisFailed`] at the worst witness. Pairs where either
/// hypothesis input (`F1` at `x` or `F2` at `y`) falls below `SLICE_FLOOR`
/// of the triple's peak are outside the certified range and do not trip
/// the scan. Quadrature weights the node at zero by one half.
pub fn ball_lemma_check(
    f0: &[f64],
    f1: &[f64],
    f2: &[f64],
    spacing: f64,
    pairs: usize,
    seed: u64,
) -> Result<BallLemmaReport> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::BadArgument(String::from("spacing must be positive and finite")));
    }
    for rays in [f0, f1, f2] {
        if rays.len() < 3 {
            return Err(Error::BadArgument(String::from("ray functions need at least 3 nodes")));
        }
        if rays.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::BadArgument(String::from(
                "ray functions must be finite and non-negative",
            )));
        }
    }
    let quad = |vals: &[f64]| -> Result<f64> {
        let mut sum = crate::exact::ExactSum::new();
        sum.add(vals[0] * 0.5);
        for &v in &vals[1..] {
            sum.add(v);
        }
        let mass = sum.value() * spacing;
        if !(tol::MASS_MIN..=tol::MASS_MAX).contains(&mass) {
            return Err(Error::MassOutOfRange { mass, lo: tol::MASS_MIN, hi: tol::MASS_MAX });
        }
        Ok(mass)
    };
    let mass0 = quad(f0)?;
    let mass1 = quad(f1)?;
    let mass2 = quad(f2)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let peak = f0
        .iter()
        .chain(f1.iter())
        .chain(f2.iter())
        .fold(0.0f64, |acc, &v| acc.max(v));
    // Certified range of the scan. Far below the peak the sampled rays are
    // dominated by sub-cell support offsets (a facet of the effective domain
    // lands between nodes and inflates the conjugate tail by a factor that
    // grows with the height), so pointwise comparisons there test the grid,
    // not the data, at any resolution. Values under the floor carry at most
    // a SLICE_FLOOR-scale share of any mass.
    let floor = tol::SLICE_FLOOR * peak;
    let mut margin = f64::INFINITY;
    let mut worst_deficit = 0.0f64;
    let mut witness = None;
    for _ in 0..pairs {
        let i = 1 + pick(&mut rng, f1.len() - 1);
        let j = 1 + pick(&mut rng, f2.len() - 1);
        let x = i as f64 * spacing;
        let y = j as f64 * spacing;
        let q = 2.0 * (i as f64) * (j as f64) / (i + j) as f64;
        let mut k0 = q as usize;
        let mut frac = q - k0 as f64;
        if k0 + 1 > f0.len() - 1 {
            if k0 > f0.len() - 1 {
                continue;
            }
            k0 = f0.len() - 2;
            frac = 1.0;
        }
        let lhs = log_interp(f0[k0], f0[k0 + 1], frac);
        let rhs = f1[i].powf(y / (x + y)) * f2[j].powf(x / (x + y));
        if lhs - rhs < margin {
            margin = lhs - rhs;
        }
        // The floor gates each hypothesis input separately: a fractional
        // power launders a deep-tail factor's placement error up to bulk
        // scale (a factor-2 error enters `rhs` as `2^alpha`), so a pair is
        // certified only when both inputs are. The conclusion side `f0` is
        // deliberately not floored; a spuriously vanishing symmetrized ray
        // must keep tripping the scan.
        if f1[i] < floor || f2[j] < floor {
            continue;
        }
        let gap = (f0[k0 + 1] - f0[k0]).abs();
        let deficit = rhs * (1.0 - tol::EPS_SLICE) - gap - lhs;
        if deficit > worst_deficit {
            worst_deficit = deficit;
            witness = Some((x, y, lhs, rhs));
        }
    }
    if let Some((x, y, lhs, rhs)) = witness {
        return Err(Error::HypothesisFailed { x, y, lhs, rhs });
    }
    if margin == f64::INFINITY {
        margin = 0.0;
    }
    let curvature = |rays: &[f64]| -> f64 {
        rays.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs()).sum::<f64>() * spacing / 8.0
    };
    let quad_allowance = curvature(f0) / (mass0 * mass0)
        + 0.5 * (curvature(f1) / (mass1 * mass1) + curvature(f2) / (mass2 * mass2));
    Ok(BallLemmaReport {
        mass0,
        mass1,
        mass2,
        lhs: 1.0 / mass0,
        rhs: 0.5 * (1.0 / mass1 + 1.0 / mass2),
        hypothesis_margin: margin,
        quad_allowance,
    })
}

/// The three ray functions the pipeline's first step feeds to the
/// harmonic-mean lemma. Built by [`pipeline_slice_triple`].
#[derive(Debug, Clone, PartialEq)]
pub struct SliceTriple {
    /// Slab masses of `(S_H f)^z` at heights `0, h, 2h, ...` above the
    /// plane (in dual coordinates).
    pub f0: Vec<f64>,
    /// Slab masses of `f^z` above the plane.
    pub f1: Vec<f64>,
    /// Slab masses of `f^z` below the plane.
    pub f2: Vec<f64>,
    /// Dual grid spacing along the plane's axis.
    pub spacing: f64,
}

/// Builds the ray-mass triple `(F0, F1, F2)` of the separation argument:
/// `z` is the Santalo point of `f` constrained to `h`, `F1/F2` are the
/// per-slab masses of the polar `f^z` on either side of the plane, and
/// `F0` comes from the polar of the symmetrized function. Feed the result
/// to [`ball_lemma_check`].
pub fn pipeline_slice_triple(
    f: &LogConcaveFnGrid,
    h: Hyperplane,
    plan: &ConjugatePlan,
) -> Result<SliceTriple> {
    let dual = checked_dual(f, plan)?;
    let spec = f.spec();
    let ci = h.node_index(spec)?;
    let plane = Hyperplane::new(h.axis, spec.axis(h.axis).node(ci));
    let (model, _) = PolarMassModel::new(f, dual.clone())?;
    let subspace = AffineSubspace::full().and_fixed(plane.axis, plane.offset)?;
    let sres = santalo_point_with_model(f, &model, &subspace)?;
    let w = model.polar_grid(&sres.z)?;
    let fsym = steiner_symmetrize(f, &plane)?;
    let (smodel, _) = PolarMassModel::new(&fsym, dual.clone())?;
    let ws = smodel.polar_grid(&sres.z)?;
    let u0 = Hyperplane::new(plane.axis, 0.0);
    let (f0, _) = ray_masses(&ws, u0)?;
    let (f1, f2) = ray_masses(&w, u0)?;
    Ok(SliceTriple { f0, f1, f2, spacing: dual.axis(plane.axis).spacing() })
}

/// Result of [`unconditional_product_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnconditionalReport {
    /// `integral(f) * integral(f^center)`.
    pub product: f64,
    /// `(2*pi)^n`.
    pub bound: f64,
    /// `product / bound`; 1 within grid tolerance exactly for Gaussians.
    pub ratio: f64,
    /// Mirror defect about the center node, per axis.
    pub defects: Vec<f64>,
}

impl UnconditionalReport {
    pub fn ok(&self) -> bool {
        self.product <= self.bound * (1.0 + tol::BOUND_BUDGET)
    }
}

/// Checks the unconditional volume-product bound: for `f` unconditional
/// about `center` (mirror-symmetric about every coordinate plane through
/// it), `integral(f) * integral(f^center) <= (2*pi)^n`. Fails with
/// [`Error::NotUnconditional`] when a mirror defect exceeds `EPS_SYMMETRY`
/// relative to the peak value.
pub fn unconditional_product_check(
    f: &LogConcaveFnGrid,
    center: &[f64],
    plan: &ConjugatePlan,
) -> Result<UnconditionalReport> {
    let dual = checked_dual(f, plan)?;
    let spec = f.spec();
    if center.len() != spec.dim() {
        return Err(Error::BadArgument(format!(
            "center must have dimension {}",
            spec.dim()
        )));
    }
    let tolerance = tol::EPS_SYMMETRY * f.max_value().max(1.0);
    let mut defects = Vec::with_capacity(spec.dim());
    for axis in 0..spec.dim() {
        let idx = Hyperplane::new(axis, center[axis]).node_index(spec)?;
        let defect = f.symmetry_defect(axis, idx);
        if defect > tolerance {
            return Err(Error::NotUnconditional { axis, defect });
        }
        defects.push(defect);
    }
    let (model, _) = PolarMassModel::new(f, dual)?;
    let product = f.integrate()? * model.mass(center)?;
    let bound = two_pi_pow(spec.dim());
    Ok(UnconditionalReport { product, bound, ratio: product / bound, defects })
}

/// Result of [`verify_santalo_invariance`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    /// `s_G(f)`.
    pub z: Vec<f64>,
    /// `s_G(g)` for `g` defined by `g^z = S_H(f^z)`.
    pub z_after: Vec<f64>,
    /// `max_k |z_after[k] - z[k]|`.
    pub drift: f64,
    /// `TOL_POINT` times the largest grid extent.
    pub tol: f64,
    /// Both optimizer runs met their gradient tolerance.
    pub converged: bool,
}

impl InvarianceReport {
    pub fn ok(&self) -> bool {
        self.converged && self.drift <= self.tol
    }
}

/// Checks that symmetrizing the polar does not move the constrained
/// Santalo point: with `z = s_G(f)` and `g` defined by `g^z = S_H(f^z)`
/// (recovered through the second polar), `s_G(g) = z` up to `TOL_POINT`
/// times the grid extent. `G` must fix `h`'s axis at `h`'s offset.
pub fn verify_santalo_invariance(
    f: &LogConcaveFnGrid,
    subspace: &AffineSubspace,
    h: Hyperplane,
    plan: &ConjugatePlan,
) -> Result<InvarianceReport> {
    let dual = checked_dual(f, plan)?;
    let spec = f.spec();
    let ci = h.node_index(spec)?;
    let plane = Hyperplane::new(h.axis, spec.axis(h.axis).node(ci));
    let snap = tol::OFFSET_SNAP * spec.axis(plane.axis).spacing();
    let pinned = subspace
        .fixed()
        .iter()
        .any(|&(axis, value)| axis == plane.axis && (value - plane.offset).abs() <= snap);
    if !pinned {
        return Err(Error::BadArgument(String::from(
            "the subspace must fix the hyperplane's axis at its offset",
        )));
    }
    let (model, _) = PolarMassModel::new(f, dual.clone())?;
    let before = santalo_point_with_model(f, &model, subspace)?;
    let w = model.polar_grid(&before.z)?;
    let wsym = steiner_symmetrize(&w, &Hyperplane::new(plane.axis, 0.0))?;
    let g = back_polar(&wsym, &before.z, spec)?;
    let (gmodel, _) = PolarMassModel::new(&g, dual)?;
    let after = santalo_point_with_model(&g, &gmodel, subspace)?;
    let mut drift = 0.0f64;
    for (a, b) in after.z.iter().zip(&before.z) {
        let d = (a - b).abs();
        if d > drift {
            drift = d;
        }
    }
    Ok(InvarianceReport {
        z: before.z,
        z_after: after.z,
        drift,
        tol: tol::TOL_POINT * spec.max_extent(),
        converged: before.converged && after.converged,
    })
}

/// Mirror defect of the polar `f^z` about the dual image of `h`. For `f`
/// mirror-symmetric about `h` and `z` on `h`, the polar is symmetric too;
/// on a grid whose nodes mirror exactly (a symmetric axis with the plane at
/// the middle node and `z`'s component equal to zero) the defect is exactly
/// zero, because the conjugate recursion consumes bitwise-mirrored inputs.
pub fn polar_symmetry_defect(
    f: &LogConcaveFnGrid,
    z: &[f64],
    h: Hyperplane,
    plan: &ConjugatePlan,
) -> Result<f64> {
    let dual = checked_dual(f, plan)?;
    let spec = f.spec();
    let ci = h.node_index(spec)?;
    let plane = Hyperplane::new(h.axis, spec.axis(h.axis).node(ci));
    require_on_plane(z, &plane, spec)?;
    let (model, _) = PolarMassModel::new(f, dual.clone())?;
    let w = model.polar_grid(z)?;
    let mid = Hyperplane::new(plane.axis, 0.0).node_index(&dual)?;
    Ok(w.symmetry_defect(plane.axis, mid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use alloc::vec;

    fn zero_plan(source: &GridSpec, dual: &GridSpec) -> ConjugatePlan {
        ConjugatePlan::legendre(source.clone(), dual.clone()).expect("plan")
    }

    fn grid_1d(half: f64, count: usize) -> GridSpec {
        GridSpec::cube(1, half, count).expect("grid")
    }

    #[test]
    fn gaussian_pipeline_is_a_fixed_point() {
        let spec = grid_1d(8.0, 513);
        let dual = grid_1d(8.0, 513);
        let f = sample::standard_gaussian(spec.clone()).expect("gaussian");
        let plan = zero_plan(&spec, &dual);
        let report = run_pipeline(&f, Hyperplane::new(0, 0.0), 0.5, &plan).expect("pipeline");
        assert!(report.aborted.is_none());
        assert_eq!(report.lambda_1, 0.5);
        assert_eq!(report.bound, core::f64::consts::TAU);
        assert!(report.all_pass(), "verdicts: {:?}", report.verdicts);
        // The even input is bitwise mirror-symmetric, so the symmetrized
        // polar equals the polar and the final function stays exactly even.
        assert_eq!(report.final_symmetry_defects[0], 0.0);
        let tau = core::f64::consts::TAU;
        assert!((report.base_product - tau).abs() < 0.01 * tau);
        assert!((report.steps[0].product - report.base_product).abs() < 5e-3 * tau);
    }

    #[test]
    fn shifted_exponential_pipeline_respects_the_bound() {
        let spec = grid_1d(12.0, 769);
        let dual = grid_1d(2.0, 257);
        let f = sample::laplace(spec.clone(), &[0.9], &[1.0]).expect("laplace");
        let plan = zero_plan(&spec, &dual);
        let split = lambda_split(&f, 0, 0.25).expect("split");
        let report = run_pipeline(&f, split.plane, 0.25, &plan).expect("pipeline");
        assert!(report.all_pass(), "verdicts: {:?}", report.verdicts);
        assert!((report.lambda_1 - 0.25).abs() < 0.05);
        assert!(report.base_product <= report.bound * (1.0 + tol::BOUND_BUDGET));
        // Closed form: the polar of e^{-|x - c|} about a point near c is an
        // exponential profile on [-1, 1], so the base product sits well
        // under the lambda-adjusted bound of 2*pi*4/3.
        assert!(report.bound > 8.0 && report.bound < 8.8);
        assert!(report.base_product > 3.5 && report.base_product < 5.0);
    }

    #[test]
    fn asymmetric_2d_pipeline_products_are_monotone() {
        let spec = GridSpec::cube(2, 6.0, 129).expect("grid");
        let dual = GridSpec::cube(2, 12.0, 129).expect("dual");
        let f = sample::gaussian(spec.clone(), &[0.7, -0.4], &[1.0, 0.8]).expect("gaussian");
        let plan = zero_plan(&spec, &dual);
        let split = lambda_split(&f, 0, 0.35).expect("split");
        let report = run_pipeline(&f, split.plane, 0.35, &plan).expect("pipeline");
        assert!(report.all_pass(), "verdicts: {:?}", report.verdicts);
        assert_eq!(report.steps.len(), 2);
        assert!((report.steps[1].lambda - 0.5).abs() < 0.05);
        assert!(
            report.steps[1].product >= report.steps[0].product * (1.0 - tol::EPS_MONOTONE),
            "products {} -> {}",
            report.steps[0].product,
            report.steps[1].product
        );
        assert_eq!(report.verdict("polar-mass-conserved").expect("verdict").lhs, 0.0);
    }

    #[test]
    fn report_serializers_emit_the_documented_schema() {
        let spec = grid_1d(8.0, 257);
        let dual = grid_1d(8.0, 257);
        let f = sample::standard_gaussian(spec.clone()).expect("gaussian");
        let plan = zero_plan(&spec, &dual);
        let report = run_pipeline(&f, Hyperplane::new(0, 0.0), 0.5, &plan).expect("pipeline");
        let json = report.to_json();
        assert!(json.starts_with('{') && json.ends_with('}'));
        for key in [
            "\"lambda_1\"",
            "\"bound\"",
            "\"base\"",
            "\"steps\"",
            "\"verdicts\"",
            "\"aborted\":null",
            "\"all_pass\":true",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("i,axis,offset,lambda,mass,polar_mass,product,involution_residual,santalo_converged")
        );
        assert_eq!(csv.lines().count(), report.steps.len() + 2);
        assert!(csv.lines().nth(1).expect("base row").starts_with("0,,,,"));
    }

    #[test]
    fn separation_lemma_is_exactly_tight_for_even_functions() {
        let spec = grid_1d(8.0, 513);
        let dual = grid_1d(8.0, 513);
        let f = sample::standard_gaussian(spec.clone()).expect("gaussian");
        let plan = zero_plan(&spec, &dual);
        let report =
            verify_separation_lemma(&f, &[0.0], Hyperplane::new(0, 0.0), &plan).expect("lemma");
        // Mirror-exact input: the symmetrization is the identity and the
        // measured split is exactly one half, so both sides are the same
        // float.
        assert_eq!(report.lambda, 0.5);
        assert_eq!(report.lhs, report.rhs);
        assert!(report.ok());
    }

    #[test]
    fn separation_lemma_has_slack_for_asymmetric_input() {
        // Compact support keeps the reflected support on the grid, so the
        // off-middle symmetrization is representable without mass loss.
        let spec = grid_1d(12.0, 769);
        let dual = grid_1d(6.0, 769);
        let f = sample::truncated_gaussian(spec.clone(), &[0.9], &[1.5], &[5.0])
            .expect("truncated gaussian");
        let plan = zero_plan(&spec, &dual);
        let split = lambda_split(&f, 0, 0.3).expect("split");
        let z = vec![split.plane.offset];
        let report = verify_separation_lemma(&f, &z, split.plane, &plan).expect("lemma");
        assert!(report.ok());
        assert!(report.lambda > 0.0 && report.lambda < 1.0);
        assert!(report.slack() > 0.001, "slack {}", report.slack());
    }

    #[test]
    fn slice_inequality_holds_in_one_and_two_dimensions() {
        let spec = grid_1d(8.0, 513);
        let dual = grid_1d(8.0, 513);
        let f = sample::standard_gaussian(spec.clone()).expect("gaussian");
        let plan = zero_plan(&spec, &dual);
        let report = slice_inequality_check(&f, &[0.0], Hyperplane::new(0, 0.0), &plan, 16, 7)
            .expect("slices");
        assert_eq!(report.samples.len(), 16);
        assert!(report.ok(), "worst excess {}", report.worst_excess());

        let spec2 = GridSpec::cube(2, 6.0, 65).expect("grid");
        let dual2 = GridSpec::cube(2, 12.0, 65).expect("dual");
        let f2 = sample::truncated_gaussian(
            spec2.clone(),
            &[0.3, -0.2],
            &[1.0, 0.9],
            &[3.5, 3.5],
        )
        .expect("truncated gaussian");
        let plan2 = zero_plan(&spec2, &dual2);
        let split = lambda_split(&f2, 0, 0.5).expect("split");
        let sub = AffineSubspace::full().and_fixed(0, split.plane.offset).expect("subspace");
        let (model, _) = PolarMassModel::new(&f2, dual2.clone()).expect("model");
        let z = santalo_point_with_model(&f2, &model, &sub).expect("santalo").z;
        let report2 =
            slice_inequality_check(&f2, &z, split.plane, &plan2, 12, 11).expect("slices");
        assert!(report2.ok(), "worst excess {}", report2.worst_excess());
    }

    #[test]
    fn ball_lemma_accepts_identical_profiles_with_equality() {
        let ray: Vec<f64> = (0..240).map(|i| (-0.5 * (0.05 * i as f64).powi(2)).exp()).collect();
        let report = ball_lemma_check(&ray, &ray, &ray, 0.05, 300, 13).expect("hypothesis");
        assert!(report.ok());
        assert!((report.lhs - report.rhs).abs() <= 1e-12 * report.rhs);
        assert!(report.hypothesis_margin >= -1e-12);
    }

    #[test]
    fn ball_lemma_rejects_a_halved_numerator_with_a_witness() {
        let ray: Vec<f64> = (0..240).map(|i| (-0.5 * (0.05 * i as f64).powi(2)).exp()).collect();
        let halved: Vec<f64> = ray.iter().map(|v| 0.5 * v).collect();
        let err = ball_lemma_check(&halved, &ray, &ray, 0.05, 300, 13).unwrap_err();
        match err {
            Error::HypothesisFailed { x, y, lhs, rhs } => {
                assert!(x > 0.0 && y > 0.0);
                assert!(lhs < rhs);
            }
            other => panic!("expected HypothesisFailed, got {other:?}"),
        }
    }

    #[test]
    fn pipeline_triple_satisfies_the_ball_lemma() {
        let spec = grid_1d(12.0, 769);
        let dual = grid_1d(6.0, 769);
        let f = sample::truncated_gaussian(spec.clone(), &[0.9], &[1.5], &[5.0])
            .expect("truncated gaussian");
        let plan = zero_plan(&spec, &dual);
        let split = lambda_split(&f, 0, 0.25).expect("split");
        let triple = pipeline_slice_triple(&f, split.plane, &plan).expect("triple");
        assert_eq!(triple.f1.len(), triple.f2.len());
        let report = ball_lemma_check(&triple.f0, &triple.f1, &triple.f2, triple.spacing, 400, 17)
            .expect("hypothesis");
        assert!(report.ok(), "lhs {} rhs {}", report.lhs, report.rhs);
    }

    #[test]
    fn ray_masses_of_an_even_function_mirror_bitwise() {
        let spec = grid_1d(8.0, 513);
        let f = sample::standard_gaussian(spec).expect("gaussian");
        let (plus, minus) = ray_masses(&f, Hyperplane::new(0, 0.0)).expect("rays");
        assert_eq!(plus.len(), 257);
        assert_eq!(plus.len(), minus.len());
        for (a, b) in plus.iter().zip(&minus) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn unconditional_gaussian_product_sits_at_the_bound() {
        let spec = grid_1d(8.0, 513);
        let dual = grid_1d(8.0, 513);
        let f = sample::standard_gaussian(spec.clone()).expect("gaussian");
        let plan = zero_plan(&spec, &dual);
        let report = unconditional_product_check(&f, &[0.0], &plan).expect("check");
        assert!(report.ok());
        assert!((report.ratio - 1.0).abs() < 2e-3, "ratio {}", report.ratio);
        assert_eq!(report.defects[0], 0.0);
    }

    #[test]
    fn unconditional_exponential_product_is_four() {
        let spec = grid_1d(200.0, 4097);
        let dual = grid_1d(2.0, 1025);
        let f = sample::laplace(spec.clone(), &[0.0], &[1.0]).expect("laplace");
        let plan = zero_plan(&spec, &dual);
        let report = unconditional_product_check(&f, &[0.0], &plan).expect("check");
        assert!(report.ok());
        assert!((report.product - 4.0).abs() < 0.1, "product {}", report.product);
        assert!(
            (report.ratio - 2.0 / core::f64::consts::PI).abs() < 0.01,
            "ratio {}",
            report.ratio
        );
    }

    #[test]
    fn unconditional_check_rejects_shifted_input() {
        let spec = grid_1d(10.0, 321);
        let dual = grid_1d(2.0, 129);
        let f = sample::laplace(spec.clone(), &[0.625], &[1.0]).expect("laplace");
        let plan = zero_plan(&spec, &dual);
        let err = unconditional_product_check(&f, &[0.0], &plan).unwrap_err();
        assert!(matches!(err, Error::NotUnconditional { axis: 0, .. }));
    }

    #[test]
    fn santalo_point_survives_polar_symmetrization() {
        let spec = GridSpec::cube(2, 6.0, 97).expect("grid");
        let dual = GridSpec::cube(2, 12.0, 97).expect("dual");
        let f = sample::gaussian(spec.clone(), &[0.4, 0.0], &[1.0, 0.8]).expect("gaussian");
        let plan = zero_plan(&spec, &dual);
        let subspace = AffineSubspace::full().and_fixed(1, 0.0).expect("subspace");
        let report = verify_santalo_invariance(&f, &subspace, Hyperplane::new(1, 0.0), &plan)
            .expect("invariance");
        assert!(report.ok(), "drift {} tol {}", report.drift, report.tol);
        assert!((report.z[0] - 0.4).abs() < 0.05);
        assert_eq!(report.z[1], 0.0);
    }

    #[test]
    fn polar_of_a_mirror_symmetric_function_is_exactly_symmetric() {
        let spec = GridSpec::cube(2, 6.0, 65).expect("grid");
        let dual = GridSpec::cube(2, 12.0, 65).expect("dual");
        let f = sample::gaussian(spec.clone(), &[0.375, 0.0], &[1.0, 0.8]).expect("gaussian");
        let plan = zero_plan(&spec, &dual);
        let defect =
            polar_symmetry_defect(&f, &[0.375, 0.0], Hyperplane::new(1, 0.0), &plan).expect("defect");
        assert_eq!(defect, 0.0);
    }

    #[test]
    fn run_pipeline_rejects_mismatched_plans() {
        let spec = grid_1d(8.0, 257);
        let other = grid_1d(7.0, 257);
        let dual = grid_1d(8.0, 257);
        let f = sample::standard_gaussian(spec).expect("gaussian");
        let plan = zero_plan(&other, &dual);
        let err = run_pipeline(&f, Hyperplane::new(0, 0.0), 0.5, &plan).unwrap_err();
        assert!(matches!(err, Error::PlanMismatch(_)));
    }
}
