//! Polar mass as a function of the center, its exact gradient, the
//! Santalo point, and mass-splitting hyperplanes.
//!
//! For `f = exp(-phi)` the polar about `z` has mass
//!
//! ```text
//! F(z) = integral of f^z = integral of exp(-(L phi)(u) + <z, u>) du
//! ```
//!
//! after the substitution `y = u + z`, where `L phi` is the plain
//! (zero-shift) Legendre transform. Discretized on a fixed dual `u`-grid,
//! `F` is a finite sum of exponentials in `z` — an entire function whose
//! gradient
//!
//! ```text
//! grad F(z) = sum of u * w_u,   w_u = h^n exp(-(L phi)(u) + <z, u>)
//! ```
//!
//! is available in closed form. This is the quantity the Santalo-point
//! search minimizes; its minimizer is the `z` at which the polar's
//! barycenter coincides with `z`. Note the quadrature nodes of `F(z)` are
//! the offset lattice `{u + z}`, which is what makes `F` smooth in `z`;
//! the classical polar on a fixed target grid ([`crate::legendre`])
//! agrees with it exactly at `z = 0` and up to `O(h^2)` elsewhere.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact::ExactSum;
use crate::func::{ConvexityCheck, LogConcaveFnGrid};
use crate::grid::{AffineSubspace, GridSpec, Hyperplane};
use crate::legendre::{legendre_profile, ConjugateDiagnostics};
#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::tol;

/// Armijo sufficient-decrease constant for the projected-gradient search.
const ARMIJO_C: f64 = 1e-4;
/// Backtracking shrink and growth factors for the step length.
const STEP_SHRINK: f64 = 0.5;
const STEP_GROW: f64 = 2.0;
/// Smallest step worth trying before declaring the iteration stalled.
const STEP_MIN: f64 = 1e-18;
const STEP_MAX: f64 = 1e6;

/// The sampled polar-mass function `z -> integral of f^z`: a fixed
/// Legendre transform on the dual grid plus a `z`-dependent exponential
/// reweighting.
#[derive(Debug, Clone)]
pub struct PolarMassModel {
    dual: GridSpec,
    psi: Vec<f64>,
    cell: f64,
    /// Per-axis node coordinates of the dual grid, cached for the hot
    /// evaluation loop.
    axis_nodes: Vec<Vec<f64>>,
}

impl PolarMassModel {
    /// Builds the model by one Legendre transform of `-log f` onto `dual`.
    pub fn new(
        f: &LogConcaveFnGrid,
        dual: GridSpec,
    ) -> Result<(Self, ConjugateDiagnostics)> {
        let (psi, diag) = legendre_profile(&f.neg_log(), dual.clone())?;
        let axis_nodes = (0..dual.dim()).map(|k| dual.axis(k).nodes()).collect();
        let cell = dual.cell_volume();
        Ok((
            PolarMassModel {
                dual,
                psi: psi.into_values(),
                cell,
                axis_nodes,
            },
            diag,
        ))
    }

    pub fn dual(&self) -> &GridSpec {
        &self.dual
    }

    /// The transform values `(L phi)(u)` on the dual grid.
    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    fn check_z(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dual.dim() || !z.iter().all(|v| v.is_finite()) {
            return Err(Error::BadArgument(alloc::format!(
                "center must be {} finite coordinates",
                self.dual.dim()
            )));
        }
        Ok(())
    }

    /// Walks every dual node once, handing `(u, weight)` to `visit` with
    /// `weight = exp(<z, u> - psi(u))`.
    fn for_each_weight(&self, z: &[f64], mut visit: impl FnMut(&[usize], f64)) {
        let d = self.dual.dim();
        let counts: Vec<usize> = (0..d).map(|k| self.dual.axis(k).count).collect();
        let mut multi = alloc::vec![0usize; d];
        for &psi in &self.psi {
            let mut dot = 0.0f64;
            for k in 0..d {
                dot += z[k] * self.axis_nodes[k][multi[k]];
            }
            let w = (dot - psi).exp();
            visit(&multi, w);
            for k in (0..d).rev() {
                multi[k] += 1;
                if multi[k] < counts[k] {
                    break;
                }
                multi[k] = 0;
            }
        }
    }

    /// `F(z)`: the polar mass, quadrature over the offset lattice
    /// `{u + z}` with the exact node sum of [`crate::exact`].
    pub fn mass(&self, z: &[f64]) -> Result<f64> {
        self.check_z(z)?;
        let mut sum = ExactSum::new();
        self.for_each_weight(z, |_, w| sum.add(w));
        let mass = sum.value() * self.cell;
        if !(mass >= tol::MASS_MIN && mass <= tol::MASS_MAX) {
            return Err(Error::MassOutOfRange {
                mass,
                lo: tol::MASS_MIN,
                hi: tol::MASS_MAX,
            });
        }
        Ok(mass)
    }

    /// `(F(z), grad F(z))` in one sweep. The gradient components are
    /// `h^n * sum of u_k * w_u` — the closed-form derivative of the finite
    /// exponential sum, exact up to quadrature-free roundoff.
    pub fn mass_and_gradient(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_z(z)?;
        let d = self.dual.dim();
        let mut sum = ExactSum::new();
        let mut gsums: Vec<ExactSum> = (0..d).map(|_| ExactSum::new()).collect();
        let nodes = &self.axis_nodes;
        self.for_each_weight(z, |multi, w| {
            sum.add(w);
            for k in 0..d {
                gsums[k].add(nodes[k][multi[k]] * w);
            }
        });
        let mass = sum.value() * self.cell;
        if !(mass >= tol::MASS_MIN && mass <= tol::MASS_MAX) {
            return Err(Error::MassOutOfRange {
                mass,
                lo: tol::MASS_MIN,
                hi: tol::MASS_MAX,
            });
        }
        let grad = gsums.iter().map(|s| s.value() * self.cell).collect();
        Ok((mass, grad))
    }

    /// Barycenter of the polar `f^z` (in `y`-coordinates, on the offset
    /// lattice): `z + grad F(z) / F(z)`. The Santalo point is its fixed
    /// point.
    pub fn polar_barycenter(&self, z: &[f64]) -> Result<Vec<f64>> {
        let (mass, grad) = self.mass_and_gradient(z)?;
        Ok(z.iter().zip(grad.iter()).map(|(zi, gi)| zi + gi / mass).collect())
    }

    /// The polar `f^z` as a grid function over the dual `u`-lattice (the
    /// node weights whose exact sum [`Self::mass`] rounds): value
    /// `exp(<z, u> - psi(u))` at node `u`, which is `f^z(u + z)`.
    pub fn polar_grid(&self, z: &[f64]) -> Result<LogConcaveFnGrid> {
        self.check_z(z)?;
        let mut vals = Vec::with_capacity(self.psi.len());
        self.for_each_weight(z, |_, w| vals.push(w));
        LogConcaveFnGrid::with_check(self.dual.clone(), vals, ConvexityCheck::Strict)
    }
}

/// Outcome of a Santalo-point search.
#[derive(Debug, Clone, PartialEq)]
pub struct SantaloResult {
    /// The minimizing center.
    pub z: Vec<f64>,
    /// The polar mass `F(z)` at the optimum.
    pub polar_mass: f64,
    /// Projected-gradient norm at the optimum.
    pub grad_norm: f64,
    /// Gradient evaluations spent.
    pub iterations: usize,
    /// False when the iteration cap was reached first; the best iterate is
    /// still returned.
    pub converged: bool,
}

fn clamp_to_box(z: &mut [f64], spec: &GridSpec) {
    for (k, v) in z.iter_mut().enumerate() {
        *v = v.clamp(spec.axis(k).lo, spec.axis(k).hi);
    }
}

fn norm(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for &x in v {
        s += x * x;
    }
    s.sqrt()
}

/// Minimizes the polar mass `F(z)` over `z` in the source grid's bounding
/// box intersected with `subspace`, by projected gradient descent with
/// Armijo backtracking. Starts from the barycenter of `f` projected onto
/// the feasible set. Hitting the iteration cap is reported, not an error.
pub fn santalo_point(
    f: &LogConcaveFnGrid,
    dual: GridSpec,
    subspace: &AffineSubspace,
) -> Result<SantaloResult> {
    let (model, _) = PolarMassModel::new(f, dual)?;
    santalo_point_with_model(f, &model, subspace)
}

/// As [`santalo_point`], reusing an already-built [`PolarMassModel`]
/// (the transform is the expensive part; searches over several subspaces
/// share it).
pub fn santalo_point_with_model(
    f: &LogConcaveFnGrid,
    model: &PolarMassModel,
    subspace: &AffineSubspace,
) -> Result<SantaloResult> {
    let spec = f.spec();
    for &(axis, v) in subspace.fixed() {
        if axis >= spec.dim() {
            return Err(Error::BadArgument(alloc::format!(
                "subspace axis {axis} out of range"
            )));
        }
        if v < spec.axis(axis).lo || v > spec.axis(axis).hi {
            return Err(Error::SubspaceOutsideSupport {
                point: alloc::vec![axis as f64, v],
            });
        }
    }

    let mut z = f.barycenter()?;
    subspace.project(&mut z);
    clamp_to_box(&mut z, spec);

    let (mut fval, mut grad) = model.mass_and_gradient(&z)?;
    let mut step = 1.0f64;
    let mut iterations = 1usize;
    let mut converged = false;
    let mut grad_norm;

    loop {
        // Project the gradient: fixed coordinates cannot move, and a
        // coordinate pinned at a box face with the gradient pushing
        // through the face contributes no feasible descent.
        let mut g = grad.clone();
        for &(axis, _) in subspace.fixed() {
            g[axis] = 0.0;
        }
        for k in 0..g.len() {
            let ax = spec.axis(k);
            if (z[k] <= ax.lo && g[k] > 0.0) || (z[k] >= ax.hi && g[k] < 0.0) {
                g[k] = 0.0;
            }
        }
        grad_norm = norm(&g);
        if grad_norm <= tol::TOL_GRAD * fval.max(tol::MASS_MIN) {
            converged = true;
            break;
        }
        if iterations >= tol::MAX_ITERS {
            break;
        }

        // Backtracking along the projection arc.
        let mut accepted = false;
        while step >= STEP_MIN {
            let mut trial: Vec<f64> = z.iter().zip(g.iter()).map(|(zi, gi)| zi - step * gi).collect();
            subspace.project(&mut trial);
            clamp_to_box(&mut trial, spec);
            let d: Vec<f64> = trial.iter().zip(z.iter()).map(|(t, zi)| t - zi).collect();
            let slope: f64 = grad.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
            if slope >= 0.0 {
                // No feasible descent direction left.
                break;
            }
            if let Ok((ft, gt)) = model.mass_and_gradient(&trial) {
                iterations += 1;
                if ft <= fval + ARMIJO_C * slope {
                    z = trial;
                    fval = ft;
                    grad = gt;
                    step = (step * STEP_GROW).min(STEP_MAX);
                    accepted = true;
                    break;
                }
            } else {
                iterations += 1;
            }
            step *= STEP_SHRINK;
        }
        if !accepted {
            // The step collapsed without progress: roundoff-limited
            // stationarity.
            converged = true;
            break;
        }
    }

    Ok(SantaloResult {
        z,
        polar_mass: fval,
        grad_norm,
        iterations,
        converged,
    })
}

/// A mass-splitting hyperplane: the node-aligned plane whose low-side mass
/// fraction (counting the cut slab at half weight) comes nearest the
/// requested `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSplit {
    pub plane: Hyperplane,
    pub requested: f64,
    /// Low-side mass fraction actually achieved; the high side is its
    /// exact complement. Downstream inequality factors `4 l (1 - l)` use
    /// this value, not the request.
    pub achieved: f64,
}

/// Finds the node along `axis` splitting the mass of `f` at fraction
/// `lambda` (0 < lambda < 1), with the cut slab shared half-half between
/// the sides. Errors with `DegenerateMarginal` when every candidate leaves
/// one side empty.
pub fn lambda_split(f: &LogConcaveFnGrid, axis: usize, lambda: f64) -> Result<LambdaSplit> {
    if !(lambda > 0.0 && lambda < 1.0) || !lambda.is_finite() {
        return Err(Error::BadArgument(alloc::format!(
            "lambda must lie strictly between 0 and 1, got {lambda}"
        )));
    }
    let spec = f.spec();
    let (slab_vals, total) = axis_slab_sums(f, axis)?;
    let count = spec.axis(axis).count;

    // lambda_minus(i) = (sum of slabs below i + slab_i / 2) / total, a
    // nondecreasing function of i; pick the nearest candidate.
    let mut below = ExactSum::new();
    let mut best_i = 0usize;
    let mut best_ach = f64::NAN;
    let mut best_err = f64::INFINITY;
    for i in 0..count {
        let mut num = below.clone();
        num.add(slab_vals[i] * 0.5);
        let ach = num.value() / total;
        let err = (ach - lambda).abs();
        if err < best_err {
            best_err = err;
            best_i = i;
            best_ach = ach;
        }
        below.add(slab_vals[i]);
    }
    if !(best_ach > 0.0 && best_ach < 1.0) {
        return Err(Error::DegenerateMarginal { axis });
    }
    Ok(LambdaSplit {
        plane: Hyperplane::new(axis, spec.axis(axis).node(best_i)),
        requested: lambda,
        achieved: best_ach,
    })
}

/// Exact slab sums of `f` along `axis`: `S_i = sum of f over the
/// hyperplane x_axis = node i`, plus their exact total. Errors with
/// `DegenerateMarginal` when the total vanishes.
pub(crate) fn axis_slab_sums(f: &LogConcaveFnGrid, axis: usize) -> Result<(Vec<f64>, f64)> {
    let spec = f.spec();
    if axis >= spec.dim() {
        return Err(Error::BadArgument(alloc::format!(
            "axis {axis} out of range for dim {}",
            spec.dim()
        )));
    }
    let count = spec.axis(axis).count;
    let stride = spec.stride(axis);
    let mut slabs: Vec<ExactSum> = (0..count).map(|_| ExactSum::new()).collect();
    for (idx, &v) in f.values().iter().enumerate() {
        let i = (idx / stride) % count;
        slabs[i].add(v);
    }
    let slab_vals: Vec<f64> = slabs.iter().map(|s| s.value()).collect();
    let total = crate::exact::exact_total(&slab_vals);
    if !(total > 0.0) {
        return Err(Error::DegenerateMarginal { axis });
    }
    Ok((slab_vals, total))
}

/// The low-side mass fraction of `f` at the node-aligned `plane`, with the
/// cut slab counted half — the lambda for which `plane` is
/// lambda-separating for `f`.
pub fn plane_lambda(f: &LogConcaveFnGrid, plane: Hyperplane) -> Result<f64> {
    let i = plane.node_index(f.spec())?;
    let (slab_vals, total) = axis_slab_sums(f, plane.axis)?;
    let mut below = ExactSum::new();
    for &s in slab_vals.iter().take(i) {
        below.add(s);
    }
    below.add(slab_vals[i] * 0.5);
    Ok(below.value() / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use alloc::vec;

    const SQRT_2PI: f64 = 2.5066282746310002;

    #[test]
    fn polar_mass_of_gaussian_matches_closed_form() {
        // For f = e^(-x^2/2), L phi = u^2/2 (up to the h^2/8 lattice lag)
        // and F(z) = integral e^(-u^2/2 + z u) du = sqrt(2 pi) e^(z^2/2).
        let spec = GridSpec::cube(1, 8.0, 1025).unwrap();
        let f = sample::standard_gaussian(spec.clone()).unwrap();
        let (model, diag) = PolarMassModel::new(&f, spec).unwrap();
        assert!(!diag.boundary_warning() || diag.boundary_hits == 2);
        for &z in &[0.0f64, 0.3, -1.1] {
            let want = SQRT_2PI * (0.5 * z * z).exp();
            let got = model.mass(&[z]).unwrap();
            assert!((got - want).abs() <= 1e-4 * want, "z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let spec = GridSpec::cube(2, 6.0, 65).unwrap();
        let f = sample::gaussian_correlated(spec.clone(), &[1.0, 0.35, 0.35, 0.8]).unwrap();
        let dual = GridSpec::cube(2, 6.0, 65).unwrap();
        let (model, _) = PolarMassModel::new(&f, dual).unwrap();
        let z = [0.21, -0.4];
        let (_, grad) = model.mass_and_gradient(&z).unwrap();
        let delta = 1e-5;
        for k in 0..2 {
            let mut zp = z;
            zp[k] += delta;
            let mut zm = z;
            zm[k] -= delta;
            let fd = (model.mass(&zp).unwrap() - model.mass(&zm).unwrap()) / (2.0 * delta);
            assert!(
                (fd - grad[k]).abs() <= 1e-6 * grad[k].abs().max(1.0),
                "axis {k}: fd {fd} vs grad {}",
                grad[k]
            );
        }
    }

    #[test]
    fn santalo_point_of_shifted_gaussian_is_its_center() {
        let spec = GridSpec::cube(1, 8.0, 513).unwrap();
        let f = sample::gaussian(spec.clone(), &[0.7], &[1.0]).unwrap();
        let res = santalo_point(&f, spec, &AffineSubspace::full()).unwrap();
        assert!(res.converged);
        assert!((res.z[0] - 0.7).abs() <= tol::TOL_POINT, "z = {}", res.z[0]);
        // At the Santalo point the polar mass is the Gaussian's own mass
        // (the Blaschke-Santalo equality case).
        assert!((res.polar_mass - SQRT_2PI).abs() <= 1e-3);
        // And the polar's barycenter sits at z itself.
        let (model, _) = PolarMassModel::new(&f, f.spec().clone()).unwrap();
        let bc = model.polar_barycenter(&res.z).unwrap();
        assert!((bc[0] - res.z[0]).abs() <= 1e-6);
    }

    #[test]
    fn santalo_point_respects_subspaces() {
        let spec = GridSpec::cube(2, 6.0, 65).unwrap();
        let f = sample::gaussian(spec.clone(), &[0.9, -0.7], &[1.0, 1.2]).unwrap();
        let sub = AffineSubspace::new(vec![(1, 0.25)]).unwrap();
        let res = santalo_point(&f, spec, &sub).unwrap();
        assert_eq!(res.z[1], 0.25);
        assert!((res.z[0] - 0.9).abs() <= 5e-3, "z0 = {}", res.z[0]);
    }

    #[test]
    fn lambda_split_of_symmetric_gaussian_is_exact_at_half() {
        let spec = GridSpec::cube(1, 8.0, 1025).unwrap();
        let f = sample::standard_gaussian(spec).unwrap();
        let s = lambda_split(&f, 0, 0.5).unwrap();
        assert_eq!(s.plane.offset, 0.0);
        // Mirror-equal slabs make the half-weight fraction exactly 1/2.
        assert_eq!(s.achieved, 0.5);
    }

    #[test]
    fn lambda_split_quartile_of_gaussian() {
        let spec = GridSpec::cube(1, 8.0, 1025).unwrap();
        let h: f64 = spec.axis(0).spacing();
        let f = sample::standard_gaussian(spec).unwrap();
        let s = lambda_split(&f, 0, 0.25).unwrap();
        // First quartile of the standard normal: -0.67449.
        assert!((s.plane.offset + 0.67449).abs() <= h, "offset {}", s.plane.offset);
        assert!((s.achieved - 0.25).abs() <= 0.01);
    }

    #[test]
    fn plane_lambda_agrees_with_split() {
        let spec = GridSpec::cube(1, 8.0, 513).unwrap();
        let f = sample::gaussian(spec.clone(), &[0.9], &[0.8]).unwrap();
        let s = lambda_split(&f, 0, 0.3).unwrap();
        let l = plane_lambda(&f, s.plane).unwrap();
        assert_eq!(l, s.achieved);
        let mid = plane_lambda(
            &sample::standard_gaussian(spec).unwrap(),
            Hyperplane::new(0, 0.0),
        )
        .unwrap();
        assert_eq!(mid, 0.5);
    }

    #[test]
    fn lambda_split_rejects_bad_lambda() {
        let spec = GridSpec::cube(1, 8.0, 65).unwrap();
        let f = sample::standard_gaussian(spec).unwrap();
        assert!(lambda_split(&f, 0, 0.0).is_err());
        assert!(lambda_split(&f, 0, 1.0).is_err());
        assert!(lambda_split(&f, 1, 0.5).is_err());
    }
}
