//! Named analytic families of log-concave densities sampled onto grids:
//! Gaussians (axis-aligned and correlated), Laplace exponentials, box
//! indicators, truncated quadratics and separable piecewise-linear
//! profiles. These are the building blocks for the random corpus and for
//! reference computations with closed-form answers.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::func::LogConcaveFnGrid;
use crate::grid::GridSpec;
#[cfg(not(feature = "std"))]
use crate::math::FloatExt;

fn check_dim(spec: &GridSpec, len: usize, what: &str) -> Result<()> {
    if len != spec.dim() {
        return Err(Error::BadArgument(format!(
            "{what}: expected {} entries for a {}-d grid, got {len}",
            spec.dim(),
            spec.dim()
        )));
    }
    Ok(())
}

/// `exp(-sum_k (x_k - c_k)^2 / (2 sigma_k^2))`, the axis-aligned Gaussian.
pub fn gaussian(spec: GridSpec, center: &[f64], sigma: &[f64]) -> Result<LogConcaveFnGrid> {
    check_dim(&spec, center.len(), "gaussian center")?;
    check_dim(&spec, sigma.len(), "gaussian sigma")?;
    for &s in sigma {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::BadArgument(format!("sigma must be positive, got {s}")));
        }
    }
    let c = center.to_vec();
    let s = sigma.to_vec();
    LogConcaveFnGrid::from_fn(spec, move |x| {
        let mut q = 0.0;
        for k in 0..x.len() {
            let d = (x[k] - c[k]) / s[k];
            q += d * d;
        }
        (-0.5 * q).exp()
    })
}

/// The standard Gaussian `exp(-|x|^2 / 2)`.
pub fn standard_gaussian(spec: GridSpec) -> Result<LogConcaveFnGrid> {
    let dim = spec.dim();
    gaussian(spec, &alloc::vec![0.0; dim], &alloc::vec![1.0; dim])
}

/// `exp(-x^T A x / 2)` for symmetric positive definite `A` (row-major,
/// `dim * dim` entries). Restrictions to grid lines are one-dimensional
/// quadratics, so the sampled profile stays exactly convex along lines.
pub fn gaussian_correlated(spec: GridSpec, inv_cov: &[f64]) -> Result<LogConcaveFnGrid> {
    let d = spec.dim();
    if inv_cov.len() != d * d {
        return Err(Error::BadArgument(format!(
            "inverse covariance needs {} entries, got {}",
            d * d,
            inv_cov.len()
        )));
    }
    for i in 0..d {
        for j in 0..i {
            if (inv_cov[i * d + j] - inv_cov[j * d + i]).abs()
                > 1e-12 * inv_cov[i * d + i].abs().max(1.0)
            {
                return Err(Error::BadArgument(String::from(
                    "inverse covariance must be symmetric",
                )));
            }
        }
    }
    if !sym_positive_definite(inv_cov, d) {
        return Err(Error::BadArgument(String::from(
            "inverse covariance must be positive definite",
        )));
    }
    let a = inv_cov.to_vec();
    LogConcaveFnGrid::from_fn(spec, move |x| {
        let mut q = 0.0;
        for i in 0..d {
            for j in 0..d {
                q += x[i] * a[i * d + j] * x[j];
            }
        }
        (-0.5 * q).exp()
    })
}

/// Leading-principal-minor test; enough for the 1x1 to 3x3 matrices the
/// grids allow.
fn sym_positive_definite(a: &[f64], d: usize) -> bool {
    match d {
        1 => a[0] > 0.0,
        2 => a[0] > 0.0 && a[0] * a[3] - a[1] * a[2] > 0.0,
        3 => {
            let m1 = a[0];
            let m2 = a[0] * a[4] - a[1] * a[3];
            let m3 = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6]);
            m1 > 0.0 && m2 > 0.0 && m3 > 0.0
        }
        _ => false,
    }
}

/// `exp(-sum_k rate_k |x_k - c_k|)`, the separable Laplace density.
pub fn laplace(spec: GridSpec, center: &[f64], rate: &[f64]) -> Result<LogConcaveFnGrid> {
    check_dim(&spec, center.len(), "laplace center")?;
    check_dim(&spec, rate.len(), "laplace rate")?;
    for &r in rate {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::BadArgument(format!("rate must be positive, got {r}")));
        }
    }
    let c = center.to_vec();
    let r = rate.to_vec();
    LogConcaveFnGrid::from_fn(spec, move |x| {
        let mut s = 0.0;
        for k in 0..x.len() {
            s += r[k] * (x[k] - c[k]).abs();
        }
        (-s).exp()
    })
}

/// The indicator of the box `prod_k [c_k - w_k, c_k + w_k]`: 1 inside
/// (boundary included), 0 outside. The box must contain at least one grid
/// node.
pub fn box_indicator(spec: GridSpec, center: &[f64], half_width: &[f64]) -> Result<LogConcaveFnGrid> {
    check_dim(&spec, center.len(), "box center")?;
    check_dim(&spec, half_width.len(), "box half-width")?;
    for &w in half_width {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::BadArgument(format!(
                "half-width must be positive, got {w}"
            )));
        }
    }
    let c = center.to_vec();
    let w = half_width.to_vec();
    LogConcaveFnGrid::from_fn(spec, move |x| {
        let inside = (0..x.len()).all(|k| (x[k] - c[k]).abs() <= w[k]);
        if inside {
            1.0
        } else {
            0.0
        }
    })
}

/// `exp(-q(x))` truncated to a box: the Gaussian-box hybrid
/// `exp(-sum_k (x_k - c_k)^2 / (2 sigma_k^2))` on `prod [c_k - w_k, c_k + w_k]`,
/// zero outside.
pub fn truncated_gaussian(
    spec: GridSpec,
    center: &[f64],
    sigma: &[f64],
    half_width: &[f64],
) -> Result<LogConcaveFnGrid> {
    check_dim(&spec, center.len(), "center")?;
    check_dim(&spec, sigma.len(), "sigma")?;
    check_dim(&spec, half_width.len(), "half-width")?;
    let c = center.to_vec();
    let s = sigma.to_vec();
    let w = half_width.to_vec();
    LogConcaveFnGrid::from_fn(spec, move |x| {
        let inside = (0..x.len()).all(|k| (x[k] - c[k]).abs() <= w[k]);
        if !inside {
            return 0.0;
        }
        let mut q = 0.0;
        for k in 0..x.len() {
            let d = (x[k] - c[k]) / s[k];
            q += d * d;
        }
        (-0.5 * q).exp()
    })
}

/// One separable profile coordinate: a convex piecewise-linear function
/// `t -> max_i (slope_i * (t - anchor) + intercept_i)`. A maximum of affine
/// pieces is exactly convex, also after rounding each piece to a double.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    pub anchor: f64,
    /// `(slope, intercept)` pairs; at least one.
    pub pieces: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn eval(&self, t: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for &(a, b) in &self.pieces {
            let v = a * (t - self.anchor) + b;
            if v > best {
                best = v;
            }
        }
        best
    }
}

/// `exp(-sum_k p_k(x_k))` for separable piecewise-linear convex profiles.
pub fn piecewise_linear_density(
    spec: GridSpec,
    profiles: &[PiecewiseLinear],
) -> Result<LogConcaveFnGrid> {
    check_dim(&spec, profiles.len(), "piecewise-linear profiles")?;
    for p in profiles {
        if p.pieces.is_empty() {
            return Err(Error::BadArgument(String::from(
                "piecewise-linear profile needs at least one piece",
            )));
        }
    }
    let ps = profiles.to_vec();
    LogConcaveFnGrid::from_fn(spec, move |x| {
        let mut s = 0.0;
        for k in 0..x.len() {
            s += ps[k].eval(x[k]);
        }
        (-s).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn standard_gaussian_peaks_at_one() {
        let f = standard_gaussian(GridSpec::cube(2, 6.0, 49).unwrap()).unwrap();
        assert_eq!(f.max_value(), 1.0);
    }

    #[test]
    fn correlated_gaussian_requires_spd() {
        let spec = GridSpec::cube(2, 6.0, 33).unwrap();
        assert!(gaussian_correlated(spec.clone(), &[1.0, 0.3, 0.3, 1.0]).is_ok());
        // Indefinite matrix: determinant negative.
        assert!(gaussian_correlated(spec.clone(), &[1.0, 2.0, 2.0, 1.0]).is_err());
        // Asymmetric matrix.
        assert!(gaussian_correlated(spec, &[1.0, 0.5, 0.2, 1.0]).is_err());
    }

    #[test]
    fn laplace_mass_1d_matches_closed_form() {
        // integral of exp(-|x|) over R is 2. On [-40, 40] the tails cut
        // ~8e-18, and the uniform-node sum telescopes to a geometric
        // series: mass = h * (2 / (1 - exp(-h)) - 1) = 2 + h^2/6 + O(h^4),
        // so the kink bias is h^2/6 and the h^2/4 bound has headroom.
        let spec = GridSpec::cube(1, 40.0, 1001).unwrap();
        let h: f64 = spec.axis(0).spacing();
        let f = laplace(spec, &[0.0], &[1.0]).unwrap();
        let mass = f.integrate().unwrap();
        assert!((mass - 2.0).abs() < h * h / 4.0, "mass = {mass}");
        assert!((mass - 2.0 - h * h / 6.0).abs() < h.powi(4), "mass = {mass}");
    }

    #[test]
    fn box_indicator_counts_nodes() {
        // Nodes at -2, -1, 0, 1, 2; the box [-1.5, 1.5] holds 3 of them,
        // h = 1, so the mass is exactly 3.
        let spec = GridSpec::cube(1, 2.0, 5).unwrap();
        let f = box_indicator(spec, &[0.0], &[1.5]).unwrap();
        assert_eq!(f.integrate().unwrap(), 3.0);
    }

    #[test]
    fn box_missing_every_node_is_rejected() {
        let spec = GridSpec::cube(1, 2.0, 5).unwrap();
        let err = box_indicator(spec, &[0.4], &[0.3]).unwrap_err();
        assert_eq!(err, crate::error::Error::AllInfinite);
    }

    #[test]
    fn piecewise_linear_density_is_log_concave() {
        let spec = GridSpec::cube(1, 5.0, 101).unwrap();
        let p = PiecewiseLinear {
            anchor: 0.5,
            pieces: vec![(-2.0, 0.0), (0.5, 0.1), (3.0, -1.0)],
        };
        // The constructor runs the log-concavity check; success is the test.
        let f = piecewise_linear_density(spec, &[p]).unwrap();
        assert!(f.integrate().unwrap() > 0.0);
    }

    #[test]
    fn truncated_gaussian_support_is_the_box() {
        let spec = GridSpec::cube(1, 4.0, 33).unwrap();
        let f = truncated_gaussian(spec, &[0.0], &[1.0], &[2.0]).unwrap();
        // Nodes outside |x| <= 2 carry zero.
        for (idx, &v) in f.values().iter().enumerate() {
            let x = f.spec().node_coords(idx)[0];
            if x.abs() > 2.0 + 1e-12 {
                assert_eq!(v, 0.0);
            } else {
                assert!(v > 0.0);
            }
        }
    }
}
