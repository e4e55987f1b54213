//! Seeded random families of log-concave test functions.
//!
//! Everything here is driven by a single 64-bit seed through ChaCha8, so a
//! corpus is reproducible across runs and machines with the same build.
//! Each draw is validated against the construction invariants plus two
//! batch-friendliness requirements — boundary decay (so conjugate windows
//! do not clip) and non-degenerate marginals (so mass splits exist along
//! every axis) — and redrawn on failure up to a fixed attempt cap.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::func::LogConcaveFnGrid;
use crate::grid::GridSpec;
#[cfg(not(feature = "std"))]
use crate::math::FloatExt;
use crate::sample;
use crate::santalo;

/// Redraws allowed per corpus entry before generation gives up.
const MAX_ATTEMPTS: usize = 64;

/// Largest admissible ratio of any boundary-node value to the peak value;
/// beyond this the grid window visibly truncates the function and
/// conjugate argmaxes start hitting the boundary.
const BOUNDARY_DECAY: f64 = 1e-5;

/// Generator families. `Mixed` draws each entry from one of the three
/// concrete families uniformly at random.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Axis-aligned Gaussians with random centers and widths; in dimension
    /// two and up, occasionally a correlated (rotated-spectrum) Gaussian.
    Gaussian,
    /// Separable exponential `exp(-sum r_k |x_k - c_k|)` truncated to a
    /// random box: kinks plus compact support.
    ExponentialBox,
    /// `exp(-phi)` for `phi(x) = max_j (<a_j, x> + b_j) + eps |x|^2`:
    /// polyhedral facets plus a coercive quadratic, `eps >= 1e-2`.
    PolyhedralQuadratic,
    /// Uniform mixture of the above.
    Mixed,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::ExponentialBox => "exponential-box",
            Family::PolyhedralQuadratic => "polyhedral-quadratic",
            Family::Mixed => "mixed",
        }
    }

    /// Inverse of [`Family::name`], for command-line front ends.
    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "gaussian" => Some(Family::Gaussian),
            "exponential-box" => Some(Family::ExponentialBox),
            "polyhedral-quadratic" => Some(Family::PolyhedralQuadratic),
            "mixed" => Some(Family::Mixed),
            _ => None,
        }
    }
}

/// One generated test function and where it came from.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    /// The concrete family of this entry (never `Mixed`).
    pub family: Family,
    /// Position within the generation run.
    pub index: usize,
    pub f: LogConcaveFnGrid,
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    // 53 uniform mantissa bits in [0, 1).
    ((rng.next_u64() >> 11) as f64) * (1.0 / 9007199254740992.0)
}

fn range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

fn axis_mid(spec: &GridSpec, k: usize) -> f64 {
    0.5 * (spec.axis(k).lo + spec.axis(k).hi)
}

fn axis_half(spec: &GridSpec, k: usize) -> f64 {
    0.5 * spec.axis(k).extent()
}

fn min_half(spec: &GridSpec) -> f64 {
    (0..spec.dim()).map(|k| axis_half(spec, k)).fold(f64::INFINITY, f64::min)
}

fn draw_gaussian(rng: &mut ChaCha8Rng, spec: &GridSpec) -> Result<LogConcaveFnGrid> {
    let d = spec.dim();
    let centered = (0..d).all(|k| axis_mid(spec, k).abs() <= 1e-12 * axis_half(spec, k));
    if d >= 2 && centered && unit(rng) < 0.4 {
        // Correlated Gaussian about the origin with a controlled spectrum:
        // directional standard deviations within [0.45, 1] of the safe
        // maximum, so the boundary-decay requirement holds by construction.
        let smax = 0.7 * min_half(spec) / 5.5;
        let a = random_spd(rng, d, 0.45 * smax, smax);
        return sample::gaussian_correlated(spec.clone(), &a);
    }
    let mut center = Vec::with_capacity(d);
    let mut sigma = Vec::with_capacity(d);
    for k in 0..d {
        let half = axis_half(spec, k);
        center.push(axis_mid(spec, k) + range(rng, -0.3, 0.3) * half);
        let smax = 0.7 * half / 5.5;
        sigma.push(range(rng, 0.45, 1.0) * smax);
    }
    sample::gaussian(spec.clone(), &center, &sigma)
}

/// A random symmetric positive-definite matrix `Q D Q^T` with eigenvalues
/// `1 / sigma^2` for `sigma` in `[sigma_lo, sigma_hi]`, `Q` a product of
/// random plane rotations. The lower triangle mirrors the upper bitwise.
fn random_spd(rng: &mut ChaCha8Rng, d: usize, sigma_lo: f64, sigma_hi: f64) -> Vec<f64> {
    let mut q = alloc::vec![0.0f64; d * d];
    for k in 0..d {
        q[k * d + k] = 1.0;
    }
    let rotate = |q: &mut [f64], i: usize, j: usize, theta: f64| {
        let (s, c) = (theta.sin(), theta.cos());
        for col in 0..d {
            let a = q[i * d + col];
            let b = q[j * d + col];
            q[i * d + col] = c * a - s * b;
            q[j * d + col] = s * a + c * b;
        }
    };
    for i in 0..d {
        for j in (i + 1)..d {
            let theta = range(rng, 0.0, core::f64::consts::PI);
            rotate(&mut q, i, j, theta);
        }
    }
    let eig: Vec<f64> = (0..d)
        .map(|_| {
            let s = range(rng, sigma_lo, sigma_hi);
            1.0 / (s * s)
        })
        .collect();
    let mut a = alloc::vec![0.0f64; d * d];
    for i in 0..d {
        for j in i..d {
            let mut v = 0.0;
            for k in 0..d {
                v += q[k * d + i] * eig[k] * q[k * d + j];
            }
            a[i * d + j] = v;
            a[j * d + i] = v;
        }
    }
    a
}

fn draw_exponential_box(rng: &mut ChaCha8Rng, spec: &GridSpec) -> Result<LogConcaveFnGrid> {
    let d = spec.dim();
    let mut center = Vec::with_capacity(d);
    let mut width = Vec::with_capacity(d);
    let mut rate = Vec::with_capacity(d);
    for k in 0..d {
        let half = axis_half(spec, k);
        center.push(axis_mid(spec, k) + range(rng, -0.2, 0.2) * half);
        let w = range(rng, 0.25, 0.55) * half;
        width.push(w);
        rate.push(range(rng, 1.0, 6.0) / w);
    }
    LogConcaveFnGrid::from_fn(spec.clone(), move |x| {
        let inside = (0..x.len()).all(|k| (x[k] - center[k]).abs() <= width[k]);
        if !inside {
            return 0.0;
        }
        let mut s = 0.0;
        for k in 0..x.len() {
            s += rate[k] * (x[k] - center[k]).abs();
        }
        (-s).exp()
    })
}

fn draw_polyhedral_quadratic(rng: &mut ChaCha8Rng, spec: &GridSpec) -> Result<LogConcaveFnGrid> {
    let d = spec.dim();
    let pieces = 2 + pick(rng, 4);
    let mut affine = Vec::with_capacity(pieces);
    for _ in 0..pieces {
        let a: Vec<f64> = (0..d).map(|_| range(rng, -1.5, 1.5)).collect();
        let b = range(rng, -1.0, 1.0);
        affine.push((a, b));
    }
    // The quadratic must outrun the worst slope so the function has decayed
    // by the boundary: eps * half^2 - 1.5 * half - 2 >= -ln(decay) at the
    // nearest face, with margin drawn on top.
    let half = min_half(spec);
    let eps = range(rng, 1.0, 1.6) * (14.0 + 1.5 * half) / (half * half);
    let mid: Vec<f64> = (0..d).map(|k| axis_mid(spec, k)).collect();
    LogConcaveFnGrid::from_fn(spec.clone(), move |x| {
        let mut best = f64::NEG_INFINITY;
        for (a, b) in &affine {
            let mut v = *b;
            for k in 0..x.len() {
                v += a[k] * (x[k] - mid[k]);
            }
            if v > best {
                best = v;
            }
        }
        let mut q = 0.0;
        for k in 0..x.len() {
            let t = x[k] - mid[k];
            q += t * t;
        }
        (-(best + eps * q)).exp()
    })
}

/// Peak-relative size of the largest value on the grid boundary.
fn boundary_ratio(f: &LogConcaveFnGrid) -> f64 {
    let spec = f.spec();
    let d = spec.dim();
    let mut worst = 0.0f64;
    for (idx, &v) in f.values().iter().enumerate() {
        let multi = spec.multi_index(idx);
        let on_boundary = (0..d).any(|k| multi[k] == 0 || multi[k] == spec.axis(k).count - 1);
        if on_boundary && v > worst {
            worst = v;
        }
    }
    worst / f.max_value()
}

fn admissible(f: &LogConcaveFnGrid) -> bool {
    if boundary_ratio(f) > BOUNDARY_DECAY {
        return false;
    }
    let Ok(mass) = f.integrate() else {
        return false;
    };
    if !(1e-6..=1e6).contains(&mass) {
        return false;
    }
    (0..f.spec().dim()).all(|k| santalo::lambda_split(f, k, 0.5).is_ok())
}

/// Draws `count` functions of `family` on `spec`, deterministically from
/// `seed`. Entries failing an invariant are redrawn; exceeding
/// [`MAX_ATTEMPTS`] redraws for a single entry is an error.
pub fn generate(
    spec: &GridSpec,
    family: Family,
    count: usize,
    seed: u64,
) -> Result<Vec<CorpusEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut attempts = 0;
        let entry = loop {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(Error::CorpusExhausted {
                    attempts: MAX_ATTEMPTS,
                });
            }
            let concrete = match family {
                Family::Mixed => match pick(&mut rng, 3) {
                    0 => Family::Gaussian,
                    1 => Family::ExponentialBox,
                    _ => Family::PolyhedralQuadratic,
                },
                other => other,
            };
            let drawn = match concrete {
                Family::Gaussian => draw_gaussian(&mut rng, spec),
                Family::ExponentialBox => draw_exponential_box(&mut rng, spec),
                Family::PolyhedralQuadratic => draw_polyhedral_quadratic(&mut rng, spec),
                Family::Mixed => unreachable!(),
            };
            if let Ok(f) = drawn {
                if admissible(&f) {
                    break CorpusEntry {
                        family: concrete,
                        index,
                        f,
                    };
                }
            }
        };
        out.push(entry);
    }
    Ok(out)
}
