//! Exact floating-point building blocks.
//!
//! Error-free transforms (`two_sum`, `two_prod`), Shewchuk-style expansion
//! accumulation, exact sign evaluation of small sums of doubles, and a
//! correctly-rounded sum. These give the rest of the crate two guarantees
//! that plain `f64` arithmetic cannot:
//!
//! * **Order-independent integration.** [`ExactSum`] accumulates any number
//!   of doubles exactly and rounds once, so a sum over permuted inputs is
//!   bit-identical — the property behind "symmetrization preserves mass
//!   exactly".
//! * **Stable maximizer selection.** Conjugate kernels compare candidate
//!   terms `x*y + g` through [`cmp_conj_terms`], which decides on the exact
//!   real values. Combined with the monotonicity of round-to-nearest, the
//!   rounding of the exact maximum equals the maximum of the rounded terms,
//!   so a fast path that locates the argmax by exact comparisons is
//!   bit-identical to a brute-force scan.
//!
//! All inputs are assumed finite with magnitudes at most ~1e300; infinities
//! are screened out by callers before reaching this module.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[cfg(not(feature = "std"))]
use crate::math::FloatExt;

/// Error-free sum: returns `(s, e)` with `s = fl(a + b)` and `a + b = s + e`
/// exactly (Knuth's branch-free TwoSum).
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    let e = (a - av) + (b - bv);
    (s, e)
}

/// Error-free product via FMA: returns `(p, e)` with `p = fl(a * b)` and
/// `a * b = p + e` exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// A small nonoverlapping expansion with components in increasing magnitude.
/// A zero-eliminated nonoverlapping f64 expansion has at most ~40 components
/// (one per disjoint 53-bit window of the exponent range), so 64 covers
/// every use in this crate, including rounding [`ExactSum`] partials.
#[derive(Clone, Copy)]
struct Expansion {
    comps: [f64; 64],
    len: usize,
}

impl Expansion {
    #[inline]
    fn new() -> Self {
        Expansion {
            comps: [0.0; 64],
            len: 0,
        }
    }

    /// Shewchuk's GROW-EXPANSION with zero elimination: adds one double
    /// while keeping the expansion sum exact and components nonoverlapping.
    #[inline]
    fn grow(&mut self, b: f64) {
        let mut q = b;
        let mut out = 0usize;
        for i in 0..self.len {
            let (s, e) = two_sum(q, self.comps[i]);
            if e != 0.0 {
                self.comps[out] = e;
                out += 1;
            }
            q = s;
        }
        if q != 0.0 || out == 0 {
            self.comps[out] = q;
            out += 1;
        }
        self.len = out;
        debug_assert!(self.len <= self.comps.len());
    }

    /// Sign of the exact sum: the largest-magnitude component dominates.
    #[inline]
    fn sign(&self) -> i8 {
        let top = self.comps[self.len - 1];
        if top > 0.0 {
            1
        } else if top < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Faithful approximation: summing from the smallest component up loses
    /// only bits below the ulp of the running sum.
    #[inline]
    fn approx(&self) -> f64 {
        let mut r = 0.0;
        for i in 0..self.len {
            r += self.comps[i];
        }
        r
    }
}

fn expansion_of(terms: &[f64]) -> Expansion {
    let mut e = Expansion::new();
    for &t in terms {
        e.grow(t);
    }
    e
}

/// Exact sign of `sum(terms)` over the reals. Inputs must be finite.
pub fn sign_of_sum(terms: &[f64]) -> i8 {
    expansion_of(terms).sign()
}

/// Correctly rounded (nearest, ties to even) value of `sum(terms)` over the
/// reals. Inputs must be finite with magnitude at most ~1e300 so that the
/// doubled comparison terms cannot overflow.
pub fn round_sum(terms: &[f64]) -> f64 {
    let e = expansion_of(terms);
    let r = e.approx();
    if !r.is_finite() {
        return r;
    }
    // r is faithful, so the correct rounding is r or an immediate neighbor.
    // Compare the exact sum against the midpoints on both sides, using the
    // exact sign of (2*sum - a - b) for midpoint (a + b) / 2.
    let up = r.next_up();
    let mut probe = Expansion::new();
    for i in 0..e.len {
        probe.grow(2.0 * e.comps[i]);
    }
    let mut upper = probe;
    upper.grow(-r);
    upper.grow(-up);
    match upper.sign() {
        1 => return up,
        0 => return if r.to_bits() & 1 == 0 { r } else { up },
        _ => {}
    }
    let down = r.next_down();
    let mut lower = probe;
    lower.grow(-r);
    lower.grow(-down);
    match lower.sign() {
        -1 => down,
        0 => {
            if r.to_bits() & 1 == 0 {
                r
            } else {
                down
            }
        }
        _ => r,
    }
}

/// Correctly rounded conjugate term `x * y + g`.
#[inline]
pub fn conj_term(x: f64, y: f64, g: f64) -> f64 {
    let (p, e) = two_prod(x, y);
    round_sum(&[p, e, g])
}

/// Exact ordering of the conjugate terms `xa * y + ga` and `xb * y + gb`.
#[inline]
pub fn cmp_conj_terms(xa: f64, ga: f64, xb: f64, gb: f64, y: f64) -> Ordering {
    let (pa, ea) = two_prod(xa, y);
    let (pb, eb) = two_prod(xb, y);
    match sign_of_sum(&[pa, ea, ga, -pb, -eb, -gb]) {
        1 => Ordering::Greater,
        -1 => Ordering::Less,
        _ => Ordering::Equal,
    }
}

/// Exact test that the slope of `g` does not increase across the triple
/// `(x0, g0), (x1, g1), (x2, g2)`:
/// `(g1 - g0) * (x2 - x1) >= (g2 - g1) * (x1 - x0)` with x0 < x1 < x2.
/// This is the discrete concavity predicate the monotone-argmax walk needs.
pub fn concave_triple(x0: f64, x1: f64, x2: f64, g0: f64, g1: f64, g2: f64) -> bool {
    // Expanded so every product is an exact two_prod; the g1*x1 terms cancel
    // symbolically and are omitted.
    let mut terms = [0.0f64; 12];
    let pairs = [
        (g1, x2),
        (-g0, x2),
        (g0, x1),
        (-g2, x1),
        (g2, x0),
        (-g1, x0),
    ];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let (p, e) = two_prod(a, b);
        terms[2 * k] = p;
        terms[2 * k + 1] = e;
    }
    sign_of_sum(&terms) >= 0
}

/// Exact accumulator for arbitrarily many doubles (the msum algorithm used
/// by Python's `math.fsum`): partial sums are kept as an exact decomposition
/// of the running total, and [`ExactSum::value`] rounds the true sum once.
/// The result is independent of insertion order.
#[derive(Clone, Debug, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum {
            partials: Vec::new(),
        }
    }

    pub fn add(&mut self, mut x: f64) {
        let mut kept = 0usize;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                core::mem::swap(&mut x, &mut y);
            }
            let (hi, lo) = two_sum(x, y);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    /// Correctly rounded value of the exact running sum.
    pub fn value(&self) -> f64 {
        if self.partials.iter().any(|p| !p.is_finite()) {
            return f64::NAN;
        }
        round_sum(&self.partials)
    }
}

/// Correctly rounded sum of a slice of any length (order-independent).
pub fn exact_total(values: &[f64]) -> f64 {
    let mut acc = ExactSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn two_sum_recovers_error() {
        let a = 1e16;
        let b = 1.0;
        let (s, e) = two_sum(a, b);
        assert_eq!(s, 1e16); // 1.0 is below the ulp of 1e16
        assert_eq!(e, 1.0);
    }

    #[test]
    fn two_prod_recovers_error() {
        let a = 1.0 + 2f64.powi(-30);
        let (p, e) = two_prod(a, a);
        // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60; the last bit is the error term.
        assert_eq!(p, 1.0 + 2f64.powi(-29));
        assert_eq!(e, 2f64.powi(-60));
    }

    #[test]
    fn sign_detects_tiny_differences() {
        // 0.1 + 0.2 - 0.3 is positive in exact double arithmetic.
        assert_eq!(sign_of_sum(&[0.1, 0.2, -0.3]), 1);
        assert_eq!(sign_of_sum(&[1e300, -1e300]), 0);
        assert_eq!(sign_of_sum(&[1.0, 1e-300, -1.0]), 1);
        assert_eq!(sign_of_sum(&[1.0, -1e-300, -1.0]), -1);
    }

    #[test]
    fn round_sum_is_correct_on_cancellation() {
        // Exact sum is 2^-60, representable, while naive summation returns 0.
        assert_eq!(round_sum(&[1e16, 2f64.powi(-60), -1e16]), 2f64.powi(-60));
        // A genuine tie: 1 + 2^-53 must round to even (stay at 1).
        assert_eq!(round_sum(&[1.0, 2f64.powi(-53)]), 1.0);
        // Just above the tie rounds up.
        assert_eq!(
            round_sum(&[1.0, 2f64.powi(-53), 2f64.powi(-80)]),
            1.0 + 2f64.powi(-52)
        );
        // Just below the tie rounds down.
        assert_eq!(round_sum(&[1.0, 2f64.powi(-53), -2f64.powi(-80)]), 1.0);
    }

    #[test]
    fn exact_sum_is_permutation_invariant() {
        let mut values = vec![1e100, 1.0, -1e100, 1e-30, 3.5, -7.25, 1e20, -1e20];
        let a = exact_total(&values);
        values.reverse();
        let b = exact_total(&values);
        values.swap(0, 3);
        let c = exact_total(&values);
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(a.to_bits(), c.to_bits());
        assert_eq!(a, 1.0 + 1e-30 + 3.5 - 7.25);
    }

    #[test]
    fn conj_term_matches_naive_when_safe() {
        // When no cancellation occurs the correctly rounded term coincides
        // with the naive evaluation.
        assert_eq!(conj_term(2.0, 3.0, 4.0), 10.0);
        assert_eq!(conj_term(0.0, 5.0, -1.5), -1.5);
    }

    #[test]
    fn cmp_conj_terms_resolves_ulp_ties() {
        // Terms that agree after rounding but differ in exact arithmetic:
        // xa*y = 1 + 2^-29 + 2^-60 exactly, gb is its rounded value.
        let y = 1.0 + 2f64.powi(-30);
        let (xa, ga) = (y, 0.0);
        let (xb, gb) = (0.0, xa * y);
        assert_eq!(xa * y + ga, xb * y + gb); // naive doubles cannot tell
        assert_eq!(cmp_conj_terms(xa, ga, xb, gb, y), Ordering::Greater);
        assert_eq!(cmp_conj_terms(xb, gb, xa, ga, y), Ordering::Less);
        assert_eq!(cmp_conj_terms(xa, ga, xa, ga, y), Ordering::Equal);
    }

    #[test]
    fn concave_triple_detects_exact_boundaries() {
        // Affine data: slopes equal, predicate holds (non-strict).
        assert!(concave_triple(0.0, 1.0, 2.0, 0.0, 1.0, 2.0));
        // Strictly concave.
        assert!(concave_triple(0.0, 1.0, 2.0, 0.0, 1.0, 1.5));
        // Strictly convex must fail.
        assert!(!concave_triple(0.0, 1.0, 2.0, 0.0, 1.0, 3.0));
        // Nonuniform spacing, slope comparison must use the exact products.
        assert!(concave_triple(0.0, 0.1, 0.30000000000000004, 0.0, 0.2, 0.4));
    }
}
