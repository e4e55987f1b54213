//! Grid calculus for log-concave functions.
//!
//! This crate implements a small numerical engine for the calculus of
//! log-concave functions `f = exp(-phi)` (with `phi` convex) sampled on
//! uniform tensor grids in dimension 1 to 3:
//!
//! * discrete Legendre (convex-conjugate) transforms about an arbitrary
//!   center, with a brute-force reference path and a fast monotone-argmax
//!   path that agree bit-for-bit ([`legendre`]),
//! * polar functions `f^z` and double polars ([`legendre::polar`]),
//! * functional Steiner symmetrization about node-aligned hyperplanes,
//!   Asplund (sup-convolution) products, lambda-homotheties and a
//!   Prekopa-type inequality check ([`steiner`]),
//! * Santalo-point optimization of `z -> integral(f^z)` over affine
//!   subspaces, and lambda-splitting hyperplanes ([`santalo`]),
//! * end-to-end verification pipelines for the volume-product inequalities
//!   the above machinery is built to test ([`verify`]), and
//! * a seeded corpus of log-concave test functions ([`corpus`]).
//!
//! # Layout
//!
//! | module      | contents                                                     |
//! |-------------|--------------------------------------------------------------|
//! | [`grid`]    | grid geometry, extended values, hyperplanes, subspaces        |
//! | [`func`]    | grid functions, quadrature, barycenter, symmetry defect       |
//! | [`sample`]  | closed-form expression families sampled onto grids            |
//! | [`legendre`]| conjugates, plans, polars                                     |
//! | [`steiner`] | rearrangement, symmetrization, Asplund product, homothety     |
//! | [`santalo`] | polar mass, gradient, Santalo point, lambda split             |
//! | [`verify`]  | lemma checkers, the symmetrization pipeline, report records   |
//! | [`corpus`]  | seeded random test-function families                          |
//!
//! # Numerical contract
//!
//! Quadrature is a uniform tensor-product rule evaluated with exact
//! (expansion-based) summation and a single correct rounding, so integrals
//! are deterministic and invariant under any permutation of node values —
//! the property that makes "symmetrization preserves mass bit-for-bit" a
//! theorem rather than an accident. Conjugate transforms select maximizers
//! with exact-arithmetic comparisons and round each selected value once;
//! see [`exact`] for the small toolkit this rests on.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable default
//! features and enable `libm` to build without the standard library.
#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("lcgrid requires either the `std` or the `libm` feature");

pub mod corpus;
pub mod error;
pub mod exact;
pub mod func;
pub mod grid;
pub mod legendre;
mod math;
pub mod sample;
pub mod santalo;
pub mod steiner;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use func::{ConvexFnGrid, LogConcaveFnGrid};
pub use grid::{AffineSubspace, AxisSpec, ExtendedValue, GridSpec, Hyperplane};
pub use legendre::ConjugatePlan;
pub use santalo::SantaloResult;
pub use verify::{
    ball_lemma_check, pipeline_slice_triple, polar_symmetry_defect, ray_masses, run_pipeline,
    slice_inequality_check, unconditional_product_check, verify_santalo_invariance,
    verify_separation_lemma, BallLemmaReport, CheckOutcome, InvarianceReport, PipelineReport,
    SeparationReport, SliceCheckReport, SliceSample, SliceTriple, StepRecord, UnconditionalReport,
};
