//! Free Dirac fields and the spinors among them whose energy-momentum tensor
//! vanishes identically ("ghost" spinors), plus the two-slit intensity model
//! built on products of real and shadow amplitudes.
//!
//! Module map:
//!
//! - [`dirac_algebra`]: gamma matrices, metric, bispinors.
//! - [`fieldexpr`]: closed-form real expressions of `x0..x3`, with exact
//!   symbolic differentiation.
//! - [`spinor_field`]: spinor fields, Dirac residual, current and tensor.
//! - [`ghost_classifier`]: structural and numerical ghost tests.
//! - [`interference`]: two-slit intensities with shadow factors.

pub mod dirac_algebra;
pub mod fieldexpr;
pub mod ghost_classifier;
pub mod interference;
pub mod spinor_field;
