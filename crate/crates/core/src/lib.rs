//! Invariant metrics on model pseudoconvex domains.
//!
//! Closed-form and numerical Bergman kernels, the curvature invariants built
//! from them, extremal quantities, scaling frames at exponentially flat
//! boundary points and the Kobayashi squeeze brackets, plus a sweep harness.

// `!(x > 0.0)` range checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bergman;
pub mod error;
pub mod extremal;
pub mod frames;
pub mod geometry;
pub mod harness;
pub mod hartogs;
pub mod kobayashi;
pub mod linalg;
pub mod numeric;
pub mod profile;

pub use error::{LabError, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
