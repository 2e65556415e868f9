//! Hyperbolic Gaussian analytic functions on the unit ball of `ℂⁿ`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caps;
pub mod error;
pub mod gaf;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod special;
pub mod stats;
pub mod zeros;

pub use caps::Caps;
pub use error::{GafError, Result};
