//! Numerical laboratory for weakly chaotic billiards.
//!
//! The crate covers the classical piston-force spectrum of a deformed
//! rectangle, the truncated-basis quantum perturbation matrix of the same
//! billiard, sparsity and resistor-network measures of that matrix, level and
//! intensity statistics, and the resulting energy absorption coefficients.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod measures;
pub mod quad;
pub mod quantum;
pub mod response;
pub mod scales;
pub mod stats;

pub use error::{Error, Result};
pub use scales::BilliardParams;
