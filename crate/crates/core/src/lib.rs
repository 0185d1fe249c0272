//! Numerical laboratory for conformally covariant powers of the Dirac operator.
//!
//! Everything is evaluated pointwise on truncated Taylor expansions ([`jet::Jet`])
//! of analytic metrics and fields, so every differential identity can be checked
//! to rounding error at a base point.

#![allow(clippy::needless_range_loop)]

pub mod bundle;
pub mod chart;
pub mod clifford;
pub mod confpower;
pub mod curvature;
pub mod error;
pub mod field;
pub mod harness;
pub mod jet;
pub mod spinor;
pub mod tensor;
pub mod tractor;

pub use error::{LabError, Result};
