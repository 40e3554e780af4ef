//! Integral-transform solvers for linear and semilinear Klein–Gordon
//! equations in de Sitter spacetime, with a numerical verification harness.

// `!(x > 0.0)` guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernels;
pub mod norms;
pub mod quadrature;
pub mod semilinear;
pub mod wave;
pub mod specfun;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
