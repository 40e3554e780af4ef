//! Special functions needed by the de Sitter kernels.

mod gamma;
mod hyp2f1;

pub use gamma::{digamma, gamma, gamma_real, rgamma};
pub use hyp2f1::{
    gauss_2f1, gauss_2f1_at_one, gauss_2f1_diff, gauss_2f1_diff_quotient, HypParams, INTEGER_TOL,
    MAX_TERMS, Z_SWITCH,
};

pub(crate) use hyp2f1::hyp2f1;
