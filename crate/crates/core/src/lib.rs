//! Bell functionals of the `I_d` family, the `d × d` partial-transpose
//! invariant state family that violates them, and the optimizers used to
//! find the maximal violation.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command-line surface and parallel drivers live in the `ppt-bell` crate.
//!
//! Module map:
//!
//! * [`linalg`]: dense real kernels (Kronecker products, partial transpose,
//!   cyclic Jacobi eigensolver, spectral projectors).
//! * [`bell`]: Bell scenarios, sparse functionals, deterministic strategies
//!   and exact classical bounds by enumeration.
//! * [`model`]: simplex frame, measurement family, the 20-parameter state
//!   family, partial-transpose constraints and the Bell operator.
//! * [`analytic`]: closed-form quantum value, the reduced solution and the
//!   large-`d` asymptotic law.
//! * [`optimize`]: Nelder–Mead, a small primal–dual SDP solver and the
//!   seesaw loop.
#![no_std]
#![deny(unsafe_code)]
// `!(x <= tol)` is used on purpose so NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod bell;
mod error;
pub mod linalg;
pub mod model;
pub mod optimize;

pub use error::{Error, Result};
