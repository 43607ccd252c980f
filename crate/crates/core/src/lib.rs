#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Normal-mode solver for a water column over a sediment layer.
//!
//! Each layer is discretized with its own Chebyshev–Gauss–Lobatto grid; the
//! two grids are coupled through pressure and normal-velocity continuity at
//! the interface. Boundary and interface rows are eliminated by a Schur
//! complement, leaving a dense interior eigenproblem whose eigenvalues are
//! the squared horizontal wavenumbers.

pub mod baselines;
pub mod cheb;
pub mod cli;
pub mod eigen;
pub mod env;
pub mod error;
pub mod field;
pub mod linalg;
pub mod modal;
pub mod specfun;

pub use error::{Error, Result};
