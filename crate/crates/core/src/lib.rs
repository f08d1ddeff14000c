//! Exact computer algebra for fermionic field theory on finite models.
//!
//! Every structure is finite and every coefficient is a Gaussian rational, so each
//! algebraic identity is decided exactly rather than up to a tolerance.

pub mod car;
pub mod checks;
pub mod error;
pub mod functional;
pub mod functor;
pub mod graded;
pub mod grassmann;
pub mod reconstruct;
pub mod scalar;
pub mod verdict;
pub mod wick;

pub use error::{Error, Result};
pub use scalar::{ExactMatrix, GaussianRational, PsdVerdict, C, Q};
