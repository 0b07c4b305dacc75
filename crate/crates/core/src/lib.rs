//! Neumann p-Laplace eigenvalues on planar domains written in Fermi coordinates.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod asymptotics;
pub mod config;
pub mod eig1d;
pub mod eig2d;
pub mod error;
pub mod expr;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod pquotient;
pub mod quadrature;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
