//! Numerical construction of the three-dimensional Bryant steady gradient
//! Ricci soliton and residual checks of the curvature identities that hold
//! on it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod identities;
pub mod io;
pub mod jet;
pub mod poly;
pub mod profile;
pub mod psi;
pub mod quadrature;
pub mod report;
pub mod series;
pub mod solver;
pub mod suite;
pub mod system;

pub use error::{Error, Result};
