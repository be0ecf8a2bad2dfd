//! Joint sparse support recovery from multiple measurement vectors with
//! M-SBL, together with the divergence, restricted-isometry and bound
//! computations that certify it, and a seeded Monte Carlo harness.
//!
//! Matrices are [`nalgebra::DMatrix<f64>`] (aliased as [`Matrix`]).

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod bounds;
pub mod cli;
pub mod divergence;
pub mod error;
pub mod experiments;
pub mod io;
pub mod matlib;
pub mod model;
pub mod rip;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use matlib::{Matrix, Vector};
