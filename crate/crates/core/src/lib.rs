//! Iterative graph normalization (IGN): a differentiable fixed-point iteration
//! that drives node weights to the indicator of a maximal independent set,
//! together with the reference algorithms and experiment drivers used to study it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod baselines;
pub mod dynamics;
pub mod error;
pub mod fixed_points;
pub mod format;
pub mod graph;
pub mod harness;
pub mod simplex;

pub use error::{Error, Result};
