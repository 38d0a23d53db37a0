//! Spin-dependent photophysics of solid-state quantum emitters.

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod photonstats;
pub mod spin;
pub mod symmetry;

pub use error::{Error, Result};
