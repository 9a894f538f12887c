//! Continual supervised learning over streams of related regression tasks:
//! forward and backward knowledge transfer, their sample-complexity bounds,
//! and a reproducible experiment harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod environment;
pub mod error;
pub mod harness;
pub mod learner;
pub mod seed;
pub mod transfer;

pub use error::{Error, Result};
