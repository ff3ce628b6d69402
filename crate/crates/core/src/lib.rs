#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod flow;
pub mod functional;
pub mod quadrature;
pub mod report;
pub mod shrinker;
pub mod stability;
pub mod surface;

pub use error::{Error, Result};
