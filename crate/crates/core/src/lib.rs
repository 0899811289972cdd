// `!(x >= a)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod charsums;
pub mod chromatic;
pub mod circle;
pub mod energy;
pub mod error;
pub mod extremal;
pub mod gauss;

pub use error::{Error, Result};
