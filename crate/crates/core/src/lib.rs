#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod condexp;
pub mod dist;
pub mod error;
pub mod gfun;
pub mod moments;
pub mod oracle;
pub mod params;
pub mod quad;
pub mod special;

pub use error::{Result, StableError};
