// `!(x > 0.0)` is the NaN-rejecting form used for every domain check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
mod fftgrid;
pub mod interp;
pub mod kernel;
pub mod quad;
pub mod renewal;
pub mod simulator;
pub mod specialfn;
pub mod verify;

pub use error::{Error, Result};
