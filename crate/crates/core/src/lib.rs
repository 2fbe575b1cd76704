// Negated float comparisons below deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod detection;
pub mod error;
mod fft;
pub mod field;
pub mod flow;
pub mod imgproc;
pub mod io;
pub mod synth;
pub mod transforms;

pub use error::{Error, Result};
