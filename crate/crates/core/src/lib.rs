//! Rothe-scheme solver for unsaturated flow with extended play-type capillary
//! hysteresis, written in the transformed unknowns `u = b(p)` and `v = S + u`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod constitutive;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod stepper;

pub use error::{HysteraError, Result};
