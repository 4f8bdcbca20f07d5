//! Exact flag-algebra calculus for universal theories of bounded arity,
//! with finite-type exchangeable measures (step kernels) as the evaluation
//! oracle.

#![warn(missing_debug_implementations, rust_2018_idioms)]

mod error;
pub mod algebra;
pub mod flags;
pub mod io;
pub mod kernel;
pub mod model;
pub mod par;
pub mod presets;
pub mod rational;
pub mod selftest;
pub mod verify;

pub use error::{Error, Result};
