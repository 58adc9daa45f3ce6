pub mod cli;
pub mod error;
pub mod flag;
pub mod forms;
pub mod gradedaut;
pub mod int;
pub mod io;
pub mod matrix;
pub mod nilpotent;
pub mod pansu;
pub mod random;
pub mod rigidity;
pub mod scalar;
pub mod suite;

pub use error::{Error, Result};
pub use scalar::{Field, Rational, Scalar};
