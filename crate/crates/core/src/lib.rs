//! Numerical toolkit for rough paths.

pub mod cli;
pub mod error;
pub mod funcs;
pub mod integrate;
pub mod linalg;
pub mod oneform;
pub mod path;
pub mod rde;
pub mod report;
pub mod tensor;

pub use error::{Error, Result};
