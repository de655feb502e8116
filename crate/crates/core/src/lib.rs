//! Interior-point optimization over weighted sum-of-squares polynomial cones
//! in an interpolant basis.

pub mod cli;
pub mod cone;
pub mod error;
pub mod interpolation;
pub mod linalg;
pub mod problems;
pub mod recovery;
pub mod solver;

pub use error::{Error, Result};
