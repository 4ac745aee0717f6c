//! B-spline interpolation in Hilbert C*-modules over finite-dimensional
//! C*-algebras.

pub mod algebra;
pub mod catalog;
pub mod error;
pub mod forms;
pub mod hilbert_module;
pub mod linalg;
pub mod localization;
pub mod parallel;
pub mod problem;
pub mod random;
pub mod spline;

pub use error::{Error, Result};
