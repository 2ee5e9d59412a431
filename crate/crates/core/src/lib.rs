//! Pseudo-spectral laboratory on the 2-torus for an iterative constructive
//! scheme for the surface quasi-geostrophic equation: spectral operators,
//! transport solvers, the Newton and oscillatory correction steps, error
//! assembly, and the log-parameter scheduler, each backed by operator-
//! identity verification suites.

pub mod divform;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod holder;
pub mod lp;
pub mod mollify;
pub mod multiplier;
pub mod profiles;
pub mod sqg;
pub mod tensor;
pub mod transport;

pub use error::{Result, SqgError};
pub use field::{ScalarField, VectorField};
pub use grid::TorusGrid;
pub use tensor::TensorField;
