//! Proper orthogonal decomposition and the Galerkin quadratic reduced model.

pub mod basis;
pub mod eigen;
pub mod qrom;
