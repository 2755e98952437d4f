//! Full-order model: finite-difference operators, the streamfunction solve,
//! the quasi-geostrophic right-hand side, and time integration.

pub mod integrate;
pub mod model;
pub mod poisson;
pub mod snapshots;
pub mod stencil;
