//! Reduced-order modeling workbench for two-dimensional quasi-geostrophic
//! flow.
//!
//! The crate simulates the vorticity form of the quasi-geostrophic equations
//! on a uniform grid, extracts proper-orthogonal-decomposition bases and
//! quadratic reduced models from snapshot data, trains convolutional
//! autoencoders (plain reconstruction or dynamics-aware) on the same data,
//! and scores every reduced model with shared projection and short-horizon
//! propagation diagnostics.
//!
//! Numerical kernels are generic over the scalar type through [`scalar::Real`]
//! so the same code instantiates at `f32` or `f64`; the type aliases at the
//! crate root fix the default double-precision build used by the command-line
//! tools.

// Stencil and linear-algebra kernels read most clearly with explicit index
// loops, and float guards are written `!(a > b)` on purpose so NaN falls
// into the rejecting branch.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ad;
pub mod ae;
pub mod error;
pub mod eval;
pub mod fom;
pub mod grid;
pub mod io;
pub mod pod;
pub mod scalar;

pub use error::{Error, Result};

/// Default-precision grid.
pub type Grid64 = grid::Grid<f64>;
/// Default-precision field.
pub type Field64 = grid::Field<f64>;
/// Default-precision snapshot trajectory.
pub type SnapshotSet64 = fom::snapshots::SnapshotSet<f64>;
/// Default-precision reduced basis.
pub type PodBasis64 = pod::basis::PodBasis<f64>;
/// Default-precision quadratic reduced model.
pub type QuadraticRom64 = pod::qrom::QuadraticRom<f64>;
