//! Convolutional autoencoder reduced-order model.
//!
//! [`arch`] lays out the mirrored encoder/decoder stack for a grid,
//! [`model`] holds parameters and runs forward passes, [`loss`] builds
//! training objectives and the reduced dynamics, and [`train`] runs the
//! optimization loop.

pub mod arch;
pub mod loss;
pub mod model;
pub mod train;
