//! Reverse-mode automatic differentiation with forward-mode tangents, plus
//! the optimizer and deterministic RNG used for network training.

pub mod adam;
pub mod dual;
pub mod graph;
pub mod rng;
pub mod tensor;
