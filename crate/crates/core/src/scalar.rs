//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over [`Real`], which is satisfied by
//! `f32` and `f64`. The shipped binaries and the regression suite pin `f64`
//! (see the aliases at the crate root); the generic layer exists so kernels
//! can be instantiated at other precisions without duplication.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + num_traits::ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant (rounds when `Self` is `f32`).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant must convert")
    }

    /// Converts a count to a scalar; exact for every count this crate meets.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count must convert")
    }

    /// Lossy view as f64 (exact when `Self` is `f64`), mostly for I/O.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
