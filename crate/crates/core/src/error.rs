//! Crate-wide error type.
//!
//! Variants split into two families that the CLI maps to exit codes:
//! *divergence* (a run blew up at runtime) and everything else
//! (configuration, validation, or I/O problems).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too small: {nx}x{ny} (need at least 3 points per axis)")]
    GridTooSmall { nx: usize, ny: usize },

    #[error("domain extents must be positive, got lx={lx}, ly={ly}")]
    BadExtents { lx: f64, ly: f64 },

    #[error("grid mismatch: {left_nx}x{left_ny} vs {right_nx}x{right_ny}")]
    GridMismatch { left_nx: usize, left_ny: usize, right_nx: usize, right_ny: usize },

    #[error("expected {expected} values for the grid, got {got}")]
    ValueCount { expected: usize, got: usize },

    #[error("{what}: expected length {expected}, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("RK4 stage {stage} produced a non-finite value")]
    RkDiverged { stage: u8 },

    #[error("integration blew up at t={time:.6}: max |value| = {max_abs:.3e} exceeds {threshold:.3e}")]
    BlowUp { time: f64, max_abs: f64, threshold: f64 },

    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    TrainDiverged { epoch: usize, batch: usize },

    #[error("non-finite values in {what}")]
    NonFiniteState { what: &'static str },

    #[error("requested order {requested} exceeds numerical rank; largest admissible order is {admissible}")]
    RankDeficient { requested: usize, admissible: usize },

    #[error("right-hand side is not quadratic: polarization residual {residual:.3e} exceeds {limit:.3e}")]
    NonQuadraticRhs { residual: f64, limit: f64 },

    #[error("degenerate input: {what}")]
    DegenerateInput { what: String },

    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    ShapeMismatch { op: &'static str, lhs: Vec<usize>, rhs: Vec<usize> },

    #[error("backward requires a scalar root, got shape {shape:?}")]
    NonScalarRoot { shape: Vec<usize> },

    #[error("batch must be nonempty")]
    EmptyBatch,

    #[error("batch misaligned: {states} states vs {rhs} rhs fields")]
    BatchMisaligned { states: usize, rhs: usize },

    #[error("{path}: {reason}")]
    FileFormat { path: String, reason: String },

    #[error("missing artifact: {path}")]
    MissingArtifact { path: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures caused by a run blowing up rather than by bad
    /// inputs; the CLI exits 1 for these and 2 for everything else.
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            Error::RkDiverged { .. }
                | Error::BlowUp { .. }
                | Error::TrainDiverged { .. }
                | Error::NonFiniteState { .. }
        )
    }
}
