use alloc::boxed::Box;
use alloc::string::String;

use crate::dynamics::Divergence;
use crate::fixpoint::IterationFailure;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite sample at index {index} (row {row}, column {col})")]
    NonFinite { index: usize, row: usize, col: usize },
    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,
    #[error("order α = {0} outside (0, 2]")]
    OrderOutOfRange(f64),
    #[error("negative time t = {0}")]
    NegativeTime(f64),
    #[error("dyadic index j = {j} outside resolved range [{min}, {max}]")]
    BlockOutOfRange { j: i32, min: i32, max: i32 },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("geometric series needs {terms} terms, above the cap of {cap}")]
    SeriesTruncation { terms: u64, cap: u64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("trajectory is not periodic: residual {residual:e} above tolerance {tolerance:e}")]
    NotPeriodic { residual: f64, tolerance: f64 },
    #[error("solution diverged at t = {}: L2 norm {:e} against reference {:e}", .0.time, .0.norm, .0.reference)]
    Diverged(Box<Divergence>),
    #[error("iteration does not contract: {}", .0.report.reason.as_str())]
    NonContraction(Box<IterationFailure>),
    #[error("iteration aborted by stepper blow-up after {} steps", .0.report.records.len())]
    IterationBlowUp(Box<IterationFailure>),
}
