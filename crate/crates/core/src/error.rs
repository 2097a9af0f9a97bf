use thiserror::Error;

use crate::label::SpaceLabel;

/// Errors raised by the operator calculus, the process constructors and the
/// classification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label {0} appears more than once")]
    DuplicateLabel(SpaceLabel),
    #[error("label {0} is not present on the operator")]
    LabelNotFound(SpaceLabel),
    #[error("requested order is not a permutation of the operator labels")]
    BadPermutation,
    #[error("invalid label {0}: time and dimension must be positive")]
    InvalidLabel(SpaceLabel),
    #[error("matrix is {rows}x{cols} but the labels require side {expected}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("operator is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("operands are defined on different label lists")]
    LabelMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("operator is not a unit-trace state: {0}")]
    NotAState(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("channel is not completely positive and trace preserving: {0}")]
    NotCptp(String),
    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),
    #[error("invalid weights: {0}")]
    BadWeights(String),
    #[error("component {index} is not memoryless (trace-norm distance {distance:e} to its marginal product)")]
    ComponentNotMemoryless { index: usize, distance: f64 },
    #[error("assembled operator violates the causality chain (max residual {residual:e})")]
    NotCausal { residual: f64 },
    #[error("extracted channel for branch {index} is not CPTP: {reason}")]
    NotCptpSlice { index: usize, reason: String },
    #[error("invalid process structure: {0}")]
    InvalidProcess(String),
    #[error("invalid time index: {0}")]
    InvalidTime(String),
    #[error("no conic solver backend is registered")]
    SolverUnavailable,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
