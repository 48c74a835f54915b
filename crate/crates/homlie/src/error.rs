//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("degree error: {0}")]
    DegreeError(String),

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("unknown variable: {0}")]
    UnknownVariable(String),

    #[error("endomorphism component {0} has a nonzero constant term")]
    NonzeroConstantTerm(usize),

    #[error("unknown operator: {0}")]
    UnknownOperator(String),

    #[error("parse error at {path}: {msg}")]
    Parse { path: String, msg: String },
}
