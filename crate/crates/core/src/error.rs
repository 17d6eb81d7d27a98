use thiserror::Error;

use crate::expr::{ChartError, EvalError, FieldError, ParseError};

/// Crate-wide error for operations that combine parsing, charts and
/// point evaluation.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{source} at point {point:?}")]
    AtPoint { point: Vec<f64>, source: EvalError },
    #[error("{what} is singular at {point:?} (|det| = {det:e} below floor {floor:e})")]
    Singular {
        what: &'static str,
        point: Vec<f64>,
        det: f64,
        floor: f64,
    },
    #[error("Newton iteration did not converge at {point:?} after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        point: Vec<f64>,
        iterations: usize,
        residual: f64,
    },
    #[error("vector field is not J-regular: residual {residual:e} exceeds {tolerance:e}")]
    NotRegular { residual: f64, tolerance: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
}

impl From<FieldError> for Error {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Chart(c) => Error::Chart(c),
            FieldError::Eval(v) => Error::Eval(v),
            other => Error::Shape(other.to_string()),
        }
    }
}
