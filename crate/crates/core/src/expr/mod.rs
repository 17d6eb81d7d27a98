//! Scalar-field expressions: parsing, exact differentiation, evaluation.

mod chart;
mod diff;
mod eval;
mod field;
mod matrix;
mod node;
mod parse;

pub use chart::{Bundle, ChartError, ChartPoint, CoordinateChart};
pub use eval::{EvalError, Evaluator};
pub use field::{FieldError, ScalarField};
pub use matrix::ExprMatrix;
pub use node::{DisplayExpr, Expr, Func};
pub use parse::{parse_expr, ParseError};
