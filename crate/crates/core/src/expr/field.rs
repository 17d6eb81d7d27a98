//! Chart-bound scalar fields.

use std::fmt;

use super::chart::{ChartError, ChartPoint, CoordinateChart};
use super::eval::{EvalError, Evaluator};
use super::node::Expr;
use super::parse::{parse_expr, ParseError};
use crate::scalar::Scalar;

/// A scalar expression bound to the chart whose coordinates it references.
#[derive(Clone, Debug)]
pub struct ScalarField {
    expr: Expr,
    chart: CoordinateChart,
}

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum FieldError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("derivative order must be at least 1")]
    ZeroOrder,
    #[error("finite-difference step must be positive")]
    BadStep,
}

impl ScalarField {
    /// Wraps an expression; fails if it references coordinates the chart lacks.
    pub fn new(expr: Expr, chart: CoordinateChart) -> Result<Self, ChartError> {
        if let Some(i) = expr.max_var() {
            if i >= chart.len() {
                return Err(ChartError::UnknownCoordinate(format!("#{i}")));
            }
        }
        Ok(Self { expr, chart })
    }

    pub(crate) fn from_parts(expr: Expr, chart: CoordinateChart) -> Self {
        debug_assert!(expr.max_var().is_none_or(|i| i < chart.len()));
        Self { expr, chart }
    }

    pub fn parse(src: &str, chart: CoordinateChart) -> Result<Self, ParseError> {
        Ok(Self {
            expr: parse_expr(src, &chart)?,
            chart,
        })
    }

    pub fn constant(v: f64, chart: CoordinateChart) -> Self {
        Self::from_parts(Expr::constant(v), chart)
    }

    /// The coordinate function with flat index `index`.
    pub fn coordinate(index: usize, chart: CoordinateChart) -> Self {
        assert!(index < chart.len(), "coordinate index outside the chart");
        Self::from_parts(Expr::var(index), chart)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn into_expr(self) -> Expr {
        self.expr
    }

    pub fn chart(&self) -> CoordinateChart {
        self.chart
    }

    /// Partial derivative by coordinate name, e.g. `"p1"`.
    pub fn differentiate(&self, coord: &str, order: usize) -> Result<ScalarField, FieldError> {
        let index = self
            .chart
            .index_of(coord)
            .ok_or_else(|| ChartError::UnknownCoordinate(coord.to_string()))?;
        self.differentiate_index(index, order)
    }

    pub fn differentiate_index(&self, index: usize, order: usize) -> Result<ScalarField, FieldError> {
        if order == 0 {
            return Err(FieldError::ZeroOrder);
        }
        if index >= self.chart.len() {
            return Err(ChartError::UnknownCoordinate(format!("#{index}")).into());
        }
        Ok(Self::from_parts(self.expr.diff_n(index, order), self.chart))
    }

    /// First partial derivative by flat index; panics outside the chart.
    pub fn d(&self, index: usize) -> ScalarField {
        assert!(index < self.chart.len());
        Self::from_parts(self.expr.diff(index), self.chart)
    }

    pub fn evaluate<T: Scalar>(&self, pt: &ChartPoint<T>) -> Result<T, FieldError> {
        self.chart.ensure_same(&pt.chart())?;
        Ok(Evaluator::new(pt.coords()).eval(&self.expr)?)
    }

    /// `|∂f/∂c − (f(pt + h e_c) − f(pt − h e_c)) / 2h|` for every coordinate `c`.
    pub fn fd_gradient_check<T: Scalar>(&self, pt: &ChartPoint<T>, h: T) -> Result<Vec<T>, FieldError> {
        if !(h > T::zero()) {
            return Err(FieldError::BadStep);
        }
        self.chart.ensure_same(&pt.chart())?;
        (0..self.chart.len())
            .map(|c| {
                let exact = Evaluator::new(pt.coords()).eval(&self.expr.diff(c))?;
                let fwd = Evaluator::new(pt.shifted(c, h).coords()).eval(&self.expr)?;
                let bwd = Evaluator::new(pt.shifted(c, -h).coords()).eval(&self.expr)?;
                Ok((exact - (fwd - bwd) / (h + h)).abs())
            })
            .collect()
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let chart = self.chart;
        let names = move |i: usize| chart.name(i);
        write!(f, "{}", self.expr.display(&names))
    }
}
