//! Point evaluation of expression DAGs.

use std::collections::HashMap;

use thiserror::Error;

use super::node::{Expr, Func, Kind, Node};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("domain violation: {function} applied to {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite intermediate value in {operation}")]
    NonFinite { operation: &'static str },
    #[error("coordinate index {index} outside a point of length {len}")]
    OutOfChart { index: usize, len: usize },
}

/// Evaluates many expressions at one point, sharing work across them.
///
/// Shared nodes are memoised by address for the lifetime of the evaluator,
/// which keeps evaluation linear in the size of the DAG rather than the tree.
pub struct Evaluator<'a, T> {
    point: &'a [T],
    // the Expr clone pins the node so its address cannot be reused
    memo: HashMap<*const Node, (Expr, T)>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(point: &'a [T]) -> Self {
        Self {
            point,
            memo: HashMap::new(),
        }
    }

    pub fn point(&self) -> &[T] {
        self.point
    }

    pub fn eval(&mut self, e: &Expr) -> Result<T, EvalError> {
        let shared = e.is_shared();
        if shared {
            if let Some((_, v)) = self.memo.get(&e.node_ptr()) {
                return Ok(*v);
            }
        }
        let v = self.eval_node(e)?;
        if shared {
            self.memo.insert(e.node_ptr(), (e.clone(), v));
        }
        Ok(v)
    }

    pub fn eval_all<'e>(&mut self, es: impl IntoIterator<Item = &'e Expr>) -> Result<Vec<T>, EvalError> {
        es.into_iter().map(|e| self.eval(e)).collect()
    }

    fn eval_node(&mut self, e: &Expr) -> Result<T, EvalError> {
        let v = match e.kind() {
            Kind::Const(c) => return Ok(T::lit(*c)),
            Kind::Var(i) => {
                return self.point.get(*i).copied().ok_or(EvalError::OutOfChart {
                    index: *i,
                    len: self.point.len(),
                })
            }
            Kind::Add(a, b) => finite(self.eval(a)? + self.eval(b)?, "addition")?,
            Kind::Sub(a, b) => finite(self.eval(a)? - self.eval(b)?, "subtraction")?,
            Kind::Mul(a, b) => finite(self.eval(a)? * self.eval(b)?, "multiplication")?,
            Kind::Div(a, b) => {
                let num = self.eval(a)?;
                let den = self.eval(b)?;
                if den == T::zero() {
                    return Err(EvalError::DivisionByZero);
                }
                finite(num / den, "division")?
            }
            Kind::Neg(a) => -self.eval(a)?,
            Kind::PowI(a, k) => {
                let base = self.eval(a)?;
                if base == T::zero() && *k < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                finite(base.powi(*k), "integer power")?
            }
            Kind::Pow(a, b) => {
                let base = self.eval(a)?;
                let exp = self.eval(b)?;
                if base < T::zero() && exp.fract() != T::zero() {
                    return Err(EvalError::Domain {
                        function: "pow",
                        value: base.to_f64_lossy(),
                    });
                }
                if base == T::zero() && exp < T::zero() {
                    return Err(EvalError::DivisionByZero);
                }
                finite(base.powf(exp), "power")?
            }
            Kind::Call(f, a) => {
                let x = self.eval(a)?;
                apply(*f, x)?
            }
        };
        Ok(v)
    }
}

fn finite<T: Scalar>(v: T, operation: &'static str) -> Result<T, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { operation })
    }
}

fn apply<T: Scalar>(f: Func, x: T) -> Result<T, EvalError> {
    let domain = |ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(EvalError::Domain {
                function: f.name(),
                value: x.to_f64_lossy(),
            })
        }
    };
    let v = match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Tan => {
            let c = x.cos();
            domain(c != T::zero())?;
            x.tan()
        }
        Func::Exp => x.exp(),
        Func::Log => {
            domain(x > T::zero())?;
            x.ln()
        }
        Func::Sqrt => {
            domain(x >= T::zero())?;
            x.sqrt()
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain {
            function: f.name(),
            value: x.to_f64_lossy(),
        })
    }
}

impl Expr {
    /// Evaluates with a throwaway [`Evaluator`].
    pub fn eval_at<T: Scalar>(&self, point: &[T]) -> Result<T, EvalError> {
        Evaluator::new(point).eval(self)
    }
}
