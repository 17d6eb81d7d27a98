//! Expression DAG with light constant folding.
//!
//! Nodes are reference counted and immutable. Constructors fold constants and
//! drop additive zeros and multiplicative ones; nothing else is canonicalised.
//! Each node memoises its partial derivatives, so repeated differentiation of
//! shared subtrees reuses the same result nodes and the graph stays shared.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

/// Elementary functions accepted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Log, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub(crate) fn apply_f64(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug)]
pub(crate) enum Kind {
    Const(f64),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    PowI(Expr, i32),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

pub(crate) struct Node {
    pub(crate) kind: Kind,
    pub(crate) dcache: Mutex<Vec<(usize, Expr)>>,
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

/// A chart-agnostic scalar expression; coordinates are flat indices.
#[derive(Clone, Debug)]
pub struct Expr(pub(crate) Arc<Node>);

impl Expr {
    fn from_kind(kind: Kind) -> Self {
        Expr(Arc::new(Node {
            kind,
            dcache: Mutex::new(Vec::new()),
        }))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub(crate) fn node_ptr(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    pub(crate) fn is_shared(&self) -> bool {
        Arc::strong_count(&self.0) > 1
    }

    pub fn constant(v: f64) -> Self {
        Self::from_kind(Kind::Const(v))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The coordinate with flat index `index` (base coordinates first).
    pub fn var(index: usize) -> Self {
        Self::from_kind(Kind::Var(index))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.kind() {
            Kind::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x + y),
            (Some(x), _) if x == 0.0 => b.clone(),
            (_, Some(y)) if y == 0.0 => a.clone(),
            _ => Self::from_kind(Kind::Add(a.clone(), b.clone())),
        }
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        if a.ptr_eq(b) {
            return Expr::zero();
        }
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a.clone(),
            _ => Self::from_kind(Kind::Sub(a.clone(), b.clone())),
        }
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x * y),
            (Some(x), _) if x == 0.0 => Expr::zero(),
            (_, Some(y)) if y == 0.0 => Expr::zero(),
            (Some(x), _) if x == 1.0 => b.clone(),
            (_, Some(y)) if y == 1.0 => a.clone(),
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Self::from_kind(Kind::Mul(a.clone(), b.clone())),
        }
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
            (Some(x), _) if x == 0.0 => Expr::zero(),
            (_, Some(y)) if y == 1.0 => a.clone(),
            _ => Self::from_kind(Kind::Div(a.clone(), b.clone())),
        }
    }

    pub fn neg(a: &Expr) -> Expr {
        match a.kind() {
            Kind::Const(v) => Expr::constant(-v),
            Kind::Neg(inner) => inner.clone(),
            _ => Self::from_kind(Kind::Neg(a.clone())),
        }
    }

    pub fn powi(a: &Expr, k: i32) -> Expr {
        match (k, a.as_const()) {
            (0, _) => Expr::one(),
            (1, _) => a.clone(),
            (_, Some(v)) if v != 0.0 || k > 0 => Expr::constant(v.powi(k)),
            _ => Self::from_kind(Kind::PowI(a.clone(), k)),
        }
    }

    /// `a ^ b`; constant integral exponents become [`Expr::powi`].
    pub fn pow(a: &Expr, b: &Expr) -> Expr {
        if let Some(e) = b.as_const() {
            if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
                return Expr::powi(a, e as i32);
            }
            if let Some(base) = a.as_const() {
                let v = base.powf(e);
                if v.is_finite() {
                    return Expr::constant(v);
                }
            }
        }
        Self::from_kind(Kind::Pow(a.clone(), b.clone()))
    }

    pub fn call(f: Func, a: &Expr) -> Expr {
        if let Some(v) = a.as_const() {
            let r = f.apply_f64(v);
            if r.is_finite() {
                return Expr::constant(r);
            }
        }
        Self::from_kind(Kind::Call(f, a.clone()))
    }

    pub fn sum<'a>(terms: impl IntoIterator<Item = &'a Expr>) -> Expr {
        terms.into_iter().fold(Expr::zero(), |acc, t| Expr::add(&acc, t))
    }

    /// Replaces every coordinate `c` with `map(c)` when it returns `Some`.
    pub fn substitute(&self, map: &dyn Fn(usize) -> Option<Expr>) -> Expr {
        let mut memo = std::collections::HashMap::new();
        self.substitute_memo(map, &mut memo)
    }

    fn substitute_memo(
        &self,
        map: &dyn Fn(usize) -> Option<Expr>,
        memo: &mut std::collections::HashMap<*const Node, Expr>,
    ) -> Expr {
        if let Some(e) = memo.get(&self.node_ptr()) {
            return e.clone();
        }
        let out = match self.kind() {
            Kind::Const(_) => self.clone(),
            Kind::Var(i) => map(*i).unwrap_or_else(|| self.clone()),
            Kind::Add(a, b) => Expr::add(&a.substitute_memo(map, memo), &b.substitute_memo(map, memo)),
            Kind::Sub(a, b) => Expr::sub(&a.substitute_memo(map, memo), &b.substitute_memo(map, memo)),
            Kind::Mul(a, b) => Expr::mul(&a.substitute_memo(map, memo), &b.substitute_memo(map, memo)),
            Kind::Div(a, b) => Expr::div(&a.substitute_memo(map, memo), &b.substitute_memo(map, memo)),
            Kind::Neg(a) => Expr::neg(&a.substitute_memo(map, memo)),
            Kind::PowI(a, k) => Expr::powi(&a.substitute_memo(map, memo), *k),
            Kind::Pow(a, b) => Expr::pow(&a.substitute_memo(map, memo), &b.substitute_memo(map, memo)),
            Kind::Call(f, a) => Expr::call(*f, &a.substitute_memo(map, memo)),
        };
        memo.insert(self.node_ptr(), out.clone());
        out
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        let mut best = None;
        while let Some(e) = stack.pop() {
            if !seen.insert(e.node_ptr()) {
                continue;
            }
            match e.kind() {
                Kind::Const(_) => {}
                Kind::Var(i) => best = best.max(Some(*i)),
                Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) | Kind::Pow(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Kind::Neg(a) | Kind::PowI(a, _) | Kind::Call(_, a) => stack.push(a.clone()),
            }
        }
        best
    }

    /// Whether coordinate `index` appears anywhere in the expression.
    pub fn depends_on(&self, index: usize) -> bool {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.node_ptr()) {
                continue;
            }
            match e.kind() {
                Kind::Const(_) => {}
                Kind::Var(i) => {
                    if *i == index {
                        return true;
                    }
                }
                Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) | Kind::Pow(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Kind::Neg(a) | Kind::PowI(a, _) | Kind::Call(_, a) => stack.push(a.clone()),
            }
        }
        false
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.node_ptr()) {
                continue;
            }
            match e.kind() {
                Kind::Const(_) | Kind::Var(_) => {}
                Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) | Kind::Pow(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Kind::Neg(a) | Kind::PowI(a, _) | Kind::Call(_, a) => stack.push(a.clone()),
            }
        }
        seen.len()
    }

    /// Renders the expression with the given coordinate names.
    ///
    /// The output is fully parenthesised and re-parses to a tree that
    /// evaluates bit-identically.
    pub fn display<'a>(&'a self, names: &'a dyn Fn(usize) -> String) -> DisplayExpr<'a> {
        DisplayExpr { expr: self, names }
    }
}

pub struct DisplayExpr<'a> {
    expr: &'a Expr,
    names: &'a dyn Fn(usize) -> String,
}

impl fmt::Display for DisplayExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.names)
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v.is_sign_negative() {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, names: &dyn Fn(usize) -> String) -> fmt::Result {
    let bin = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr| -> fmt::Result {
        f.write_str("(")?;
        write_expr(f, a, names)?;
        write!(f, " {op} ")?;
        write_expr(f, b, names)?;
        f.write_str(")")
    };
    match e.kind() {
        Kind::Const(v) => write_const(f, *v),
        Kind::Var(i) => f.write_str(&names(*i)),
        Kind::Add(a, b) => bin(f, a, "+", b),
        Kind::Sub(a, b) => bin(f, a, "-", b),
        Kind::Mul(a, b) => bin(f, a, "*", b),
        Kind::Div(a, b) => bin(f, a, "/", b),
        Kind::Neg(a) => {
            f.write_str("(-")?;
            write_expr(f, a, names)?;
            f.write_str(")")
        }
        Kind::PowI(a, k) => {
            f.write_str("(")?;
            write_expr(f, a, names)?;
            if *k < 0 {
                write!(f, "^(-{}))", -(*k as i64))
            } else {
                write!(f, "^{k})")
            }
        }
        Kind::Pow(a, b) => bin(f, a, "^", b),
        Kind::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, names)?;
            f.write_str(")")
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $ctor:path) => {
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(self, rhs)
            }
        }
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(&self, &rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(&self, rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(self, &rhs)
            }
        }
        impl $trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $ctor(self, &Expr::constant(rhs))
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $ctor(&self, &Expr::constant(rhs))
            }
        }
    };
}

impl_binop!(Add, add, Expr::add);
impl_binop!(Sub, sub, Expr::sub);
impl_binop!(Mul, mul, Expr::mul);
impl_binop!(Div, div, Expr::div);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::constant(v)
    }
}
