//! Rule-based partial differentiation.

use super::node::{Expr, Func, Kind};

impl Expr {
    /// Exact partial derivative with respect to coordinate `index`.
    ///
    /// Results are memoised on the node, so asking twice (or reaching a shared
    /// subtree from two parents) returns the same result node.
    pub fn diff(&self, index: usize) -> Expr {
        if let Some(hit) = self
            .0
            .dcache
            .lock()
            .expect("derivative cache poisoned")
            .iter()
            .find(|(c, _)| *c == index)
        {
            return hit.1.clone();
        }
        let d = self.diff_uncached(index);
        let mut cache = self.0.dcache.lock().expect("derivative cache poisoned");
        if let Some(hit) = cache.iter().find(|(c, _)| *c == index) {
            // another thread got there first; keep its node so sharing holds
            return hit.1.clone();
        }
        cache.push((index, d.clone()));
        d
    }

    /// Repeated partial derivative of the given order.
    pub fn diff_n(&self, index: usize, order: usize) -> Expr {
        (0..order).fold(self.clone(), |e, _| e.diff(index))
    }

    fn diff_uncached(&self, c: usize) -> Expr {
        match self.kind() {
            Kind::Const(_) => Expr::zero(),
            Kind::Var(i) => {
                if *i == c {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Add(a, b) => a.diff(c) + b.diff(c),
            Kind::Sub(a, b) => a.diff(c) - b.diff(c),
            Kind::Neg(a) => -a.diff(c),
            Kind::Mul(a, b) => a.diff(c) * b + a * b.diff(c),
            Kind::Div(a, b) => {
                let da = a.diff(c);
                let db = b.diff(c);
                if db.is_zero() {
                    da / b
                } else {
                    (da * b - a * db) / Expr::powi(b, 2)
                }
            }
            Kind::PowI(a, k) => {
                let da = a.diff(c);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::constant(f64::from(*k)) * Expr::powi(a, k - 1) * da
            }
            Kind::Pow(a, b) => {
                let da = a.diff(c);
                let db = b.diff(c);
                let mut out = Expr::zero();
                if !da.is_zero() {
                    // b a^(b-1) a'
                    out = out + b * Expr::pow(a, &(b - 1.0)) * da;
                }
                if !db.is_zero() {
                    // a^b ln(a) b'
                    out = out + self * Expr::call(Func::Log, a) * db;
                }
                out
            }
            Kind::Call(f, a) => {
                let da = a.diff(c);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => -Expr::call(Func::Sin, a),
                    Func::Tan => Expr::one() + Expr::powi(self, 2),
                    Func::Exp => self.clone(),
                    Func::Log => return da / a,
                    Func::Sqrt => return da / (self * 2.0),
                };
                outer * da
            }
        }
    }
}
