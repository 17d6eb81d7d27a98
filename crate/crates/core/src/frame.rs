//! Coordinate calculus on the `2n`-dimensional phase chart.
//!
//! Vector fields, 1-forms and (1,1)-tensors are stored as expressions in the
//! coordinate frame `(∂/∂x^1..∂/∂x^n, ∂/∂p_1..∂/∂p_n)`. A (1,1)-tensor `A`
//! acts by `(A·X)^a = A^a_b X^b`, i.e. column `b` of the matrix is `A(∂_b)`.
//!
//! The intrinsic operations here (Lie bracket, Lie derivative, the
//! Frölicher–Nijenhuis bracket of two (1,1)-tensors and the Nijenhuis tensor)
//! are the reference against which coordinate closed forms elsewhere in the
//! crate are compared.

use crate::expr::{ChartError, ChartPoint, CoordinateChart, EvalError, Evaluator, Expr, ExprMatrix, ScalarField};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// A vector field `ξ^i ∂/∂x^i + χ_i ∂/∂p_i` on a phase chart.
#[derive(Clone, Debug)]
pub struct PhaseVectorField {
    chart: CoordinateChart,
    comps: Vec<Expr>,
}

impl PhaseVectorField {
    /// Builds a field from its `2n` components in flat coordinate order.
    pub fn new(chart: CoordinateChart, comps: Vec<ScalarField>) -> Result<Self, ChartError> {
        if comps.len() != chart.len() {
            return Err(ChartError::WrongLength {
                expected: chart.len(),
                found: comps.len(),
            });
        }
        for c in &comps {
            chart.ensure_same(&c.chart())?;
        }
        Ok(Self {
            chart,
            comps: comps.into_iter().map(ScalarField::into_expr).collect(),
        })
    }

    /// Builds `ξ^i ∂/∂x^i + χ_i ∂/∂p_i` from its base and fiber parts.
    pub fn from_split(chart: CoordinateChart, xi: Vec<ScalarField>, chi: Vec<ScalarField>) -> Result<Self, ChartError> {
        let mut comps = xi;
        comps.extend(chi);
        Self::new(chart, comps)
    }

    pub(crate) fn from_exprs(chart: CoordinateChart, comps: Vec<Expr>) -> Self {
        debug_assert_eq!(comps.len(), chart.len());
        Self { chart, comps }
    }

    pub fn zero(chart: CoordinateChart) -> Self {
        Self::from_exprs(chart, vec![Expr::zero(); chart.len()])
    }

    /// The coordinate frame field `∂/∂c_index`.
    pub fn coordinate(chart: CoordinateChart, index: usize) -> Self {
        assert!(index < chart.len());
        let comps = (0..chart.len())
            .map(|a| if a == index { Expr::one() } else { Expr::zero() })
            .collect();
        Self::from_exprs(chart, comps)
    }

    /// All `2n` coordinate frame fields in flat order.
    pub fn coordinate_frame(chart: CoordinateChart) -> Vec<Self> {
        (0..chart.len()).map(|a| Self::coordinate(chart, a)).collect()
    }

    pub fn chart(&self) -> CoordinateChart {
        self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, a: usize) -> ScalarField {
        ScalarField::from_parts(self.comps[a].clone(), self.chart)
    }

    /// Base components `ξ^i`.
    pub fn xi(&self) -> &[Expr] {
        &self.comps[..self.chart.dim()]
    }

    /// Fiber components `χ_i`.
    pub fn chi(&self) -> &[Expr] {
        &self.comps[self.chart.dim()..]
    }

    /// Directional derivative `X(f) = X^a ∂f/∂c_a`.
    pub fn derive(&self, f: &Expr) -> Expr {
        let terms: Vec<Expr> = self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(a, c)| c * f.diff(a))
            .collect();
        Expr::sum(&terms)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.chart, other.chart);
        Self::from_exprs(self.chart, self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.chart, other.chart);
        Self::from_exprs(self.chart, self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect())
    }

    /// Pointwise product `f X`.
    pub fn scale(&self, f: &Expr) -> Self {
        Self::from_exprs(self.chart, self.comps.iter().map(|c| f * c).collect())
    }

    pub fn neg(&self) -> Self {
        Self::from_exprs(self.chart, self.comps.iter().map(|c| -c).collect())
    }

    pub fn eval<T: Scalar>(&self, ev: &mut Evaluator<'_, T>) -> Result<Vec<T>, EvalError> {
        ev.eval_all(&self.comps)
    }

    pub fn evaluate<T: Scalar>(&self, pt: &ChartPoint<T>) -> Result<Vec<T>, EvalError> {
        self.eval(&mut Evaluator::new(pt.coords()))
    }
}

/// `[X, Y]^a = X^b ∂Y^a/∂c_b − Y^b ∂X^a/∂c_b`.
pub fn lie_bracket(x: &PhaseVectorField, y: &PhaseVectorField) -> Result<PhaseVectorField, ChartError> {
    x.chart.ensure_same(&y.chart)?;
    Ok(bracket(x, y))
}

pub(crate) fn bracket(x: &PhaseVectorField, y: &PhaseVectorField) -> PhaseVectorField {
    let comps = (0..x.chart.len())
        .map(|a| x.derive(&y.comps[a]) - y.derive(&x.comps[a]))
        .collect();
    PhaseVectorField::from_exprs(x.chart, comps)
}

/// A 1-form `φ_a dc^a` on a phase chart.
#[derive(Clone, Debug)]
pub struct OneForm {
    chart: CoordinateChart,
    comps: Vec<Expr>,
}

impl OneForm {
    pub fn new(chart: CoordinateChart, comps: Vec<ScalarField>) -> Result<Self, ChartError> {
        if comps.len() != chart.len() {
            return Err(ChartError::WrongLength {
                expected: chart.len(),
                found: comps.len(),
            });
        }
        for c in &comps {
            chart.ensure_same(&c.chart())?;
        }
        Ok(Self {
            chart,
            comps: comps.into_iter().map(ScalarField::into_expr).collect(),
        })
    }

    pub(crate) fn from_exprs(chart: CoordinateChart, comps: Vec<Expr>) -> Self {
        debug_assert_eq!(comps.len(), chart.len());
        Self { chart, comps }
    }

    /// The coordinate coframe form `dc^index`.
    pub fn coordinate(chart: CoordinateChart, index: usize) -> Self {
        let comps = (0..chart.len())
            .map(|a| if a == index { Expr::one() } else { Expr::zero() })
            .collect();
        Self::from_exprs(chart, comps)
    }

    pub fn chart(&self) -> CoordinateChart {
        self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// Contraction `φ(X) = φ_a X^a`.
    pub fn contract(&self, x: &PhaseVectorField) -> Expr {
        let terms: Vec<Expr> = self.comps.iter().zip(&x.comps).map(|(a, b)| a * b).collect();
        Expr::sum(&terms)
    }

    pub fn eval<T: Scalar>(&self, ev: &mut Evaluator<'_, T>) -> Result<Vec<T>, EvalError> {
        ev.eval_all(&self.comps)
    }
}

/// A (1,1)-tensor field as a `2n × 2n` matrix in the coordinate frame.
#[derive(Clone, Debug)]
pub struct FullTensor11 {
    chart: CoordinateChart,
    m: ExprMatrix,
}

impl FullTensor11 {
    pub fn new(chart: CoordinateChart, m: ExprMatrix) -> Result<Self, ChartError> {
        if m.rows() != chart.len() || m.cols() != chart.len() {
            return Err(ChartError::WrongLength {
                expected: chart.len(),
                found: m.rows().max(m.cols()),
            });
        }
        if let Some(i) = m.entries().iter().filter_map(Expr::max_var).max() {
            if i >= chart.len() {
                return Err(ChartError::UnknownCoordinate(format!("#{i}")));
            }
        }
        Ok(Self { chart, m })
    }

    pub(crate) fn from_matrix(chart: CoordinateChart, m: ExprMatrix) -> Self {
        debug_assert_eq!(m.rows(), chart.len());
        Self { chart, m }
    }

    pub fn identity(chart: CoordinateChart) -> Self {
        Self::from_matrix(chart, ExprMatrix::identity(chart.len()))
    }

    pub fn zero(chart: CoordinateChart) -> Self {
        Self::from_matrix(chart, ExprMatrix::zeros(chart.len(), chart.len()))
    }

    /// Tensor whose column `b` is `cols[b] = A(∂_b)`.
    pub fn from_columns(chart: CoordinateChart, cols: &[PhaseVectorField]) -> Self {
        assert_eq!(cols.len(), chart.len());
        Self::from_matrix(
            chart,
            ExprMatrix::from_fn(chart.len(), chart.len(), |a, b| cols[b].comps[a].clone()),
        )
    }

    pub fn chart(&self) -> CoordinateChart {
        self.chart
    }

    pub fn matrix(&self) -> &ExprMatrix {
        &self.m
    }

    /// `A^a_b`.
    pub fn entry(&self, a: usize, b: usize) -> &Expr {
        self.m.get(a, b)
    }

    /// `A(∂_b)`.
    pub fn column(&self, b: usize) -> PhaseVectorField {
        PhaseVectorField::from_exprs(self.chart, (0..self.chart.len()).map(|a| self.m.get(a, b).clone()).collect())
    }

    pub fn apply(&self, x: &PhaseVectorField) -> PhaseVectorField {
        debug_assert_eq!(self.chart, x.chart);
        let n2 = self.chart.len();
        let comps = (0..n2)
            .map(|a| {
                let terms: Vec<Expr> = (0..n2).map(|b| self.m.get(a, b) * &x.comps[b]).collect();
                Expr::sum(&terms)
            })
            .collect();
        PhaseVectorField::from_exprs(self.chart, comps)
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.chart, other.chart);
        Self::from_matrix(self.chart, self.m.matmul(&other.m))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_matrix(self.chart, self.m.zip_with(&other.m, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_matrix(self.chart, self.m.zip_with(&other.m, |a, b| a - b))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_matrix(self.chart, self.m.map(|a| a * s))
    }

    pub fn neg(&self) -> Self {
        Self::from_matrix(self.chart, self.m.map(|a| -a))
    }

    pub fn eval<T: Scalar>(&self, ev: &mut Evaluator<'_, T>) -> Result<Mat<T>, EvalError> {
        self.m.eval(ev)
    }

    pub fn evaluate<T: Scalar>(&self, pt: &ChartPoint<T>) -> Result<Mat<T>, EvalError> {
        self.eval(&mut Evaluator::new(pt.coords()))
    }
}

/// `(L_X A)(Y) = [X, A Y] − A[X, Y]`, assembled column by column.
pub fn lie_derivative_tensor11(x: &PhaseVectorField, a: &FullTensor11) -> Result<FullTensor11, ChartError> {
    x.chart.ensure_same(&a.chart)?;
    Ok(lie_derivative(x, a))
}

pub(crate) fn lie_derivative(x: &PhaseVectorField, a: &FullTensor11) -> FullTensor11 {
    let chart = x.chart;
    let cols: Vec<PhaseVectorField> = PhaseVectorField::coordinate_frame(chart)
        .iter()
        .map(|e| bracket(x, &a.apply(e)).sub(&a.apply(&bracket(x, e))))
        .collect();
    FullTensor11::from_columns(chart, &cols)
}

/// How a [`VectorValued2Form`] is defined.
#[derive(Clone, Debug)]
pub enum TwoFormRecipe {
    /// Frölicher–Nijenhuis bracket `[L, K]` of two (1,1)-tensors.
    FnBracket(FullTensor11, FullTensor11),
    /// Nijenhuis tensor `N_L`.
    Nijenhuis(FullTensor11),
}

/// A vector-valued 2-form evaluated on demand against concrete fields.
#[derive(Clone, Debug)]
pub struct VectorValued2Form {
    chart: CoordinateChart,
    recipe: TwoFormRecipe,
}

impl VectorValued2Form {
    pub fn recipe(&self) -> &TwoFormRecipe {
        &self.recipe
    }

    pub fn chart(&self) -> CoordinateChart {
        self.chart
    }

    /// The symbolic vector field `value(X, Y)`.
    pub fn apply(&self, x: &PhaseVectorField, y: &PhaseVectorField) -> Result<PhaseVectorField, ChartError> {
        self.chart.ensure_same(&x.chart)?;
        self.chart.ensure_same(&y.chart)?;
        Ok(match &self.recipe {
            TwoFormRecipe::FnBracket(l, k) => fn_bracket_value(l, k, x, y),
            TwoFormRecipe::Nijenhuis(l) => nijenhuis_value(l, x, y),
        })
    }

    pub fn evaluate<T: Scalar>(
        &self,
        x: &PhaseVectorField,
        y: &PhaseVectorField,
        pt: &ChartPoint<T>,
    ) -> Result<Vec<T>, crate::Error> {
        self.chart.ensure_same(&pt.chart())?;
        Ok(self.apply(x, y)?.evaluate(pt)?)
    }
}

// [L,K](X,Y) = [LX,KY] + [KX,LY] + (LK+KL)[X,Y] − L[X,KY] − K[X,LY] − L[KX,Y] − K[LX,Y]
fn fn_bracket_value(l: &FullTensor11, k: &FullTensor11, x: &PhaseVectorField, y: &PhaseVectorField) -> PhaseVectorField {
    let (lx, ly, kx, ky) = (l.apply(x), l.apply(y), k.apply(x), k.apply(y));
    let xy = bracket(x, y);
    bracket(&lx, &ky)
        .add(&bracket(&kx, &ly))
        .add(&l.apply(&k.apply(&xy)))
        .add(&k.apply(&l.apply(&xy)))
        .sub(&l.apply(&bracket(x, &ky)))
        .sub(&k.apply(&bracket(x, &ly)))
        .sub(&l.apply(&bracket(&kx, y)))
        .sub(&k.apply(&bracket(&lx, y)))
}

// N_L(X,Y) = [LX,LY] + L²[X,Y] − L[X,LY] − L[LX,Y]
fn nijenhuis_value(l: &FullTensor11, x: &PhaseVectorField, y: &PhaseVectorField) -> PhaseVectorField {
    let (lx, ly) = (l.apply(x), l.apply(y));
    bracket(&lx, &ly)
        .add(&l.apply(&l.apply(&bracket(x, y))))
        .sub(&l.apply(&bracket(x, &ly)))
        .sub(&l.apply(&bracket(&lx, y)))
}

pub fn fn_bracket_11(l: &FullTensor11, k: &FullTensor11) -> Result<VectorValued2Form, ChartError> {
    l.chart.ensure_same(&k.chart)?;
    Ok(VectorValued2Form {
        chart: l.chart,
        recipe: TwoFormRecipe::FnBracket(l.clone(), k.clone()),
    })
}

pub fn nijenhuis(l: &FullTensor11) -> VectorValued2Form {
    VectorValued2Form {
        chart: l.chart,
        recipe: TwoFormRecipe::Nijenhuis(l.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(n: usize) -> CoordinateChart {
        CoordinateChart::cotangent(n)
    }

    fn field(n: usize, srcs: &[&str]) -> PhaseVectorField {
        let c = chart(n);
        PhaseVectorField::new(c, srcs.iter().map(|s| ScalarField::parse(s, c).unwrap()).collect()).unwrap()
    }

    fn pt(v: &[f64]) -> ChartPoint<f64> {
        ChartPoint::new(chart(v.len() / 2), v.to_vec()).unwrap()
    }

    #[test]
    fn fiber_frame_commutes() {
        let c = chart(2);
        let b = lie_bracket(&PhaseVectorField::coordinate(c, 2), &PhaseVectorField::coordinate(c, 3)).unwrap();
        assert!(b.components().iter().all(Expr::is_zero));
    }

    #[test]
    fn two_term_bracket() {
        // [p1 ∂x1, x1 ∂p1] = p1 ∂p1 − x1 ∂x1
        let x = field(1, &["p1", "0"]);
        let y = field(1, &["0", "x1"]);
        let b = lie_bracket(&x, &y).unwrap();
        let v = b.evaluate(&pt(&[0.3, -0.7])).unwrap();
        assert_eq!(v, vec![-0.3, -0.7]);
    }

    #[test]
    fn bracket_rejects_chart_mismatch() {
        let x = PhaseVectorField::zero(chart(1));
        let y = PhaseVectorField::zero(chart(2));
        assert!(lie_bracket(&x, &y).is_err());
    }

    #[test]
    fn lie_derivative_of_identity_vanishes() {
        let x = field(1, &["sin(x1)*p1", "x1^2+p1"]);
        let l = lie_derivative_tensor11(&x, &FullTensor11::identity(chart(1))).unwrap();
        assert_eq!(l.evaluate(&pt(&[0.4, -1.2])).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn identity_brackets_vanish() {
        let c = chart(2);
        let id = FullTensor11::identity(c);
        let x = field(2, &["p1*x2", "x1", "p2^2", "sin(x1)"]);
        let y = field(2, &["1", "p1", "x2*p2", "0"]);
        let p = pt(&[0.2, -0.4, 1.1, 0.6]);
        for form in [fn_bracket_11(&id, &id).unwrap(), nijenhuis(&id)] {
            let v = form.evaluate(&x, &y, &p).unwrap();
            assert!(v.iter().all(|c| c.abs() < 1e-14), "{v:?}");
        }
    }

    #[test]
    fn two_forms_are_antisymmetric_and_bilinear() {
        let c = chart(1);
        let a = FullTensor11::new(
            c,
            ExprMatrix::from_fn(2, 2, |i, j| {
                crate::expr::parse_expr(["x1*p1", "p1^2", "sin(x1)", "x1+p1"][i * 2 + j], &c).unwrap()
            }),
        )
        .unwrap();
        let b = FullTensor11::identity(c).scale(2.0).sub(&a);
        let x = field(1, &["p1", "x1*x1"]);
        let y = field(1, &["cos(p1)", "1+x1"]);
        let p = pt(&[0.35, -0.8]);
        for form in [fn_bracket_11(&a, &b).unwrap(), nijenhuis(&a)] {
            let xy = form.evaluate(&x, &y, &p).unwrap();
            let yx = form.evaluate(&y, &x, &p).unwrap();
            for (u, v) in xy.iter().zip(&yx) {
                assert!((u + v).abs() < 1e-10);
            }
            let x3 = x.scale(&Expr::constant(3.0));
            let scaled = form.evaluate(&x3, &y, &p).unwrap();
            for (u, v) in xy.iter().zip(&scaled) {
                assert!((3.0 * u - v).abs() < 1e-10);
            }
        }
        // N_A = ½ [A, A]
        let n = nijenhuis(&a).evaluate(&x, &y, &p).unwrap();
        let fnb = fn_bracket_11(&a, &a).unwrap().evaluate(&x, &y, &p).unwrap();
        for (u, v) in n.iter().zip(&fnb) {
            assert!((u - 0.5 * v).abs() < 1e-10);
        }
    }

    #[test]
    fn one_form_contraction() {
        let c = chart(1);
        let dx = OneForm::coordinate(c, 0);
        let x = field(1, &["p1", "x1"]);
        assert_eq!(dx.contract(&x).eval_at(&[2.0, 5.0]).unwrap(), 5.0);
    }
}
