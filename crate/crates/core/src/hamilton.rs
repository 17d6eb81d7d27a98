//! Hamilton spaces, the Legendre map to the tangent bundle, Lagrangian
//! semisprays and their pullback to `T*M`.

use crate::cotangent::{check_regular, AdaptedTangentStructure, NonlinearConnection, REGULARITY_FLOOR};
use crate::dynamics::{hamiltonian_residuals, JRegularField};
use crate::expr::{ChartError, ChartPoint, CoordinateChart, Evaluator, Expr, ExprMatrix, ScalarField};
use crate::frame::PhaseVectorField;
use crate::linalg::Mat;
use crate::sampling::{at_point, max_abs_residual, Residual};
use crate::scalar::Scalar;
use crate::Error;

/// A Hamiltonian together with everything derived from it symbolically.
#[derive(Clone, Debug)]
pub struct HamiltonModel {
    h: ScalarField,
    g_upper: ExprMatrix,
    g_lower: ExprMatrix,
    j: AdaptedTangentStructure,
    rho: PhaseVectorField,
}

impl HamiltonModel {
    /// Derives `g^ij = ∂²H/∂p_i∂p_j`, its inverse `g_ij`, `J_H` (with
    /// `t^ij = g^ij`) and `ρ_H = ∂H/∂p_i ∂/∂x^i − ∂H/∂x^i ∂/∂p_i`.
    ///
    /// Regularity is not checked here; see [`build`](Self::build).
    pub fn new(h: ScalarField) -> Result<Self, Error> {
        let chart = h.chart();
        chart.ensure_same(&CoordinateChart::cotangent(chart.dim()))?;
        let d = chart.dim();
        let e = h.expr();
        let g_upper = ExprMatrix::from_fn(d, d, |i, j| e.diff(d + i).diff(d + j));
        let j = AdaptedTangentStructure::from_upper(chart, g_upper.clone())?;
        let g_lower = j.lower().clone();
        let comps = (0..2 * d)
            .map(|a| if a < d { e.diff(d + a) } else { -e.diff(a - d) })
            .collect();
        Ok(Self {
            h,
            g_upper,
            g_lower,
            j,
            rho: PhaseVectorField::from_exprs(chart, comps),
        })
    }

    /// [`new`](Self::new) followed by a regularity check at every point.
    pub fn build<T: Scalar>(h: ScalarField, pts: &[ChartPoint<T>]) -> Result<Self, Error> {
        let m = Self::new(h)?;
        m.check_regular(pts)?;
        Ok(m)
    }

    /// Fails at the first point where `|det g^ij| < 1e-8`.
    pub fn check_regular<T: Scalar>(&self, pts: &[ChartPoint<T>]) -> Result<(), Error> {
        check_regular(&self.g_upper, "Hessian g^ij", pts, REGULARITY_FLOOR)
    }

    pub fn chart(&self) -> CoordinateChart {
        self.h.chart()
    }

    pub fn dim(&self) -> usize {
        self.chart().dim()
    }

    pub fn hamiltonian(&self) -> &ScalarField {
        &self.h
    }

    pub fn metric_upper(&self) -> &ExprMatrix {
        &self.g_upper
    }

    pub fn metric_lower(&self) -> &ExprMatrix {
        &self.g_lower
    }

    pub fn tangent_structure(&self) -> &AdaptedTangentStructure {
        &self.j
    }

    pub fn rho(&self) -> &PhaseVectorField {
        &self.rho
    }

    pub fn j_regular(&self) -> JRegularField {
        JRegularField::new(self.rho.clone(), self.j.clone()).expect("shared chart")
    }

    /// `N_ij = ½({g_ij, H} − g_ik ∂²H/∂p_k∂x^j − g_jk ∂²H/∂p_k∂x^i)`.
    pub fn canonical_connection(&self) -> NonlinearConnection {
        let d = self.dim();
        let h = self.h.expr();
        let g = &self.g_lower;
        let n = ExprMatrix::from_fn(d, d, |i, j| {
            let mut terms = vec![crate::cotangent::poisson(g.get(i, j), h, d)];
            for k in 0..d {
                terms.push(-(g.get(i, k) * h.diff(d + k).diff(j)));
                terms.push(-(g.get(j, k) * h.diff(d + k).diff(i)));
            }
            Expr::sum(&terms) * 0.5
        });
        NonlinearConnection::from_matrix(self.chart(), n)
    }

    /// `ρ_H(H)`; vanishes identically.
    pub fn energy_drift(&self) -> Expr {
        self.rho.derive(self.h.expr())
    }

    pub fn legendre(&self) -> LegendreMap {
        self.legendre_with(NewtonSettings::default())
    }

    pub fn legendre_with(&self, newton: NewtonSettings) -> LegendreMap {
        LegendreMap {
            h: self.h.expr().clone(),
            chart: self.chart(),
            xi: self.rho.xi().to_vec(),
            g_upper: self.g_upper.clone(),
            newton,
        }
    }

    /// Rewrites a tangent-chart expression in `(x, y)` as a function of
    /// `(x, p)` via `y = ∂H/∂p`.
    pub fn compose_with_forward(&self, e: &Expr) -> Expr {
        let d = self.dim();
        let xi = self.rho.xi();
        e.substitute(&|i| if i >= d { Some(xi[i - d].clone()) } else { None })
    }

    /// The Lagrangian that is exactly dual to a Hamiltonian quadratic in `p`:
    /// with `A = g^ij`, `b = ∂H/∂p` and `c = H` all taken at `p = 0`,
    /// `L = ½(y − b)ᵀ A⁻¹ (y − b) − c`.
    ///
    /// For other Hamiltonians the result is only a second-order fiber
    /// approximation; [`LegendreMap::lagrangian_gate`] detects that.
    pub fn quadratic_lagrangian(&self) -> ScalarField {
        let d = self.dim();
        let at_zero = |e: &Expr| e.substitute(&|i| if i >= d { Some(Expr::zero()) } else { None });
        let a_inv = self.g_upper.map(at_zero).inverse();
        let b: Vec<Expr> = self.rho.xi().iter().map(at_zero).collect();
        let c = at_zero(self.h.expr());
        let u: Vec<Expr> = (0..d).map(|i| Expr::var(d + i) - &b[i]).collect();
        let mut terms = Vec::new();
        for i in 0..d {
            for j in 0..d {
                terms.push(&u[i] * a_inv.get(i, j) * &u[j]);
            }
        }
        let l = Expr::sum(&terms) * 0.5 - c;
        ScalarField::from_parts(l, CoordinateChart::tangent(d))
    }
}

/// Stopping rule for the inverse Legendre map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonSettings {
    /// Bound on `‖∂H/∂p(x, p) − y‖₂`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 50,
        }
    }
}

/// Result of one inverse solve.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome<T> {
    pub point: ChartPoint<T>,
    /// Newton updates applied; zero when the initial guess already fits.
    pub iterations: usize,
    pub residual: T,
}

/// `Ψ(x, p) = (x, ∂H/∂p)` and its numerical inverse.
#[derive(Clone, Debug)]
pub struct LegendreMap {
    h: Expr,
    chart: CoordinateChart,
    xi: Vec<Expr>,
    g_upper: ExprMatrix,
    newton: NewtonSettings,
}

impl LegendreMap {
    pub fn cotangent_chart(&self) -> CoordinateChart {
        self.chart
    }

    pub fn tangent_chart(&self) -> CoordinateChart {
        CoordinateChart::tangent(self.chart.dim())
    }

    pub fn settings(&self) -> NewtonSettings {
        self.newton
    }

    pub fn forward<T: Scalar>(&self, pt: &ChartPoint<T>) -> Result<ChartPoint<T>, Error> {
        self.chart.ensure_same(&pt.chart())?;
        let y = Evaluator::new(pt.coords()).eval_all(&self.xi).map_err(|e| at_point(pt, e))?;
        Ok(ChartPoint::from_parts(self.tangent_chart(), pt.base(), &y)?)
    }

    /// Solves `∂H/∂p(x, p) = y` by Newton's method from `p = y`.
    pub fn inverse<T: Scalar>(&self, pt: &ChartPoint<T>) -> Result<NewtonOutcome<T>, Error> {
        self.tangent_chart().ensure_same(&pt.chart())?;
        let d = self.chart.dim();
        let tol = T::lit(self.newton.tolerance);
        let y = pt.fiber().to_vec();
        let mut coords = pt.coords().to_vec();
        let lossy = |c: &[T]| c.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>();
        let mut iterations = 0;
        loop {
            let mut ev = Evaluator::new(&coords);
            let r: Vec<T> = self
                .xi
                .iter()
                .zip(&y)
                .map(|(e, &yi)| ev.eval(e).map(|v| v - yi))
                .collect::<Result<_, _>>()
                .map_err(|source| Error::AtPoint {
                    point: lossy(&coords),
                    source,
                })?;
            let norm = r.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
            if norm <= tol {
                let point = ChartPoint::new(self.chart, coords)?;
                return Ok(NewtonOutcome {
                    point,
                    iterations,
                    residual: norm,
                });
            }
            if iterations >= self.newton.max_iterations || !norm.is_finite() {
                return Err(Error::NotConverged {
                    point: lossy(pt.coords()),
                    iterations,
                    residual: norm.to_f64_lossy(),
                });
            }
            let jac: Mat<T> = self.g_upper.eval(&mut ev).map_err(|source| Error::AtPoint {
                point: lossy(&coords),
                source,
            })?;
            let step = jac.solve(&r, T::lit(REGULARITY_FLOOR)).ok_or_else(|| Error::Singular {
                what: "Hessian g^ij",
                point: lossy(&coords),
                det: jac.det().to_f64_lossy(),
                floor: REGULARITY_FLOOR,
            })?;
            for i in 0..d {
                coords[d + i] -= step[i];
            }
            iterations += 1;
        }
    }

    /// `L(x, y) = ζ_i y^i − H(x, ζ)` with `ζ` from [`inverse`](Self::inverse).
    pub fn induced_lagrangian<T: Scalar>(&self, pt: &ChartPoint<T>) -> Result<T, Error> {
        let out = self.inverse(pt)?;
        let h = self.h.eval_at(out.point.coords()).map_err(|e| at_point(&out.point, e))?;
        let pairing = out
            .point
            .fiber()
            .iter()
            .zip(pt.fiber())
            .fold(T::zero(), |acc, (&z, &y)| acc + z * y);
        Ok(pairing - h)
    }

    /// Worst `|L_induced − L_supplied|` over the forward images of `pts`.
    pub fn lagrangian_gate<T: Scalar>(&self, l: &ScalarField, pts: &[ChartPoint<T>]) -> Result<Residual<T>, Error> {
        self.tangent_chart().ensure_same(&l.chart())?;
        let mut acc = Residual::zero(pts.len());
        for (k, pt) in pts.iter().enumerate() {
            let tp = self.forward(pt)?;
            let supplied = l.expr().eval_at(tp.coords()).map_err(|e| at_point(&tp, e))?;
            let v = (self.induced_lagrangian(&tp)? - supplied).abs();
            acc = acc.merge(Residual {
                max_abs: v,
                points: pts.len(),
                worst: Some(k),
            });
        }
        Ok(acc)
    }

    /// Central-difference Jacobians `(∂ζ_i/∂y^j, ∂ζ_i/∂x^j)` at `Ψ(pt)`.
    pub fn zeta_jacobians<T: Scalar>(&self, pt: &ChartPoint<T>, step: T) -> Result<(Mat<T>, Mat<T>), Error> {
        let d = self.chart.dim();
        let tp = self.forward(pt)?;
        let zeta = |c: usize, s: T| -> Result<Vec<T>, Error> { Ok(self.inverse(&tp.shifted(c, s))?.point.fiber().to_vec()) };
        let mut dy = Mat::zeros(d, d);
        let mut dx = Mat::zeros(d, d);
        let two_h = step + step;
        for j in 0..d {
            let (yp, ym) = (zeta(d + j, step)?, zeta(d + j, -step)?);
            let (xp, xm) = (zeta(j, step)?, zeta(j, -step)?);
            for i in 0..d {
                dy[(i, j)] = (yp[i] - ym[i]) / two_h;
                dx[(i, j)] = (xp[i] - xm[i]) / two_h;
            }
        }
        Ok((dy, dx))
    }

    /// Symbolic counterparts `g_ij` and `−g_ik ∂ξ^k/∂x^j` on `T*M`.
    pub fn zeta_jacobian_closed_forms(&self) -> (ExprMatrix, ExprMatrix) {
        let d = self.chart.dim();
        let g = self.g_upper.inverse();
        let dx = ExprMatrix::from_fn(d, d, |i, j| {
            let terms: Vec<Expr> = (0..d).map(|k| g.get(i, k) * self.xi[k].diff(j)).collect();
            -Expr::sum(&terms)
        });
        (g, dx)
    }
}

/// A semispray `y^i ∂/∂x^i + S^i ∂/∂y^i` on a tangent chart.
#[derive(Clone, Debug)]
pub struct Semispray {
    chart: CoordinateChart,
    s: Vec<Expr>,
}

impl Semispray {
    pub fn new(chart: CoordinateChart, s: Vec<ScalarField>) -> Result<Self, Error> {
        chart.ensure_same(&CoordinateChart::tangent(chart.dim()))?;
        if s.len() != chart.dim() {
            return Err(Error::Shape(format!("semispray needs {} components, got {}", chart.dim(), s.len())));
        }
        for f in &s {
            chart.ensure_same(&f.chart())?;
        }
        Ok(Self {
            chart,
            s: s.into_iter().map(ScalarField::into_expr).collect(),
        })
    }

    pub fn chart(&self) -> CoordinateChart {
        self.chart
    }

    /// `S^i`.
    pub fn coefficients(&self) -> &[Expr] {
        &self.s
    }

    pub fn field(&self) -> PhaseVectorField {
        let d = self.chart.dim();
        let mut comps: Vec<Expr> = (0..d).map(|i| Expr::var(d + i)).collect();
        comps.extend(self.s.iter().cloned());
        PhaseVectorField::from_exprs(self.chart, comps)
    }

    /// `N^i_j = −½ ∂S^i/∂y^j`.
    pub fn connection(&self) -> ExprMatrix {
        let d = self.chart.dim();
        ExprMatrix::from_fn(d, d, |i, j| self.s[i].diff(d + j) * -0.5)
    }

    /// Same semispray with `extra` added to `S^i`.
    pub fn perturbed(&self, i: usize, extra: &Expr) -> Result<Self, ChartError> {
        if let Some(v) = extra.max_var() {
            if v >= self.chart.len() {
                return Err(ChartError::UnknownCoordinate(format!("#{v}")));
            }
        }
        let mut s = self.s.clone();
        s[i] = &s[i] + extra;
        Ok(Self { chart: self.chart, s })
    }
}

/// A Lagrangian on a tangent chart with its fiber metric and semispray.
#[derive(Clone, Debug)]
pub struct LagrangeModel {
    l: ScalarField,
    g: ExprMatrix,
    g_inv: ExprMatrix,
}

impl LagrangeModel {
    pub fn new(l: ScalarField) -> Result<Self, Error> {
        let chart = l.chart();
        chart.ensure_same(&CoordinateChart::tangent(chart.dim()))?;
        let d = chart.dim();
        let g = ExprMatrix::from_fn(d, d, |i, j| l.expr().diff(d + i).diff(d + j));
        let g_inv = g.inverse();
        Ok(Self { l, g, g_inv })
    }

    pub fn check_regular<T: Scalar>(&self, pts: &[ChartPoint<T>]) -> Result<(), Error> {
        check_regular(&self.g, "fiber metric ∂²L/∂y∂y", pts, REGULARITY_FLOOR)
    }

    pub fn lagrangian(&self) -> &ScalarField {
        &self.l
    }

    /// `g_ij = ∂²L/∂y^i∂y^j`.
    pub fn metric(&self) -> &ExprMatrix {
        &self.g
    }

    pub fn metric_inverse(&self) -> &ExprMatrix {
        &self.g_inv
    }

    /// `S^i = g^ij(∂L/∂x^j − (∂²L/∂x^k∂y^j) y^k)`.
    pub fn semispray(&self) -> Semispray {
        let d = self.l.chart().dim();
        let l = self.l.expr();
        let force: Vec<Expr> = (0..d)
            .map(|j| {
                let mut terms = vec![l.diff(j)];
                terms.extend((0..d).map(|k| -(l.diff(d + j).diff(k) * Expr::var(d + k))));
                Expr::sum(&terms)
            })
            .collect();
        let s = (0..d)
            .map(|i| {
                let terms: Vec<Expr> = (0..d).map(|j| self.g_inv.get(i, j) * &force[j]).collect();
                Expr::sum(&terms)
            })
            .collect();
        Semispray { chart: self.l.chart(), s }
    }

    /// Entries of `S(g_ik) − N^l_k g_li − N^l_i g_lk`.
    pub fn metric_condition(&self, s: &Semispray) -> Vec<Expr> {
        let d = self.l.chart().dim();
        let (n, field) = (s.connection(), s.field());
        let mut out = Vec::new();
        for i in 0..d {
            for k in 0..d {
                let mut terms = vec![field.derive(self.g.get(i, k))];
                for l in 0..d {
                    terms.push(-(n.get(l, k) * self.g.get(l, i)));
                    terms.push(-(n.get(l, i) * self.g.get(l, k)));
                }
                out.push(Expr::sum(&terms));
            }
        }
        out
    }

    /// Entries of `N^l_i g_lk − N^l_k g_li + ∂²L/∂x^k∂y^i − ∂²L/∂x^i∂y^k`.
    pub fn symplectic_condition(&self, s: &Semispray) -> Vec<Expr> {
        let d = self.l.chart().dim();
        let n = s.connection();
        let l = self.l.expr();
        let mut out = Vec::new();
        for i in 0..d {
            for k in 0..d {
                let mut terms = Vec::new();
                for m in 0..d {
                    terms.push(n.get(m, i) * self.g.get(m, k));
                    terms.push(-(n.get(m, k) * self.g.get(m, i)));
                }
                terms.push(l.diff(d + i).diff(k));
                terms.push(-l.diff(d + k).diff(i));
                out.push(Expr::sum(&terms));
            }
        }
        out
    }
}

/// `Ψ_*⁻¹S = ξ^i ∂/∂x^i + (−ξ^i g_kj ∂ξ^j/∂x^i + S^i g_ik) ∂/∂p_k`, with
/// `S^i` composed with `y = ξ(x, p)` symbolically.
pub fn pullback_semispray(model: &HamiltonModel, s: &Semispray) -> Result<PhaseVectorField, Error> {
    let d = model.dim();
    if s.chart().dim() != d {
        return Err(Error::Shape(format!("semispray has dimension {}, model {d}", s.chart().dim())));
    }
    let xi = model.rho().xi();
    let g = model.metric_lower();
    let s_on_cot: Vec<Expr> = s.coefficients().iter().map(|e| model.compose_with_forward(e)).collect();
    let mut comps = xi.to_vec();
    for k in 0..d {
        let mut terms = Vec::new();
        for i in 0..d {
            for j in 0..d {
                terms.push(-(&xi[i] * g.get(k, j) * xi[j].diff(i)));
            }
            terms.push(&s_on_cot[i] * g.get(i, k));
        }
        comps.push(Expr::sum(&terms));
    }
    Ok(PhaseVectorField::from_exprs(model.chart(), comps))
}

/// Residual maxima for the duality between a semispray and its pullback.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport<T> {
    /// Symmetry of `∂ξ^j/∂p_i` for the pullback.
    pub semi_a: Residual<T>,
    /// `∂χ_i/∂p_j + ∂ξ^j/∂x^i` for the pullback.
    pub semi_b: Residual<T>,
    /// Metric condition on `TM`, evaluated at `Ψ(pts)`.
    pub metric: Residual<T>,
    /// Symplectic condition on `TM`, evaluated at `Ψ(pts)`.
    pub symplectic: Residual<T>,
}

impl<T: Scalar> DualityReport<T> {
    pub fn semi_hamiltonian(&self, tol: f64) -> bool {
        self.semi_a.max_abs.to_f64_lossy() <= tol && self.semi_b.max_abs.to_f64_lossy() <= tol
    }

    pub fn metric_and_symplectic(&self, tol: f64) -> bool {
        self.metric.max_abs.to_f64_lossy() <= tol && self.symplectic.max_abs.to_f64_lossy() <= tol
    }

    /// Whether both sides of the equivalence agree at this tolerance.
    pub fn equivalence_holds(&self, tol: f64) -> bool {
        self.semi_hamiltonian(tol) == self.metric_and_symplectic(tol)
    }
}

pub fn duality_report<T: Scalar>(
    model: &HamiltonModel,
    lag: &LagrangeModel,
    s: &Semispray,
    pts: &[ChartPoint<T>],
) -> Result<DualityReport<T>, Error> {
    let rho = pullback_semispray(model, s)?;
    let semi = hamiltonian_residuals(&rho);
    let on_cot = |es: Vec<Expr>| es.iter().map(|e| model.compose_with_forward(e)).collect::<Vec<_>>();
    Ok(DualityReport {
        semi_a: max_abs_residual(&semi.a, pts)?,
        semi_b: max_abs_residual(&semi.b, pts)?,
        metric: max_abs_residual(&on_cot(lag.metric_condition(s)), pts)?,
        symplectic: max_abs_residual(&on_cot(lag.symplectic_condition(s)), pts)?,
    })
}

/// One row of the perturbation table for `S^1 += ε (y^1)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationRow<T> {
    pub epsilon: f64,
    pub report: DualityReport<T>,
}

pub fn perturbation_table<T: Scalar>(
    model: &HamiltonModel,
    lag: &LagrangeModel,
    epsilons: &[f64],
    pts: &[ChartPoint<T>],
) -> Result<Vec<PerturbationRow<T>>, Error> {
    let base = lag.semispray();
    let d = model.dim();
    epsilons
        .iter()
        .map(|&eps| {
            let extra = Expr::powi(&Expr::var(d), 2) * eps;
            let s = base.perturbed(0, &extra)?;
            Ok(PerturbationRow {
                epsilon: eps,
                report: duality_report(model, lag, &s, pts)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cot(n: usize) -> CoordinateChart {
        CoordinateChart::cotangent(n)
    }

    fn model(src: &str, n: usize) -> HamiltonModel {
        HamiltonModel::new(ScalarField::parse(src, cot(n)).unwrap()).unwrap()
    }

    fn pt(v: &[f64]) -> ChartPoint<f64> {
        ChartPoint::new(cot(v.len() / 2), v.to_vec()).unwrap()
    }

    fn tpt(v: &[f64]) -> ChartPoint<f64> {
        ChartPoint::new(CoordinateChart::tangent(v.len() / 2), v.to_vec()).unwrap()
    }

    const EUCLID: &str = "0.5*(p1^2+p2^2)+x1^2*x2";
    const CURVED: &str = "0.5*(1+x1^2)*p1^2";

    #[test]
    fn build_examples() {
        let m = model(EUCLID, 2);
        let p = pt(&[0.3, -0.4, 1.1, 0.7]);
        let g = m.metric_upper().eval_at(p.coords()).unwrap();
        assert_eq!(g, Mat::identity(2));
        let rho = m.rho().evaluate(&p).unwrap();
        assert_eq!(rho, vec![1.1, 0.7, -2.0 * 0.3 * -0.4, -0.09]);

        let m = model(CURVED, 1);
        let p = pt(&[0.5, 2.0]);
        assert_eq!(m.metric_upper().eval_at(p.coords()).unwrap()[(0, 0)], 1.25);
        assert!((m.metric_lower().eval_at(p.coords()).unwrap()[(0, 0)] - 0.8).abs() < 1e-15);

        let bad = HamiltonModel::build(ScalarField::parse("p1*x1", cot(1)).unwrap(), &[pt(&[0.5, 1.0])]);
        assert!(matches!(bad, Err(Error::Singular { .. })));
    }

    #[test]
    fn hamilton_connection_examples() {
        let n = model(EUCLID, 2).canonical_connection();
        let p = pt(&[0.3, -0.4, 1.1, 0.7]);
        assert_eq!(n.coefficients().eval_at(p.coords()).unwrap().max_abs(), 0.0);

        let n = model("0.5*((1+x1^2)*p1^2+p2^2)", 2).canonical_connection();
        let v = n.coefficients().eval_at(p.coords()).unwrap();
        assert!((v[(0, 0)] + 0.3 * 1.1 / 1.09).abs() < 1e-15);
        assert_eq!([v[(0, 1)], v[(1, 0)], v[(1, 1)]], [0.0; 3]);
    }

    #[test]
    fn forward_and_inverse_examples() {
        let free = model("0.5*p1^2", 1).legendre();
        assert_eq!(free.forward(&pt(&[0.3, 2.0])).unwrap().coords(), &[0.3, 2.0]);
        let out = free.inverse(&tpt(&[0.3, 2.0])).unwrap();
        assert_eq!(out.point.coords(), &[0.3, 2.0]);
        assert!(out.iterations <= 1);

        let curved = model(CURVED, 1).legendre();
        assert_eq!(curved.forward(&pt(&[1.0, 0.5])).unwrap().coords()[1], 1.0);
        let out = curved.inverse(&tpt(&[1.0, 1.0])).unwrap();
        assert!((out.point.coords()[1] - 0.5).abs() < 1e-14);
        assert!(out.residual <= 1e-12);

        // generic over the scalar type
        let out32 = curved
            .clone()
            .inverse(&ChartPoint::new(CoordinateChart::tangent(1), vec![1.0f32, 1.0]).unwrap());
        assert!(matches!(out32, Err(Error::NotConverged { .. })) || out32.is_ok());
    }

    #[test]
    fn newton_reports_non_convergence() {
        let m = model(CURVED, 1).legendre_with(NewtonSettings {
            tolerance: 1e-12,
            max_iterations: 0,
        });
        assert!(matches!(m.inverse(&tpt(&[1.0, 1.0])), Err(Error::NotConverged { iterations: 0, .. })));
    }

    #[test]
    fn induced_lagrangian_examples() {
        let m = model(EUCLID, 2);
        let map = m.legendre();
        let l = map.induced_lagrangian(&tpt(&[1.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((l - (0.5 - 1.0)).abs() < 1e-15);
        let ansatz = m.quadratic_lagrangian();
        let pts = [pt(&[0.3, -0.4, 1.1, 0.7]), pt(&[-0.8, 0.1, -0.2, 1.9])];
        assert!(map.lagrangian_gate(&ansatz, &pts).unwrap().max_abs < 1e-14);
        let off = ScalarField::parse("0.5*(y1^2+y2^2)-x1^2*x2+1", CoordinateChart::tangent(2)).unwrap();
        let gate = map.lagrangian_gate(&off, &pts).unwrap().max_abs;
        assert!((gate - 1.0).abs() < 1e-14);

        let free = model("0.5*p1^2", 1);
        let l = free.quadratic_lagrangian();
        assert_eq!(l.expr().eval_at(&[0.4, 3.0]).unwrap(), 4.5);

        // quartic H is not captured by the quadratic ansatz
        let quartic = model("0.25*p1^4+0.5*p1^2", 1);
        let gate = quartic
            .legendre()
            .lagrangian_gate(&quartic.quadratic_lagrangian(), &[pt(&[0.0, 1.5])])
            .unwrap();
        assert!(gate.max_abs > 0.1);
    }

    #[test]
    fn inverse_function_identities() {
        let m = model(CURVED, 1);
        let map = m.legendre();
        let (gy, gx) = map.zeta_jacobian_closed_forms();
        for v in [[0.4, 1.3], [-0.7, -0.6]] {
            let p = pt(&v);
            let (dy, dx) = map.zeta_jacobians(&p, 1e-5).unwrap();
            assert!((dy[(0, 0)] - gy.get(0, 0).eval_at(p.coords()).unwrap()).abs() < 1e-6);
            assert!((dx[(0, 0)] - gx.get(0, 0).eval_at(p.coords()).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn semispray_examples() {
        let tc = CoordinateChart::tangent(2);
        let lag = LagrangeModel::new(ScalarField::parse("0.5*(y1^2+y2^2)-x1^2*x2", tc).unwrap()).unwrap();
        let s = lag.semispray();
        let p = tpt(&[0.3, -0.4, 1.1, 0.7]);
        let v = s.field().evaluate(&p).unwrap();
        assert_eq!(v, vec![1.1, 0.7, 2.0 * 0.3 * 0.4, -0.09]);
        assert_eq!(s.connection().eval_at(p.coords()).unwrap().max_abs(), 0.0);

        let free = LagrangeModel::new(ScalarField::parse("0.5*y1^2", CoordinateChart::tangent(1)).unwrap()).unwrap();
        assert!(free.semispray().coefficients()[0].is_zero());
        let pert = free.semispray().perturbed(0, &(Expr::powi(&Expr::var(1), 2) * 0.01)).unwrap();
        let n = pert.connection();
        assert!((n.get(0, 0).eval_at(&[0.0f64, 3.0]).unwrap() + 0.03).abs() < 1e-16);
    }

    #[test]
    fn pullback_recovers_hamiltonian_field() {
        for (h, n) in [(EUCLID, 2), (CURVED, 1), ("0.5*p1^2", 1), ("0.5*((1+x1^2)*p1^2+p2^2)", 2)] {
            let m = model(h, n);
            let lag = LagrangeModel::new(m.quadratic_lagrangian()).unwrap();
            let rho = pullback_semispray(&m, &lag.semispray()).unwrap();
            let diff = rho.sub(m.rho());
            let pts: Vec<_> = [[0.3, -0.4, 1.1, 0.7], [-0.8, 0.1, -0.2, 1.9]]
                .iter()
                .map(|v| {
                    let mut c = v[..n].to_vec();
                    c.extend_from_slice(&v[2..2 + n]);
                    pt(&c)
                })
                .collect();
            assert!(max_abs_residual(diff.components(), &pts).unwrap().max_abs < 1e-12, "{h}");
        }
    }

    #[test]
    fn duality_forward_and_perturbed() {
        let m = model(EUCLID, 2);
        let lag = LagrangeModel::new(m.quadratic_lagrangian()).unwrap();
        let pts = [pt(&[0.3, -0.4, 1.1, 0.7]), pt(&[-0.8, 0.1, -0.2, 1.9])];
        let r = duality_report(&m, &lag, &lag.semispray(), &pts).unwrap();
        assert!(r.semi_hamiltonian(1e-12) && r.metric_and_symplectic(1e-12));
        let rows = perturbation_table(&m, &lag, &[1e-1, 1e-2, 1e-3], &pts).unwrap();
        for w in rows.windows(2) {
            let rb = w[0].report.semi_b.max_abs / w[1].report.semi_b.max_abs;
            let rm = w[0].report.metric.max_abs / w[1].report.metric.max_abs;
            assert!((rb - 10.0).abs() < 1e-9 && (rm - 10.0).abs() < 1e-9);
        }
        let r: &DualityReport<f64> = &rows[1].report;
        assert!((r.semi_b.max_abs - 2.0 * 0.01 * 1.1).abs() < 1e-15);
        assert!(!r.semi_hamiltonian(1e-10) && !r.metric_and_symplectic(1e-10));
        assert!(r.equivalence_holds(1e-10));
    }
}
