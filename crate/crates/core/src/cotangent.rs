//! Canonical objects of `T*M` and connection-level geometry.
//!
//! Index convention for a nonlinear connection: in `N_ij` the first index
//! pairs with `dx^i`, the second with `∂/∂p_j`, so the adapted frame is
//! `δ/δx^i = ∂/∂x^i + N_ij ∂/∂p_j`. As a (1,1)-tensor on the flat chart the
//! horizontal projector `h` therefore has identity in its top-left block and
//! `N_ij` at row `n + j`, column `i`.

use crate::expr::{ChartError, ChartPoint, CoordinateChart, Evaluator, Expr, ExprMatrix, ScalarField};
use crate::frame::{bracket, fn_bracket_11, nijenhuis, FullTensor11, OneForm, PhaseVectorField};
use crate::linalg::Mat;
use crate::sampling::{at_point, max_abs_residual, Residual};
use crate::scalar::Scalar;
use crate::Error;

/// Default lower bound on `|det|` for tangent structures and metrics.
pub const REGULARITY_FLOOR: f64 = 1e-8;

fn ensure_cotangent(chart: CoordinateChart) -> Result<(), ChartError> {
    let expected = CoordinateChart::cotangent(chart.dim());
    chart.ensure_same(&expected)
}

fn ensure_square(m: &ExprMatrix, chart: CoordinateChart, what: &str) -> Result<(), Error> {
    let n = chart.dim();
    if m.rows() != n || m.cols() != n {
        return Err(Error::Shape(format!("{what} is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
    }
    if let Some(i) = m.entries().iter().filter_map(Expr::max_var).max() {
        if i >= chart.len() {
            return Err(ChartError::UnknownCoordinate(format!("#{i}")).into());
        }
    }
    Ok(())
}

/// Parses an `n × n` matrix of expression texts over `chart`.
pub fn parse_matrix(rows: &[Vec<String>], chart: CoordinateChart) -> Result<ExprMatrix, Error> {
    let n = chart.dim();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(format!("expected a {n}x{n} matrix")));
    }
    let mut out = ExprMatrix::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        for (j, src) in r.iter().enumerate() {
            let e = crate::expr::parse_expr(src, &chart)?;
            out.set(i, j, e);
        }
    }
    Ok(out)
}

/// `C* = p_i ∂/∂p_i`, `θ = p_i dx^i` and the constant pairing `ω = dp_i ∧ dx^i`.
#[derive(Clone, Debug)]
pub struct CanonicalObjects {
    chart: CoordinateChart,
}

impl CanonicalObjects {
    pub fn new(chart: CoordinateChart) -> Result<Self, ChartError> {
        ensure_cotangent(chart)?;
        Ok(Self { chart })
    }

    /// The Liouville–Hamilton field.
    pub fn liouville(&self) -> PhaseVectorField {
        let n = self.chart.dim();
        let comps = (0..2 * n)
            .map(|a| if a < n { Expr::zero() } else { Expr::var(a) })
            .collect();
        PhaseVectorField::from_exprs(self.chart, comps)
    }

    /// The Liouville 1-form.
    pub fn theta(&self) -> OneForm {
        let n = self.chart.dim();
        let comps = (0..2 * n)
            .map(|a| if a < n { Expr::var(n + a) } else { Expr::zero() })
            .collect();
        OneForm::from_exprs(self.chart, comps)
    }

    /// Matrix `W` with `ω(X, Y) = Xᵀ W Y` in the flat coordinate frame.
    ///
    /// `ω = dθ` is taken as known rather than computed.
    pub fn omega_matrix<T: Scalar>(&self) -> Mat<T> {
        let n = self.chart.dim();
        Mat::from_fn(2 * n, 2 * n, |a, b| {
            if a >= n && b == a - n {
                T::one()
            } else if a < n && b == a + n {
                -T::one()
            } else {
                T::zero()
            }
        })
    }

    /// `ω(X, Y) = X^{p_i} Y^{x^i} − X^{x^i} Y^{p_i}` on numeric components.
    pub fn omega<T: Scalar>(&self, x: &[T], y: &[T]) -> T {
        let n = self.chart.dim();
        (0..n).fold(T::zero(), |acc, i| acc + x[n + i] * y[i] - x[i] * y[n + i])
    }
}

/// `{f, g} = ∂f/∂p_i ∂g/∂x^i − ∂g/∂p_i ∂f/∂x^i`.
pub fn poisson_bracket(f: &ScalarField, g: &ScalarField) -> Result<ScalarField, ChartError> {
    f.chart().ensure_same(&g.chart())?;
    ensure_cotangent(f.chart())?;
    Ok(ScalarField::from_parts(poisson(f.expr(), g.expr(), f.chart().dim()), f.chart()))
}

pub(crate) fn poisson(f: &Expr, g: &Expr, n: usize) -> Expr {
    let terms: Vec<Expr> = (0..n)
        .map(|i| f.diff(n + i) * g.diff(i) - g.diff(n + i) * f.diff(i))
        .collect();
    Expr::sum(&terms)
}

/// Nonlinear connection coefficients `N_ij` on a cotangent chart.
#[derive(Clone, Debug)]
pub struct NonlinearConnection {
    chart: CoordinateChart,
    n: ExprMatrix,
}

impl NonlinearConnection {
    pub fn new(chart: CoordinateChart, coefficients: ExprMatrix) -> Result<Self, Error> {
        ensure_cotangent(chart)?;
        ensure_square(&coefficients, chart, "connection")?;
        Ok(Self { chart, n: coefficients })
    }

    pub fn parse(rows: &[Vec<String>], chart: CoordinateChart) -> Result<Self, Error> {
        Self::new(chart, parse_matrix(rows, chart)?)
    }

    pub(crate) fn from_matrix(chart: CoordinateChart, n: ExprMatrix) -> Self {
        Self { chart, n }
    }

    pub fn flat(chart: CoordinateChart) -> Result<Self, Error> {
        Self::new(chart, ExprMatrix::zeros(chart.dim(), chart.dim()))
    }

    pub fn chart(&self) -> CoordinateChart {
        self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn coefficients(&self) -> &ExprMatrix {
        &self.n
    }

    pub fn coefficient(&self, i: usize, j: usize) -> &Expr {
        self.n.get(i, j)
    }

    /// Same connection with `delta` added to `N_ij`.
    pub fn with_offset(&self, i: usize, j: usize, delta: f64) -> Self {
        let mut n = self.n.clone();
        n.set(i, j, self.n.get(i, j) + delta);
        Self::from_matrix(self.chart, n)
    }

    /// `τ_ij = ½(N_ij − N_ji)`.
    pub fn antisymmetric_part(&self) -> ExprMatrix {
        let d = self.dim();
        ExprMatrix::from_fn(d, d, |i, j| (self.n.get(i, j) - self.n.get(j, i)) * 0.5)
    }

    /// `δ/δx^i`.
    pub fn adapted_frame(&self) -> Vec<PhaseVectorField> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let comps = (0..2 * d)
                    .map(|a| {
                        if a < d {
                            if a == i { Expr::one() } else { Expr::zero() }
                        } else {
                            self.n.get(i, a - d).clone()
                        }
                    })
                    .collect();
                PhaseVectorField::from_exprs(self.chart, comps)
            })
            .collect()
    }

    /// `∂/∂p_i`.
    pub fn vertical_frame(&self) -> Vec<PhaseVectorField> {
        (0..self.dim())
            .map(|i| PhaseVectorField::coordinate(self.chart, self.dim() + i))
            .collect()
    }

    /// Coframe `δp_j = dp_j − N_ij dx^i`, dual to `(δ/δx^i, ∂/∂p_j)`.
    pub fn adapted_coframe(&self) -> Vec<OneForm> {
        let d = self.dim();
        (0..d)
            .map(|j| {
                let comps = (0..2 * d)
                    .map(|a| {
                        if a < d {
                            -self.n.get(a, j)
                        } else if a == d + j {
                            Expr::one()
                        } else {
                            Expr::zero()
                        }
                    })
                    .collect();
                OneForm::from_exprs(self.chart, comps)
            })
            .collect()
    }

    /// `δf/δx^i = ∂f/∂x^i + N_ij ∂f/∂p_j`.
    pub fn delta(&self, i: usize, f: &Expr) -> Expr {
        let d = self.dim();
        let mut terms = vec![f.diff(i)];
        terms.extend((0..d).map(|j| self.n.get(i, j) * f.diff(d + j)));
        Expr::sum(&terms)
    }

    /// Horizontal projector `h = δ/δx^i ⊗ dx^i`.
    pub fn horizontal(&self) -> FullTensor11 {
        let d = self.dim();
        FullTensor11::from_matrix(
            self.chart,
            ExprMatrix::from_fn(2 * d, 2 * d, |a, b| match (a < d, b < d) {
                (true, true) if a == b => Expr::one(),
                (false, true) => self.n.get(b, a - d).clone(),
                _ => Expr::zero(),
            }),
        )
    }

    /// Vertical projector `v = ∂/∂p_i ⊗ δp_i = Id − h`.
    pub fn vertical(&self) -> FullTensor11 {
        let d = self.dim();
        FullTensor11::from_matrix(
            self.chart,
            ExprMatrix::from_fn(2 * d, 2 * d, |a, b| match (a < d, b < d) {
                (false, false) if a == b => Expr::one(),
                (false, true) => -self.n.get(b, a - d),
                _ => Expr::zero(),
            }),
        )
    }

    /// The almost product structure `h − v`.
    pub fn n_tensor(&self) -> FullTensor11 {
        self.horizontal().sub(&self.vertical())
    }

    /// Places an `n × n` matrix `M_ij` as the tensor `M_ij dx^i ⊗ ∂/∂p_j`.
    pub fn lower_block(&self, m: &ExprMatrix) -> FullTensor11 {
        lower_block(self.chart, m)
    }
}

pub(crate) fn lower_block(chart: CoordinateChart, m: &ExprMatrix) -> FullTensor11 {
    let d = chart.dim();
    FullTensor11::from_matrix(
        chart,
        ExprMatrix::from_fn(2 * d, 2 * d, |a, b| {
            if a >= d && b < d {
                m.get(b, a - d).clone()
            } else {
                Expr::zero()
            }
        }),
    )
}

/// Reads `M_ij` back out of a tensor `M_ij dx^i ⊗ ∂/∂p_j`.
pub(crate) fn read_lower_block(t: &FullTensor11) -> ExprMatrix {
    let d = t.chart().dim();
    ExprMatrix::from_fn(d, d, |i, j| t.entry(d + j, i).clone())
}

/// Components `A[i][j][k]` of a d-tensor with three lower indices.
#[derive(Clone, Debug)]
pub struct DTensor3 {
    n: usize,
    comps: Vec<Expr>,
}

impl DTensor3 {
    fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> Expr) -> Self {
        let mut comps = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    comps.push(f(i, j, k));
                }
            }
        }
        Self { n, comps }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Expr {
        &self.comps[(i * self.n + j) * self.n + k]
    }

    /// Row-major `[i][j][k]` order.
    pub fn entries(&self) -> &[Expr] {
        &self.comps
    }

    pub fn eval<T: Scalar>(&self, ev: &mut Evaluator<'_, T>) -> Result<Vec<T>, crate::expr::EvalError> {
        ev.eval_all(&self.comps)
    }
}

/// `R_ijk = δN_jk/δx^i − δN_ik/δx^j`.
pub fn curvature_components(conn: &NonlinearConnection) -> DTensor3 {
    DTensor3::from_fn(conn.dim(), |i, j, k| {
        if i == j {
            Expr::zero()
        } else {
            conn.delta(i, conn.coefficient(j, k)) - conn.delta(j, conn.coefficient(i, k))
        }
    })
}

/// Intrinsic curvature `Ω = −½[h,h]` evaluated on `(δ/δx^i, δ/δx^j)`;
/// entry `[i][j][k]` is the `∂/∂p_k` component.
pub fn intrinsic_curvature(conn: &NonlinearConnection) -> DTensor3 {
    let d = conn.dim();
    let frame = conn.adapted_frame();
    let nh = nijenhuis(&conn.horizontal());
    let mut values = vec![Vec::new(); d * d];
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let v = nh.apply(&frame[i], &frame[j]).expect("same chart");
                values[i * d + j] = v.components()[d..].iter().map(|c| -c).collect();
            }
        }
    }
    DTensor3::from_fn(d, |i, j, k| if i == j { Expr::zero() } else { values[i * d + j][k].clone() })
}

/// Tension `p_k ∂N_ij/∂p_k − N_ij`.
pub fn tension(conn: &NonlinearConnection) -> ExprMatrix {
    let d = conn.dim();
    ExprMatrix::from_fn(d, d, |i, j| euler(conn.coefficient(i, j), d) - conn.coefficient(i, j))
}

/// `p_k ∂f/∂p_k`.
pub(crate) fn euler(f: &Expr, d: usize) -> Expr {
    let terms: Vec<Expr> = (0..d).map(|k| Expr::var(d + k) * f.diff(d + k)).collect();
    Expr::sum(&terms)
}

/// Intrinsic tension `½ L_{C*}(h − v)`, read off its `dx ⊗ ∂/∂p` block.
pub fn intrinsic_tension(conn: &NonlinearConnection) -> ExprMatrix {
    let c = CanonicalObjects { chart: conn.chart }.liouville();
    let l = crate::frame::lie_derivative(&c, &conn.n_tensor()).scale(0.5);
    read_lower_block(&l)
}

/// An adapted almost tangent structure `J = t_ij dx^i ⊗ ∂/∂p_j`.
///
/// Both `t_ij` and its inverse `t^ij` (with `t_ij t^jk = δ_i^k`) are kept
/// symbolically.
#[derive(Clone, Debug)]
pub struct AdaptedTangentStructure {
    chart: CoordinateChart,
    lower: ExprMatrix,
    upper: ExprMatrix,
}

impl AdaptedTangentStructure {
    /// From the lower-index coefficients `t_ij`.
    pub fn from_lower(chart: CoordinateChart, t: ExprMatrix) -> Result<Self, Error> {
        ensure_cotangent(chart)?;
        ensure_square(&t, chart, "tangent structure")?;
        let upper = t.inverse();
        Ok(Self { chart, lower: t, upper })
    }

    /// From the upper-index coefficients `t^ij`.
    pub fn from_upper(chart: CoordinateChart, t_inv: ExprMatrix) -> Result<Self, Error> {
        ensure_cotangent(chart)?;
        ensure_square(&t_inv, chart, "tangent structure")?;
        let lower = t_inv.inverse();
        Ok(Self {
            chart,
            lower,
            upper: t_inv,
        })
    }

    pub fn parse(rows: &[Vec<String>], chart: CoordinateChart) -> Result<Self, Error> {
        Self::from_lower(chart, parse_matrix(rows, chart)?)
    }

    /// `t_ij = δ_ij`.
    pub fn identity(chart: CoordinateChart) -> Result<Self, Error> {
        ensure_cotangent(chart)?;
        let d = chart.dim();
        Ok(Self {
            chart,
            lower: ExprMatrix::identity(d),
            upper: ExprMatrix::identity(d),
        })
    }

    pub fn chart(&self) -> CoordinateChart {
        self.chart
    }

    pub fn lower(&self) -> &ExprMatrix {
        &self.lower
    }

    pub fn upper(&self) -> &ExprMatrix {
        &self.upper
    }

    pub fn tensor(&self) -> FullTensor11 {
        lower_block(self.chart, &self.lower)
    }

    /// Fails at the first point where `|det t_ij| < floor`.
    pub fn check_regular<T: Scalar>(&self, pts: &[ChartPoint<T>], floor: f64) -> Result<(), Error> {
        check_regular(&self.lower, "tangent structure t_ij", pts, floor)
    }
}

pub(crate) fn check_regular<T: Scalar>(
    m: &ExprMatrix,
    what: &'static str,
    pts: &[ChartPoint<T>],
    floor: f64,
) -> Result<(), Error> {
    for pt in pts {
        let v = m.eval_at(pt.coords()).map_err(|e| at_point(pt, e))?;
        let det = v.det().to_f64_lossy();
        if !(det.abs() >= floor) {
            return Err(Error::Singular {
                what,
                point: pt.coords().iter().map(|c| c.to_f64_lossy()).collect(),
                det,
                floor,
            });
        }
    }
    Ok(())
}

/// `T_ijk = t_is ∂N_jk/∂p_s − t_js ∂N_ik/∂p_s + δt_jk/δx^i − δt_ik/δx^j`.
pub fn torsion(j: &AdaptedTangentStructure, conn: &NonlinearConnection) -> Result<DTensor3, ChartError> {
    j.chart.ensure_same(&conn.chart)?;
    let d = conn.dim();
    let t = &j.lower;
    Ok(DTensor3::from_fn(d, |a, b, k| {
        if a == b {
            return Expr::zero();
        }
        let mut terms = Vec::with_capacity(2 * d + 2);
        for s in 0..d {
            terms.push(t.get(a, s) * conn.coefficient(b, k).diff(d + s));
            terms.push(-(t.get(b, s) * conn.coefficient(a, k).diff(d + s)));
        }
        terms.push(conn.delta(a, t.get(b, k)));
        terms.push(-conn.delta(b, t.get(a, k)));
        Expr::sum(&terms)
    }))
}

/// Intrinsic torsion `[J, h]` on `(∂/∂x^i, ∂/∂x^j)`; entry `[i][j][k]` is
/// the `∂/∂p_k` component.
pub fn intrinsic_torsion(j: &AdaptedTangentStructure, conn: &NonlinearConnection) -> Result<DTensor3, ChartError> {
    j.chart.ensure_same(&conn.chart)?;
    let d = conn.dim();
    let form = fn_bracket_11(&j.tensor(), &conn.horizontal())?;
    let mut values = vec![Vec::new(); d * d];
    for a in 0..d {
        for b in 0..d {
            if a != b {
                let v = form.apply(
                    &PhaseVectorField::coordinate(conn.chart, a),
                    &PhaseVectorField::coordinate(conn.chart, b),
                )?;
                values[a * d + b] = v.components()[d..].to_vec();
            }
        }
    }
    Ok(DTensor3::from_fn(d, |a, b, k| if a == b { Expr::zero() } else { values[a * d + b][k].clone() }))
}

/// Strong torsion `𝕋_jk = ξ^i T_ijk + N_jk − p_s ∂N_jk/∂p_s`.
pub fn strong_torsion(
    rho: &PhaseVectorField,
    j: &AdaptedTangentStructure,
    conn: &NonlinearConnection,
) -> Result<ExprMatrix, ChartError> {
    rho.chart().ensure_same(&conn.chart)?;
    let t = torsion(j, conn)?;
    let tens = tension(conn);
    let d = conn.dim();
    Ok(ExprMatrix::from_fn(d, d, |b, k| {
        let mut terms: Vec<Expr> = (0..d).map(|a| &rho.xi()[a] * t.get(a, b, k)).collect();
        terms.push(-tens.get(b, k));
        Expr::sum(&terms)
    }))
}

/// Intrinsic strong torsion `i_ρ[J,h] − ½ L_{C*}(h − v)` on `∂/∂x^j`.
pub fn intrinsic_strong_torsion(
    rho: &PhaseVectorField,
    j: &AdaptedTangentStructure,
    conn: &NonlinearConnection,
) -> Result<ExprMatrix, ChartError> {
    rho.chart().ensure_same(&conn.chart)?;
    let d = conn.dim();
    let form = fn_bracket_11(&j.tensor(), &conn.horizontal())?;
    let tens = intrinsic_tension(conn);
    let mut m = ExprMatrix::zeros(d, d);
    for b in 0..d {
        let v = form.apply(rho, &PhaseVectorField::coordinate(conn.chart, b))?;
        for k in 0..d {
            m.set(b, k, &v.components()[d + k] - tens.get(b, k));
        }
    }
    Ok(m)
}

/// Maximum residuals of the adapted-tangent-structure properties.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentDiagnostics<T> {
    /// `∂t^ij/∂p_k − ∂t^kj/∂p_i`.
    pub integrability: Residual<T>,
    /// `p_k ∂t_ij/∂p_k`.
    pub homogeneity: Residual<T>,
    /// `t_ij − t_ji`.
    pub symmetry: Residual<T>,
    /// `t^ij − g^ij`, when a metric is supplied.
    pub metric: Option<Residual<T>>,
}

/// Symbolic residual families behind [`TangentDiagnostics`].
pub struct TangentResiduals {
    pub integrability: Vec<Expr>,
    pub homogeneity: Vec<Expr>,
    pub symmetry: Vec<Expr>,
    pub metric: Option<Vec<Expr>>,
}

pub fn tangent_structure_residuals(j: &AdaptedTangentStructure, g_upper: Option<&ExprMatrix>) -> TangentResiduals {
    let d = j.chart.dim();
    let mut integrability = Vec::new();
    for a in 0..d {
        for b in 0..d {
            for k in 0..d {
                if a < k {
                    integrability.push(j.upper.get(a, b).diff(d + k) - j.upper.get(k, b).diff(d + a));
                }
            }
        }
    }
    let homogeneity = j.lower.entries().iter().map(|t| euler(t, d)).collect();
    let mut symmetry = Vec::new();
    for a in 0..d {
        for b in (a + 1)..d {
            symmetry.push(j.lower.get(a, b) - j.lower.get(b, a));
        }
    }
    let metric = g_upper.map(|g| j.upper.entries().iter().zip(g.entries()).map(|(t, g)| t - g).collect());
    TangentResiduals {
        integrability,
        homogeneity,
        symmetry,
        metric,
    }
}

pub fn tangent_structure_diagnostics<T: Scalar>(
    j: &AdaptedTangentStructure,
    g_upper: Option<&ExprMatrix>,
    pts: &[ChartPoint<T>],
) -> Result<TangentDiagnostics<T>, Error> {
    j.check_regular(pts, REGULARITY_FLOOR)?;
    let r = tangent_structure_residuals(j, g_upper);
    Ok(TangentDiagnostics {
        integrability: max_abs_residual(&r.integrability, pts)?,
        homogeneity: max_abs_residual(&r.homogeneity, pts)?,
        symmetry: max_abs_residual(&r.symmetry, pts)?,
        metric: r.metric.map(|m| max_abs_residual(&m, pts)).transpose()?,
    })
}

/// `[δ/δx^i, δ/δx^j]`, `[δ/δx^i, ∂/∂p_j]` symbolically, for cross-checks
/// against closed forms.
pub fn adapted_brackets(conn: &NonlinearConnection) -> (Vec<PhaseVectorField>, Vec<PhaseVectorField>) {
    let frame = conn.adapted_frame();
    let vert = conn.vertical_frame();
    let d = conn.dim();
    let mut hh = Vec::new();
    let mut hv = Vec::new();
    for i in 0..d {
        for j in 0..d {
            hh.push(bracket(&frame[i], &frame[j]));
            hv.push(bracket(&frame[i], &vert[j]));
        }
    }
    (hh, hv)
}
