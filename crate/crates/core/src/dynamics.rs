//! J-regular vector fields and the structures they induce: the canonical
//! nonlinear connection, the dynamical covariant derivative, the Jacobi
//! endomorphism and the almost complex structure.
//!
//! Each closed coordinate formula is paired with the intrinsic operator
//! composition it abbreviates. The intrinsic version is the reference; the
//! closed forms are kept as printed so disagreements can be reported.

use crate::cotangent::{euler, lower_block, read_lower_block, AdaptedTangentStructure, CanonicalObjects, NonlinearConnection};
use crate::cotangent::{curvature_components, REGULARITY_FLOOR};
use crate::expr::{ChartError, ChartPoint, Expr, ExprMatrix};
use crate::frame::{bracket, lie_derivative, FullTensor11, OneForm, PhaseVectorField};
use crate::sampling::{max_abs_residual, Residual};
use crate::scalar::Scalar;
use crate::Error;

/// A vector field `ρ = ξ^i ∂/∂x^i + χ_i ∂/∂p_i` paired with an adapted
/// tangent structure `J`.
#[derive(Clone, Debug)]
pub struct JRegularField {
    rho: PhaseVectorField,
    j: AdaptedTangentStructure,
}

impl JRegularField {
    /// Pairs the two; regularity itself is measured, not enforced.
    pub fn new(rho: PhaseVectorField, j: AdaptedTangentStructure) -> Result<Self, ChartError> {
        rho.chart().ensure_same(&j.chart())?;
        Ok(Self { rho, j })
    }

    pub fn rho(&self) -> &PhaseVectorField {
        &self.rho
    }

    pub fn tangent_structure(&self) -> &AdaptedTangentStructure {
        &self.j
    }

    fn dim(&self) -> usize {
        self.rho.chart().dim()
    }

    /// `t^ij − ∂ξ^j/∂p_i`.
    pub fn regularity_residuals(&self) -> Vec<Expr> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.j.upper().get(i, j) - self.rho.xi()[j].diff(d + i));
            }
        }
        out
    }

    /// Components of `J[ρ, JX] + JX` over all coordinate frame fields `X`.
    pub fn intrinsic_regularity_residuals(&self) -> Vec<Expr> {
        let jt = self.j.tensor();
        PhaseVectorField::coordinate_frame(self.rho.chart())
            .iter()
            .flat_map(|e| {
                let je = jt.apply(e);
                jt.apply(&bracket(&self.rho, &je)).add(&je).components().to_vec()
            })
            .collect()
    }

    /// Worst `|t^ij − ∂ξ^j/∂p_i|` over the points.
    pub fn regularity_residual<T: Scalar>(&self, pts: &[ChartPoint<T>]) -> Result<Residual<T>, Error> {
        self.j.check_regular(pts, REGULARITY_FLOOR)?;
        max_abs_residual(&self.regularity_residuals(), pts)
    }

    /// `Jρ − C*`, fiber components `ξ^i t_ij − p_j`.
    pub fn liouville_residuals(&self) -> Vec<Expr> {
        let d = self.dim();
        (0..d)
            .map(|j| {
                let terms: Vec<Expr> = (0..d).map(|i| &self.rho.xi()[i] * self.j.lower().get(i, j)).collect();
                Expr::sum(&terms) - Expr::var(d + j)
            })
            .collect()
    }

    /// The connection `N_ij = ½(t_ik ∂χ_j/∂p_k − t_kj ∂ξ^k/∂x^i − ρ(t_ij))`.
    pub fn canonical_connection(&self) -> NonlinearConnection {
        let d = self.dim();
        let t = self.j.lower();
        let (xi, chi) = (self.rho.xi(), self.rho.chi());
        let n = ExprMatrix::from_fn(d, d, |i, j| {
            let mut terms = Vec::with_capacity(2 * d + 1);
            for k in 0..d {
                terms.push(t.get(i, k) * chi[j].diff(d + k));
                terms.push(-(t.get(k, j) * xi[k].diff(i)));
            }
            terms.push(-self.rho.derive(t.get(i, j)));
            Expr::sum(&terms) * 0.5
        });
        NonlinearConnection::from_matrix(self.rho.chart(), n)
    }

    /// Same as [`canonical_connection`](Self::canonical_connection) but
    /// refuses fields whose regularity residual exceeds `tol`.
    pub fn canonical_connection_checked<T: Scalar>(
        &self,
        pts: &[ChartPoint<T>],
        tol: f64,
    ) -> Result<NonlinearConnection, Error> {
        let r = self.regularity_residual(pts)?;
        if !(r.max_abs.to_f64_lossy() <= tol) {
            return Err(Error::NotRegular {
                residual: r.max_abs.to_f64_lossy(),
                tolerance: tol,
            });
        }
        Ok(self.canonical_connection())
    }

    /// `−½ L_ρJ` read off its `dx ⊗ ∂/∂p` block; coincides with
    /// [`canonical_connection`](Self::canonical_connection) for J-regular `ρ`.
    pub fn intrinsic_canonical_connection(&self) -> NonlinearConnection {
        let l = lie_derivative(&self.rho, &self.j.tensor()).scale(-0.5);
        NonlinearConnection::from_matrix(self.rho.chart(), read_lower_block(&l))
    }

    /// Entries of `L_ρJ + h − v`; all vanish iff `N` is canonical for `ρ`.
    pub fn connection_identity_residuals(&self, conn: &NonlinearConnection) -> Vec<Expr> {
        lie_derivative(&self.rho, &self.j.tensor())
            .add(&conn.n_tensor())
            .matrix()
            .entries()
            .to_vec()
    }

    /// Entries of `h∘L_ρ∘J + h` and `J∘L_ρ∘v + v` on the coordinate frame.
    pub fn compatibility_residuals(&self, conn: &NonlinearConnection) -> (Vec<Expr>, Vec<Expr>) {
        let (h, v, jt) = (conn.horizontal(), conn.vertical(), self.j.tensor());
        let frame = PhaseVectorField::coordinate_frame(self.rho.chart());
        let mut first = Vec::new();
        let mut second = Vec::new();
        for e in &frame {
            first.extend_from_slice(h.apply(&bracket(&self.rho, &jt.apply(e))).add(&h.apply(e)).components());
            second.extend_from_slice(jt.apply(&bracket(&self.rho, &v.apply(e))).add(&v.apply(e)).components());
        }
        (first, second)
    }
}

/// Residual expressions of the three (semi-)Hamiltonian conditions.
#[derive(Clone, Debug)]
pub struct HamiltonianResiduals {
    /// `∂ξ^j/∂p_i − ∂ξ^i/∂p_j`.
    pub a: Vec<Expr>,
    /// `∂χ_i/∂p_j + ∂ξ^j/∂x^i`.
    pub b: Vec<Expr>,
    /// `∂χ_i/∂x^j − ∂χ_j/∂x^i`.
    pub c: Vec<Expr>,
}

/// Which of the conditions hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianClass {
    Hamiltonian,
    SemiHamiltonian,
    Neither,
}

impl HamiltonianClass {
    pub fn classify(a: f64, b: f64, c: f64, tol: f64) -> Self {
        match (a <= tol && b <= tol, c <= tol) {
            (true, true) => HamiltonianClass::Hamiltonian,
            (true, false) => HamiltonianClass::SemiHamiltonian,
            _ => HamiltonianClass::Neither,
        }
    }
}

pub fn hamiltonian_residuals(rho: &PhaseVectorField) -> HamiltonianResiduals {
    let d = rho.chart().dim();
    let (xi, chi) = (rho.xi(), rho.chi());
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut c = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i < j {
                a.push(xi[j].diff(d + i) - xi[i].diff(d + j));
                c.push(chi[i].diff(j) - chi[j].diff(i));
            }
            b.push(chi[i].diff(d + j) + xi[j].diff(i));
        }
    }
    HamiltonianResiduals { a, b, c }
}

/// Max residuals `(a, b, c)` of the (semi-)Hamiltonian conditions.
pub fn hamiltonian_conditions<T: Scalar>(
    rho: &PhaseVectorField,
    pts: &[ChartPoint<T>],
) -> Result<[Residual<T>; 3], Error> {
    let r = hamiltonian_residuals(rho);
    Ok([
        max_abs_residual(&r.a, pts)?,
        max_abs_residual(&r.b, pts)?,
        max_abs_residual(&r.c, pts)?,
    ])
}

/// The dynamical covariant derivative `∇ = h∘L_ρ∘h + v∘L_ρ∘v`.
#[derive(Clone, Debug)]
pub struct DynCovDerivative {
    rho: PhaseVectorField,
    conn: NonlinearConnection,
    h: FullTensor11,
    v: FullTensor11,
}

impl DynCovDerivative {
    pub fn new(rho: &PhaseVectorField, conn: &NonlinearConnection) -> Result<Self, ChartError> {
        rho.chart().ensure_same(&conn.chart())?;
        Ok(Self {
            rho: rho.clone(),
            conn: conn.clone(),
            h: conn.horizontal(),
            v: conn.vertical(),
        })
    }

    pub fn connection(&self) -> &NonlinearConnection {
        &self.conn
    }

    /// `∇f = ρ(f)`.
    pub fn scalar(&self, f: &Expr) -> Expr {
        self.rho.derive(f)
    }

    /// `∇X = h[ρ, hX] + v[ρ, vX]`.
    pub fn vector(&self, x: &PhaseVectorField) -> PhaseVectorField {
        self.h
            .apply(&bracket(&self.rho, &self.h.apply(x)))
            .add(&self.v.apply(&bracket(&self.rho, &self.v.apply(x))))
    }

    /// `(∇φ)(X) = ρ(φ(X)) − φ(∇X)`.
    pub fn one_form(&self, phi: &OneForm) -> OneForm {
        let comps = PhaseVectorField::coordinate_frame(self.rho.chart())
            .iter()
            .map(|e| self.rho.derive(&phi.contract(e)) - phi.contract(&self.vector(e)))
            .collect();
        OneForm::from_exprs(self.rho.chart(), comps)
    }

    /// `(∇A)(X) = ∇(AX) − A(∇X)`.
    pub fn tensor(&self, a: &FullTensor11) -> FullTensor11 {
        let cols: Vec<PhaseVectorField> = PhaseVectorField::coordinate_frame(self.rho.chart())
            .iter()
            .map(|e| self.vector(&a.apply(e)).sub(&a.apply(&self.vector(e))))
            .collect();
        FullTensor11::from_columns(self.rho.chart(), &cols)
    }

    /// Closed forms of `∇(δ/δx^j)` and `∇(∂/∂p_j)` for `J` with inverse `t^ij`.
    pub fn frame_action_closed_forms(&self, j: &AdaptedTangentStructure) -> (Vec<PhaseVectorField>, Vec<PhaseVectorField>) {
        let d = self.conn.dim();
        let frame = self.conn.adapted_frame();
        let (xi, chi) = (self.rho.xi(), self.rho.chi());
        let horizontal = (0..d)
            .map(|jj| {
                let mut acc = PhaseVectorField::zero(self.rho.chart());
                for i in 0..d {
                    acc = acc.sub(&frame[i].scale(&self.conn.delta(jj, &xi[i])));
                }
                acc
            })
            .collect();
        let vertical = (0..d)
            .map(|jj| {
                let mut comps = vec![Expr::zero(); 2 * d];
                for k in 0..d {
                    let mut terms: Vec<Expr> =
                        (0..d).map(|i| j.upper().get(jj, i) * self.conn.coefficient(i, k)).collect();
                    terms.push(-chi[k].diff(d + jj));
                    comps[d + k] = Expr::sum(&terms);
                }
                PhaseVectorField::from_exprs(self.rho.chart(), comps)
            })
            .collect();
        (horizontal, vertical)
    }
}

/// The Jacobi endomorphism `Φ = v∘L_ρh = R_ij dx^i ⊗ ∂/∂p_j`.
#[derive(Clone, Debug)]
pub struct JacobiEndomorphism {
    /// `R_ij` from the operator composition.
    pub intrinsic: ExprMatrix,
    /// `R_jk = (δξ^i/δx^j) N_ik − δχ_k/δx^j + ρ(N_jk)`.
    pub closed_form: ExprMatrix,
    /// The full tensor `v∘L_ρh`.
    pub tensor: FullTensor11,
}

pub fn jacobi_endomorphism(rho: &PhaseVectorField, conn: &NonlinearConnection) -> Result<JacobiEndomorphism, ChartError> {
    rho.chart().ensure_same(&conn.chart())?;
    let d = conn.dim();
    let tensor = conn.vertical().compose(&lie_derivative(rho, &conn.horizontal()));
    let intrinsic = read_lower_block(&tensor);
    let (xi, chi) = (rho.xi(), rho.chi());
    let closed_form = ExprMatrix::from_fn(d, d, |j, k| {
        let mut terms: Vec<Expr> = (0..d).map(|i| conn.delta(j, &xi[i]) * conn.coefficient(i, k)).collect();
        terms.push(-conn.delta(j, &chi[k]));
        terms.push(rho.derive(conn.coefficient(j, k)));
        Expr::sum(&terms)
    });
    Ok(JacobiEndomorphism {
        intrinsic,
        closed_form,
        tensor,
    })
}

/// Residuals of the decomposition `Φ = i_ρΩ' + v∘L_{vρ}h`, entry by entry.
///
/// `sign` selects `Ω' = sign · ½[h,h]`: `+1` is the form `Ω(ρ,X) = v[hρ,hX]`,
/// `−1` is `Ω = −½[h,h]`.
pub fn decomposition_residuals(rho: &PhaseVectorField, conn: &NonlinearConnection, sign: f64) -> Result<Vec<Expr>, ChartError> {
    let phi = jacobi_endomorphism(rho, conn)?.tensor;
    let (h, v) = (conn.horizontal(), conn.vertical());
    let half_hh = crate::frame::nijenhuis(&h);
    let vrho = v.apply(rho);
    let tail = v.compose(&lie_derivative(&vrho, &h));
    let mut out = Vec::new();
    for (b, e) in PhaseVectorField::coordinate_frame(rho.chart()).iter().enumerate() {
        let omega = half_hh.apply(rho, e)?.scale(&Expr::constant(sign));
        let lhs = phi.column(b);
        out.extend_from_slice(lhs.sub(&omega).sub(&tail.column(b)).components());
    }
    Ok(out)
}

/// `R_ij − ξ^k R_kij` for the horizontal field `ξ^i δ/δx^i`, using the
/// curvature of `conn`.
pub fn horizontal_jacobi_residuals(rho: &PhaseVectorField, conn: &NonlinearConnection) -> Result<Vec<Expr>, ChartError> {
    let hr = horizontal_part(rho, conn);
    let jac = jacobi_endomorphism(&hr, conn)?;
    let r = curvature_components(conn);
    let d = conn.dim();
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let terms: Vec<Expr> = (0..d).map(|k| &rho.xi()[k] * r.get(k, i, j)).collect();
            out.push(jac.intrinsic.get(i, j) - Expr::sum(&terms));
        }
    }
    Ok(out)
}

/// `hρ = ξ^i δ/δx^i`.
pub fn horizontal_part(rho: &PhaseVectorField, conn: &NonlinearConnection) -> PhaseVectorField {
    conn.horizontal().apply(rho)
}

/// Closed forms of `[ρ, ∂/∂p_j]` and `[ρ, δ/δx^j]` as printed:
/// `−t^ij δ/δx^i + (t^ij N_ik − ∂χ_k/∂p_j) ∂/∂p_k` and
/// `−(δξ^i/δx^j) δ/δx^i + R_jk ∂/∂p_k`.
pub fn frame_bracket_closed_forms(
    rho: &JRegularField,
    conn: &NonlinearConnection,
) -> Result<(Vec<PhaseVectorField>, Vec<PhaseVectorField>), ChartError> {
    let d = conn.dim();
    let chart = conn.chart();
    let frame = conn.adapted_frame();
    let t = rho.j.upper();
    let (xi, chi) = (rho.rho.xi(), rho.rho.chi());
    let jac = jacobi_endomorphism(&rho.rho, conn)?;
    let vertical = (0..d)
        .map(|j| {
            let mut acc = PhaseVectorField::zero(chart);
            for i in 0..d {
                acc = acc.sub(&frame[i].scale(t.get(i, j)));
            }
            let mut comps = vec![Expr::zero(); 2 * d];
            for k in 0..d {
                let mut terms: Vec<Expr> = (0..d).map(|i| t.get(i, j) * conn.coefficient(i, k)).collect();
                terms.push(-chi[k].diff(d + j));
                comps[d + k] = Expr::sum(&terms);
            }
            acc.add(&PhaseVectorField::from_exprs(chart, comps))
        })
        .collect();
    let horizontal = (0..d)
        .map(|j| {
            let mut acc = PhaseVectorField::zero(chart);
            for i in 0..d {
                acc = acc.sub(&frame[i].scale(&conn.delta(j, &xi[i])));
            }
            let mut comps = vec![Expr::zero(); 2 * d];
            for k in 0..d {
                comps[d + k] = jac.closed_form.get(j, k).clone();
            }
            acc.add(&PhaseVectorField::from_exprs(chart, comps))
        })
        .collect();
    Ok((vertical, horizontal))
}

/// The almost complex structure in both forms.
#[derive(Clone, Debug)]
pub struct AlmostComplex {
    /// `F = h∘L_ρh − J`.
    pub intrinsic: FullTensor11,
    /// `F = t^ij δ/δx^i ⊗ δp_j − t_ij ∂/∂p_i ⊗ dx^j`, as printed.
    pub local: FullTensor11,
}

pub fn almost_complex(rho: &JRegularField, conn: &NonlinearConnection) -> Result<AlmostComplex, ChartError> {
    rho.rho.chart().ensure_same(&conn.chart())?;
    let h = conn.horizontal();
    let jt = rho.j.tensor();
    let intrinsic = h.compose(&lie_derivative(&rho.rho, &h)).sub(&jt);

    let d = conn.dim();
    let chart = conn.chart();
    let frame = conn.adapted_frame();
    let coframe = conn.adapted_coframe();
    let (tu, tl) = (rho.j.upper(), rho.j.lower());
    let local = ExprMatrix::from_fn(2 * d, 2 * d, |a, b| {
        let mut terms = Vec::new();
        for i in 0..d {
            for j in 0..d {
                terms.push(tu.get(i, j) * &frame[i].components()[a] * &coframe[j].components()[b]);
            }
        }
        if a >= d && b < d {
            terms.push(-tl.get(a - d, b));
        }
        Expr::sum(&terms)
    });
    Ok(AlmostComplex {
        intrinsic,
        local: FullTensor11::from_matrix(chart, local),
    })
}

/// Named residual tensors of the almost-complex identity suite; each should
/// vanish when `N` is the canonical connection of `ρ`.
pub fn almost_complex_identities(
    rho: &JRegularField,
    conn: &NonlinearConnection,
    f: &FullTensor11,
) -> Result<Vec<(&'static str, FullTensor11)>, ChartError> {
    let chart = conn.chart();
    let id = FullTensor11::identity(chart);
    let (h, v, n) = (conn.horizontal(), conn.vertical(), conn.n_tensor());
    let j = rho.j.tensor();
    let phi = jacobi_endomorphism(&rho.rho, conn)?.tensor;
    let lrh = lie_derivative(&rho.rho, &h);
    let fj = f.add(&j);
    Ok(vec![
        ("F∘F + Id", f.compose(f).add(&id)),
        ("F∘J − h", f.compose(&j).sub(&h)),
        ("J∘F − v", j.compose(f).sub(&v)),
        ("v∘F + J", v.compose(f).add(&j)),
        ("F∘h + J", f.compose(&h).add(&j)),
        ("h∘F − F − J", h.compose(f).sub(&fj)),
        ("F∘v − F − J", f.compose(&v).sub(&fj)),
        ("N∘F − F − 2J", n.compose(f).sub(&fj).sub(&j)),
        ("Φ − L_ρh + F + J", phi.sub(&lrh).add(&fj)),
    ])
}

/// Columns of `∇X − [ρ,X] − FX − JX + ΦX` over the coordinate frame.
pub fn decomposition_check_residuals(
    rho: &JRegularField,
    conn: &NonlinearConnection,
    f: &FullTensor11,
) -> Result<Vec<Expr>, ChartError> {
    let nabla = DynCovDerivative::new(&rho.rho, conn)?;
    let phi = jacobi_endomorphism(&rho.rho, conn)?.tensor;
    let j = rho.j.tensor();
    let mut out = Vec::new();
    for e in PhaseVectorField::coordinate_frame(conn.chart()) {
        let r = nabla
            .vector(&e)
            .sub(&bracket(&rho.rho, &e))
            .sub(&f.apply(&e))
            .sub(&j.apply(&e))
            .add(&phi.apply(&e));
        out.extend_from_slice(r.components());
    }
    Ok(out)
}

/// The tension of a tangent structure's homogeneity, `p_k ∂t_ij/∂p_k`.
pub fn tangent_homogeneity(j: &AdaptedTangentStructure) -> Vec<Expr> {
    let d = j.chart().dim();
    j.lower().entries().iter().map(|t| euler(t, d)).collect()
}

/// `C*` for the chart of `rho`.
pub fn liouville_of(rho: &PhaseVectorField) -> PhaseVectorField {
    CanonicalObjects::new(rho.chart()).expect("cotangent chart").liouville()
}

/// `R_ij dx^i ⊗ ∂/∂p_j` as a tensor.
pub fn jacobi_tensor_from(conn: &NonlinearConnection, r: &ExprMatrix) -> FullTensor11 {
    lower_block(conn.chart(), r)
}
