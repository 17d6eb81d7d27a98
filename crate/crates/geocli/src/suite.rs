//! The invariant suite run by `geocli check`, in fixed registry order.

use cotangent::cotangent::{
    curvature_components, intrinsic_curvature, intrinsic_strong_torsion, intrinsic_tension, intrinsic_torsion,
    strong_torsion, tangent_structure_residuals, tension, torsion,
};
use cotangent::dynamics::{
    almost_complex, almost_complex_identities, decomposition_check_residuals, decomposition_residuals,
    frame_bracket_closed_forms, hamiltonian_residuals, horizontal_jacobi_residuals, jacobi_endomorphism,
    tangent_homogeneity, DynCovDerivative, HamiltonianClass,
};
use cotangent::expr::{ChartPoint, CoordinateChart, Expr, ScalarField};
use cotangent::frame::{lie_bracket, nijenhuis, FullTensor11, PhaseVectorField};
use cotangent::sampling::max_abs_residual;
use cotangent::Point;

use crate::error::CliError;
use crate::model::{Ingredients, Model};
use crate::report::{CheckRecord, CheckReport, Tolerances};

/// Step of the central differences in the gradient check.
pub const FD_STEP: f64 = 1e-5;

/// Runs every check against `count` points drawn with `seed`.
pub fn run_checks(model: &Model, seed: u64, count: usize, tol: Tolerances) -> Result<CheckReport, CliError> {
    let pts = model.sample(seed, count)?;
    let ing = model.ingredients(&pts)?;
    let mut report = CheckReport::new(&model.id, "check", seed, count, tol);
    let s = Suite {
        model,
        ing: &ing,
        pts: &pts,
        tol,
    };
    for rec in s.derivative_checks()? {
        report.push(rec);
    }
    for step in [
        Suite::projector_checks,
        Suite::curvature_checks,
        Suite::torsion_checks,
        Suite::tension_checks,
        Suite::tangent_structure_checks,
        Suite::regularity_checks,
        Suite::compatibility_checks,
        Suite::covariant_derivative_checks,
        Suite::almost_complex_checks,
        Suite::decomposition_checks,
        Suite::frame_bracket_checks,
        Suite::hamilton_connection_checks,
        Suite::hamiltonian_condition_checks,
        Suite::jacobi_decomposition_checks,
    ] {
        for rec in step(&s)? {
            report.push(rec);
        }
    }
    Ok(report)
}

type Records = Result<Vec<CheckRecord>, CliError>;

struct Suite<'a> {
    model: &'a Model,
    ing: &'a Ingredients,
    pts: &'a [Point],
    tol: Tolerances,
}

const CANONICAL_ONLY: &str = "holds for the canonical connection only; the model supplies its own";
const INDEX_FINDING: &str =
    "formula discrepancy: the closed form pairs t^ij where the intrinsic value needs t^ji; they agree only for symmetric t";

fn diff(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn tensor_entries(ts: &[FullTensor11]) -> Vec<Expr> {
    ts.iter().flat_map(|t| t.matrix().entries().iter().cloned()).collect()
}

fn field_entries(fs: &[PhaseVectorField]) -> Vec<Expr> {
    fs.iter().flat_map(|f| f.components().iter().cloned()).collect()
}

impl Suite<'_> {
    fn residual(&self, exprs: &[Expr]) -> Result<f64, CliError> {
        Ok(max_abs_residual(exprs, self.pts)?.max_abs)
    }

    fn record(&self, name: &str, anchor: &str, exprs: &[Expr], tolerance: f64) -> Result<CheckRecord, CliError> {
        Ok(CheckRecord::new(name, anchor, self.residual(exprs)?, tolerance, self.pts.len()))
    }

    fn chart(&self) -> CoordinateChart {
        self.model.chart
    }

    fn rho(&self) -> &PhaseVectorField {
        self.ing.field.rho()
    }

    fn j(&self) -> FullTensor11 {
        self.ing.field.tangent_structure().tensor()
    }

    fn conn(&self) -> &cotangent::cotangent::NonlinearConnection {
        &self.ing.connection
    }

    fn t_is_symmetric(&self) -> Result<bool, CliError> {
        let r = tangent_structure_residuals(self.ing.field.tangent_structure(), None);
        Ok(self.residual(&r.symmetry)? <= self.tol.symbolic)
    }

    /// Every expression the model file supplies, with its field name.
    fn sources(&self) -> Vec<(String, ScalarField)> {
        let m = self.model;
        let chart = self.chart();
        let mut out = Vec::new();
        if let Some(h) = &m.hamiltonian {
            out.push(("hamiltonian".to_string(), h.clone()));
        }
        if let Some(l) = &m.lagrangian {
            out.push(("lagrangian".to_string(), l.clone()));
        }
        let mut push_matrix = |name: &str, entries: &[Expr]| {
            let n = chart.dim();
            for (k, e) in entries.iter().enumerate() {
                let f = ScalarField::new(e.clone(), chart).expect("parsed on this chart");
                out.push((format!("{name}[{}][{}]", k / n, k % n), f));
            }
        };
        if let Some(c) = &m.connection {
            push_matrix("connection", c.coefficients().entries());
        }
        if let Some(t) = &m.tangent_structure {
            push_matrix("tangent_structure", t.lower().entries());
        }
        if let Some(v) = &m.vector_field {
            for a in 0..chart.len() {
                out.push((format!("vector_field.{}", chart.name(a)), v.component(a)));
            }
        }
        out
    }

    /// The sample points re-read on the chart of `f` (tangent charts reuse
    /// the fiber coordinates as velocities).
    fn points_for(&self, f: &ScalarField) -> Vec<Point> {
        self.pts
            .iter()
            .map(|p| ChartPoint::new(f.chart(), p.coords().to_vec()).expect("same length"))
            .collect()
    }

    fn derivative_checks(&self) -> Records {
        let (mut rel, mut abs, mut mixed) = (0.0f64, 0.0f64, 0.0f64);
        let worse = |acc: f64, v: f64| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) };
        for (name, f) in self.sources() {
            let at = |e: cotangent::expr::FieldError| CliError::field(name.clone(), e);
            let pts = self.points_for(&f);
            let len = f.chart().len();
            let grads: Vec<ScalarField> = (0..len).map(|c| f.d(c)).collect();
            for pt in &pts {
                let errs = f.fd_gradient_check(pt, FD_STEP).map_err(at)?;
                for (c, err) in errs.into_iter().enumerate() {
                    let exact = grads[c].evaluate(pt).map_err(at)?;
                    if exact.abs() >= 1.0 {
                        rel = worse(rel, err / exact.abs());
                    } else {
                        abs = worse(abs, err);
                    }
                }
                for a in 0..len {
                    for b in (a + 1)..len {
                        let ab = grads[a].d(b).evaluate(pt).map_err(at)?;
                        let ba = grads[b].d(a).evaluate(pt).map_err(at)?;
                        mixed = worse(mixed, (ab - ba).abs() / ab.abs().max(1.0));
                    }
                }
            }
        }
        let n = self.pts.len();
        Ok(vec![
            CheckRecord::new(
                "gradient_vs_central_difference_relative",
                "symbolic first derivatives match central differences (relative, where |∂f| ≥ 1)",
                rel,
                self.tol.numeric,
                n,
            ),
            CheckRecord::new(
                "gradient_vs_central_difference_absolute",
                "symbolic first derivatives match central differences (absolute, where |∂f| < 1)",
                abs,
                self.tol.numeric * 1e-2,
                n,
            ),
            CheckRecord::new(
                "mixed_partials_commute",
                "∂_a∂_b f = ∂_b∂_a f for every supplied expression (relative to max(1, |value|))",
                mixed,
                self.tol.algebraic,
                n,
            ),
        ])
    }

    fn projector_checks(&self) -> Records {
        let chart = self.chart();
        let (h, v, n) = (self.conn().horizontal(), self.conn().vertical(), self.conn().n_tensor());
        let id = FullTensor11::identity(chart);
        let j = self.j();
        let projector = tensor_entries(&[
            h.compose(&h).sub(&h),
            v.compose(&v).sub(&v),
            h.compose(&v),
            v.compose(&h),
            h.add(&v).sub(&id),
            h.sub(&v).sub(&n),
        ]);
        let tangent = tensor_entries(&[j.compose(&h).sub(&j), h.compose(&j), j.compose(&v), v.compose(&j).sub(&j)]);
        Ok(vec![
            self.record(
                "projector_algebra",
                "h² = h, v² = v, hv = vh = 0, h + v = Id, h − v = N",
                &projector,
                self.tol.algebraic,
            )?,
            self.record(
                "tangent_structure_vs_projectors",
                "J∘h = J, h∘J = 0, J∘v = 0, v∘J = J",
                &tangent,
                self.tol.algebraic,
            )?,
        ])
    }

    fn curvature_checks(&self) -> Records {
        let r = curvature_components(self.conn());
        let omega = intrinsic_curvature(self.conn());
        let sum: Vec<Expr> = r.entries().iter().zip(omega.entries()).map(|(a, b)| a + b).collect();
        Ok(vec![
            self.record(
                "curvature_vs_intrinsic",
                "R_ijk from δ_i N_jk − δ_j N_ik against Ω = −½[h,h] on adapted frame pairs, Ω(δ_i, δ_j) = −R_ijk ∂/∂p_k",
                &sum,
                self.tol.symbolic,
            )?
            .note_on_miss("formula discrepancy between the coordinate curvature and −½[h,h]"),
            self.record(
                "curvature_magnitude",
                "max |R_ijk|; zero exactly when the horizontal distribution is integrable",
                omega.entries(),
                self.tol.symbolic,
            )?
            .informational(),
        ])
    }

    fn torsion_checks(&self) -> Records {
        let js = self.ing.field.tangent_structure();
        let t = torsion(js, self.conn()).map_err(cotangent::Error::from)?;
        let ti = intrinsic_torsion(js, self.conn()).map_err(cotangent::Error::from)?;
        Ok(vec![self
            .record(
                "torsion_vs_intrinsic",
                "coordinate torsion T_ijk against the Frölicher–Nijenhuis bracket [J,h] on coordinate frame pairs",
                &diff(t.entries(), ti.entries()),
                self.tol.symbolic,
            )?
            .note_on_miss("formula discrepancy between the coordinate torsion and [J,h]")])
    }

    fn tension_checks(&self) -> Records {
        let js = self.ing.field.tangent_structure();
        let tens = tension(self.conn());
        let st = strong_torsion(self.rho(), js, self.conn()).map_err(cotangent::Error::from)?;
        let sti = intrinsic_strong_torsion(self.rho(), js, self.conn()).map_err(cotangent::Error::from)?;
        Ok(vec![
            self.record(
                "tension_vs_intrinsic",
                "N_ij − p_k ∂N_ij/∂p_k against ½ L_{C*}(h − v)",
                &diff(tens.entries(), intrinsic_tension(self.conn()).entries()),
                self.tol.symbolic,
            )?,
            self.record(
                "tension_magnitude",
                "max |tension|; zero exactly when N_ij is homogeneous of degree one in p",
                tens.entries(),
                self.tol.symbolic,
            )?
            .informational(),
            self.record(
                "strong_torsion_vs_intrinsic",
                "ξ^i T_ijk + tension_jk against i_ρ[J,h] − ½ L_{C*}(h − v)",
                &diff(st.entries(), sti.entries()),
                self.tol.symbolic,
            )?
            .note_on_miss("formula discrepancy between the coordinate strong torsion and its intrinsic form"),
        ])
    }

    fn tangent_structure_checks(&self) -> Records {
        let js = self.ing.field.tangent_structure();
        let metric = self.ing.hamilton.as_ref().filter(|_| !self.ing.j_from_h).map(|h| h.metric_upper());
        let r = tangent_structure_residuals(js, metric);
        let jt = js.tensor();
        let n_j = nijenhuis(&jt);
        let frame = PhaseVectorField::coordinate_frame(self.chart());
        let mut nij = Vec::new();
        for a in 0..frame.len() {
            for b in (a + 1)..frame.len() {
                nij.extend_from_slice(n_j.apply(&frame[a], &frame[b]).map_err(cotangent::Error::from)?.components());
            }
        }
        let mut out = vec![
            self.record(
                "tangent_structure_integrability",
                "∂t^ij/∂p_k = ∂t^kj/∂p_i",
                &r.integrability,
                self.tol.symbolic,
            )?
            .informational_if(!self.ing.j_from_h),
            self.record(
                "tangent_structure_nijenhuis",
                "N_J = ½[J,J] vanishes on coordinate frame pairs",
                &nij,
                self.tol.symbolic,
            )?
            .informational_if(!self.ing.j_from_h),
            self.record("tangent_structure_symmetry", "t_ij = t_ji (optional property)", &r.symmetry, self.tol.symbolic)?
                .informational(),
            self.record(
                "tangent_structure_homogeneity",
                "p_k ∂t_ij/∂p_k = 0 (optional property)",
                &r.homogeneity,
                self.tol.symbolic,
            )?
            .informational(),
        ];
        if let Some(m) = &r.metric {
            out.push(
                self.record("tangent_structure_metric", "t^ij = ∂²H/∂p_i∂p_j", m, self.tol.symbolic)?
                    .informational(),
            );
        }
        Ok(out)
    }

    fn regularity_checks(&self) -> Records {
        let f = &self.ing.field;
        let homogeneous = self.residual(&tangent_homogeneity(f.tangent_structure()))? <= self.tol.symbolic;
        Ok(vec![
            self.record(
                "regular_field",
                "t^ij = ∂ξ^j/∂p_i, i.e. J[ρ, JX] = −JX",
                &f.regularity_residuals(),
                self.tol.symbolic,
            )?,
            self.record(
                "regular_field_intrinsic",
                "J[ρ, J∂_a] + J∂_a = 0 over the coordinate frame",
                &f.intrinsic_regularity_residuals(),
                self.tol.symbolic,
            )?,
            self.record(
                "regular_field_liouville",
                "for homogeneous J, a regular field satisfies Jρ = C*",
                &f.liouville_residuals(),
                self.tol.symbolic,
            )?
            .informational_if(!homogeneous)
            .note_on_miss(if homogeneous {
                "Jρ differs from the Liouville field"
            } else {
                "J is not homogeneous; the Liouville criterion does not apply"
            }),
        ])
    }

    fn compatibility_checks(&self) -> Records {
        let (a, b) = self.ing.field.compatibility_residuals(self.conn());
        Ok(vec![
            self.record(
                "compatibility_horizontal",
                "h∘L_ρ∘J = −h on the coordinate frame",
                &a,
                self.tol.symbolic,
            )?
            .informational_if(self.ing.connection_supplied)
            .note_on_miss(CANONICAL_ONLY),
            self.record(
                "compatibility_vertical",
                "J∘L_ρ∘v = −v on the coordinate frame",
                &b,
                self.tol.symbolic,
            )?
            .informational_if(self.ing.connection_supplied)
            .note_on_miss(CANONICAL_ONLY),
        ])
    }

    fn covariant_derivative_checks(&self) -> Records {
        let f = &self.ing.field;
        let nabla = DynCovDerivative::new(self.rho(), self.conn()).map_err(cotangent::Error::from)?;
        let nabla_j = nabla.tensor(&self.j());
        let canonical = f.canonical_connection();
        let intrinsic = f.intrinsic_canonical_connection();
        let mut nabla_rec = self.record(
            "nabla_j_vanishes",
            "∇J = 0 for the connection in use (equivalently N = −L_ρJ)",
            nabla_j.matrix().entries(),
            self.tol.symbolic,
        )?;
        if !nabla_rec.within_tolerance {
            let offset = self.residual(&diff(self.conn().coefficients().entries(), canonical.coefficients().entries()))?;
            nabla_rec = nabla_rec.with_note(format!(
                "connection differs from the canonical one by up to {offset:.6e}; ∇J grows as twice that offset"
            ));
        }
        Ok(vec![
            nabla_rec,
            self.record(
                "canonical_connection_identity",
                "L_ρJ + h − v = 0 for the connection in use",
                &f.connection_identity_residuals(self.conn()),
                self.tol.symbolic,
            )?,
            self.record(
                "canonical_connection_vs_intrinsic",
                "coordinate formula for the canonical N against the lower block of −½ L_ρJ",
                &diff(canonical.coefficients().entries(), intrinsic.coefficients().entries()),
                self.tol.symbolic,
            )?
            .note_on_miss("formula discrepancy in the canonical connection"),
        ])
    }

    fn almost_complex_checks(&self) -> Records {
        const NAMES: [&str; 9] = [
            "almost_complex_square",
            "almost_complex_f_j",
            "almost_complex_j_f",
            "almost_complex_v_f",
            "almost_complex_f_h",
            "almost_complex_h_f",
            "almost_complex_f_v",
            "almost_complex_n_f",
            "almost_complex_jacobi_split",
        ];
        let ac = almost_complex(&self.ing.field, self.conn()).map_err(cotangent::Error::from)?;
        let ids = almost_complex_identities(&self.ing.field, self.conn(), &ac.intrinsic).map_err(cotangent::Error::from)?;
        let supplied = self.ing.connection_supplied;
        let mut out = Vec::new();
        for (name, (anchor, t)) in NAMES.iter().zip(&ids) {
            out.push(
                self.record(name, &format!("{anchor} = 0"), t.matrix().entries(), self.tol.identity())?
                    .informational_if(supplied)
                    .note_on_miss(CANONICAL_ONLY),
            );
        }
        let symmetric = self.t_is_symmetric()?;
        out.push(
            self.record(
                "almost_complex_local_form",
                "F = t^ij δ/δx^i ⊗ δp_j − t_ij ∂/∂p_i ⊗ dx^j against h∘L_ρh − J",
                &diff(ac.local.matrix().entries(), ac.intrinsic.matrix().entries()),
                self.tol.symbolic,
            )?
            .informational_if(supplied || !symmetric)
            .note_on_miss(if supplied { CANONICAL_ONLY } else { INDEX_FINDING }),
        );
        Ok(out)
    }

    fn decomposition_checks(&self) -> Records {
        let f = &self.ing.field;
        let supplied = self.ing.connection_supplied;
        let ac = almost_complex(f, self.conn()).map_err(cotangent::Error::from)?;
        let nabla = DynCovDerivative::new(self.rho(), self.conn()).map_err(cotangent::Error::from)?;
        let split = decomposition_check_residuals(f, self.conn(), &ac.intrinsic).map_err(cotangent::Error::from)?;
        let both = tensor_entries(&[nabla.tensor(&self.j()), nabla.tensor(&ac.intrinsic)]);
        Ok(vec![
            self.record(
                "dynamical_derivative_decomposition",
                "∇X = [ρ, X] + FX + JX − ΦX over the coordinate frame",
                &split,
                self.tol.identity(),
            )?
            .informational_if(supplied)
            .note_on_miss(CANONICAL_ONLY),
            self.record(
                "dynamical_derivative_parallel",
                "∇J = 0 and ∇F = 0",
                &both,
                self.tol.identity(),
            )?
            .informational_if(supplied)
            .note_on_miss(CANONICAL_ONLY),
        ])
    }

    fn frame_bracket_checks(&self) -> Records {
        let (vertical, horizontal) = frame_bracket_closed_forms(&self.ing.field, self.conn()).map_err(cotangent::Error::from)?;
        let rho = self.rho();
        let mut actual_v = Vec::new();
        for e in self.conn().vertical_frame() {
            actual_v.push(lie_bracket(rho, &e).map_err(cotangent::Error::from)?);
        }
        let mut actual_h = Vec::new();
        for e in self.conn().adapted_frame() {
            actual_h.push(lie_bracket(rho, &e).map_err(cotangent::Error::from)?);
        }
        let jac = jacobi_endomorphism(rho, self.conn()).map_err(cotangent::Error::from)?;
        let symmetric = self.t_is_symmetric()?;
        Ok(vec![
            self.record(
                "frame_bracket_vertical",
                "[ρ, ∂/∂p_j] = −t^ij δ/δx^i + (t^ij N_ik − ∂χ_k/∂p_j) ∂/∂p_k",
                &diff(&field_entries(&vertical), &field_entries(&actual_v)),
                self.tol.symbolic,
            )?
            .informational_if(!symmetric)
            .note_on_miss(INDEX_FINDING),
            self.record(
                "frame_bracket_horizontal",
                "[ρ, δ/δx^j] = −(δξ^i/δx^j) δ/δx^i + R_jk ∂/∂p_k",
                &diff(&field_entries(&horizontal), &field_entries(&actual_h)),
                self.tol.symbolic,
            )?
            .note_on_miss("formula discrepancy in the horizontal frame bracket"),
            self.record(
                "jacobi_endomorphism_vs_intrinsic",
                "R_jk = (δξ^i/δx^j) N_ik − δχ_k/δx^j + ρ(N_jk) against v∘L_ρh",
                &diff(jac.closed_form.entries(), jac.intrinsic.entries()),
                self.tol.symbolic,
            )?
            .note_on_miss("formula discrepancy in the Jacobi endomorphism"),
        ])
    }

    fn hamilton_connection_checks(&self) -> Records {
        let Some(h) = &self.ing.hamilton else {
            return Ok(Vec::new());
        };
        let native = self.ing.rho_from_h && self.ing.j_from_h;
        let from_field = self.ing.field.canonical_connection();
        let from_h = h.canonical_connection();
        let n = from_h.coefficients();
        Ok(vec![
            self.record(
                "canonical_connection_vs_hamilton",
                "canonical connection of (ρ, J) against ½({g_ij, H} − g_ik ∂²H/∂p_k∂x^j − g_jk ∂²H/∂p_k∂x^i)",
                &diff(from_field.coefficients().entries(), n.entries()),
                self.tol.symbolic,
            )?
            .informational_if(!native)
            .note_on_miss(if native {
                "formula discrepancy between the two connection formulas"
            } else {
                "the model overrides ρ or J, so the Hamilton-space connection need not apply"
            }),
            self.record(
                "hamilton_connection_symmetric",
                "N_ij = N_ji for the Hamilton-space connection",
                &diff(n.entries(), n.transpose().entries()),
                self.tol.algebraic,
            )?,
        ])
    }

    fn hamiltonian_condition_checks(&self) -> Records {
        let r = hamiltonian_residuals(self.rho());
        let (a, b, c) = (self.residual(&r.a)?, self.residual(&r.b)?, self.residual(&r.c)?);
        let gate = self.ing.rho_from_h;
        let class = HamiltonianClass::classify(a, b, c, self.tol.symbolic);
        let class_note = format!("field classified as {class:?}");
        let n = self.pts.len();
        let mut out = vec![
            CheckRecord::new("hamiltonian_condition_a", "∂ξ^j/∂p_i = ∂ξ^i/∂p_j", a, self.tol.symbolic, n)
                .informational_if(!gate),
            CheckRecord::new("hamiltonian_condition_b", "∂χ_i/∂p_j + ∂ξ^j/∂x^i = 0", b, self.tol.symbolic, n)
                .informational_if(!gate),
            CheckRecord::new("hamiltonian_condition_c", "∂χ_i/∂x^j = ∂χ_j/∂x^i", c, self.tol.symbolic, n)
                .informational_if(!gate)
                .with_note(class_note),
        ];
        if let (Some(h), true) = (&self.ing.hamilton, gate) {
            out.push(self.record(
                "energy_conservation",
                "ρ_H(H) = 0",
                &[h.energy_drift()],
                self.tol.algebraic,
            )?);
        }
        Ok(out)
    }

    fn jacobi_decomposition_checks(&self) -> Records {
        let rho = self.rho();
        let conn = self.conn();
        let split = decomposition_residuals(rho, conn, 1.0).map_err(cotangent::Error::from)?;
        let horizontal = horizontal_jacobi_residuals(rho, conn).map_err(cotangent::Error::from)?;
        Ok(vec![
            self.record(
                "jacobi_curvature_split",
                "Φ = i_ρΩ' + v∘L_{vρ}h with Ω'(ρ, X) = v[hρ, hX] = +½[h,h](ρ, X)",
                &split,
                self.tol.symbolic,
            )?
            .informational()
            .with_note("holds with +½[h,h]; with the curvature form −½[h,h] the split fails"),
            self.record(
                "jacobi_of_horizontal_field",
                "for ρ = ξ^i δ/δx^i, R_ij = ξ^k R_kij",
                &horizontal,
                self.tol.symbolic,
            )?
            .informational(),
        ])
    }
}
