//! `geocli legendre`: Legendre duality and the semispray correspondence.

use cotangent::hamilton::{duality_report, perturbation_table, HamiltonModel, LagrangeModel};
use cotangent::sampling::max_abs_residual;
use cotangent::Point;

use crate::error::CliError;
use crate::model::Model;
use crate::report::{CheckRecord, CheckReport, Num, PerturbationEntry, Tolerances};

/// Central-difference step for the Jacobians of the inverse map.
pub const JACOBIAN_STEP: f64 = 1e-5;

/// Runs the pipeline; with `epsilon`, also perturbs the spray by
/// `ε (y^1)²` for `ε`, `ε/10` and `ε/100`.
pub fn run_legendre(
    model: &Model,
    seed: u64,
    count: usize,
    tol: Tolerances,
    epsilon: Option<f64>,
) -> Result<CheckReport, CliError> {
    let h = model
        .hamiltonian
        .clone()
        .ok_or_else(|| CliError::field("hamiltonian", "required by the legendre command"))?;
    let pts = model.sample(seed, count)?;
    let hm = HamiltonModel::build(h, &pts)?;
    let map = hm.legendre();
    let n = pts.len();
    let mut report = CheckReport::new(&model.id, "legendre", seed, count, tol);

    let mut round_trip = 0.0f64;
    let mut iterations = 0;
    let mut images: Vec<Point> = Vec::with_capacity(n);
    for pt in &pts {
        let tp = map.forward(pt)?;
        let back = map.inverse(&tp)?;
        iterations = iterations.max(back.iterations);
        let again = map.forward(&back.point)?;
        for (a, b) in again.coords().iter().zip(tp.coords()) {
            round_trip = round_trip.max((a - b).abs());
        }
        images.push(tp);
    }
    report.push(
        CheckRecord::new("legendre_round_trip", "Ψ∘Ψ⁻¹ = id on the image of the samples", round_trip, tol.identity(), n)
            .with_note(format!("at most {iterations} Newton iteration(s) per point")),
    );

    let (g, dx_closed) = map.zeta_jacobian_closed_forms();
    let (mut dy_err, mut dx_err) = (0.0f64, 0.0f64);
    for pt in &pts {
        let (dy, dx) = map.zeta_jacobians(pt, JACOBIAN_STEP)?;
        let (g_at, dx_at) = (g.eval_at(pt.coords()), dx_closed.eval_at(pt.coords()));
        let at = |source| cotangent::Error::AtPoint {
            point: pt.coords().to_vec(),
            source,
        };
        let (g_at, dx_at) = (g_at.map_err(at)?, dx_at.map_err(at)?);
        for (a, b) in dy.as_slice().iter().zip(g_at.as_slice()) {
            dy_err = dy_err.max((a - b).abs());
        }
        for (a, b) in dx.as_slice().iter().zip(dx_at.as_slice()) {
            dx_err = dx_err.max((a - b).abs());
        }
    }
    report.push(CheckRecord::new(
        "inverse_jacobian_velocity",
        "(∂ζ_i/∂y^j)∘Ψ = g_ij",
        dy_err,
        tol.numeric,
        n,
    ));
    report.push(CheckRecord::new(
        "inverse_jacobian_position",
        "(∂ζ_i/∂x^j)∘Ψ = −g_ik ∂ξ^k/∂x^j",
        dx_err,
        tol.numeric,
        n,
    ));
    report.push(CheckRecord::new(
        "energy_conservation",
        "ρ_H(H) = 0",
        max_abs_residual(&[hm.energy_drift()], &pts)?.max_abs,
        tol.algebraic,
        n,
    ));

    let (l, origin) = match &model.lagrangian {
        Some(l) => (l.clone(), "supplied"),
        None => (hm.quadratic_lagrangian(), "derived from the fiber-quadratic part of H"),
    };
    report.push(
        CheckRecord::new(
            "lagrangian_consistency",
            "L(x, y) = ζ_i y^i − H(x, ζ) on the image of the samples",
            map.lagrangian_gate(&l, &pts)?.max_abs,
            tol.symbolic,
            n,
        )
        .with_note(format!("Lagrangian {origin}")),
    );
    let lag = LagrangeModel::new(l)?;
    lag.check_regular(&images)?;

    let dual = duality_report(&hm, &lag, &lag.semispray(), &pts)?;
    for (name, anchor, r) in [
        ("pullback_symmetric_fiber_jacobian", "pulled-back spray: ∂ξ^j/∂p_i = ∂ξ^i/∂p_j", &dual.semi_a),
        ("pullback_semibasic", "pulled-back spray: ∂χ_i/∂p_j + ∂ξ^j/∂x^i = 0", &dual.semi_b),
        ("spray_metric_condition", "canonical spray satisfies the metric condition", &dual.metric),
        ("spray_symplectic_condition", "canonical spray satisfies the symplectic condition", &dual.symplectic),
    ] {
        report.push(CheckRecord::new(name, anchor, r.max_abs, tol.identity(), n));
    }

    if let Some(eps) = epsilon {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(CliError::field("--epsilon", "must be a positive number"));
        }
        let rows = perturbation_table(&hm, &lag, &[eps, eps / 10.0, eps / 100.0], &pts)?;
        let mut broken = 0usize;
        for row in &rows {
            let r = &row.report;
            if !r.equivalence_holds(tol.identity()) {
                broken += 1;
            }
            report.perturbation.push(PerturbationEntry {
                epsilon: Num(row.epsilon),
                symmetric_fiber_jacobian: Num(r.semi_a.max_abs),
                semibasic_condition: Num(r.semi_b.max_abs),
                metric_condition: Num(r.metric.max_abs),
                symplectic_condition: Num(r.symplectic.max_abs),
            });
        }
        report.push(CheckRecord::new(
            "perturbation_equivalence",
            "each perturbed spray fails the semi-Hamiltonian and the metric/symplectic side together (count of rows where they disagree)",
            broken as f64,
            0.0,
            n,
        ));
        let scaling = |pick: fn(&PerturbationEntry) -> f64| {
            report
                .perturbation
                .windows(2)
                .map(|w| (pick(&w[0]) / pick(&w[1]) / 10.0 - 1.0).abs())
                .fold(0.0f64, |acc, v| if v.is_nan() { f64::NAN } else { acc.max(v) })
        };
        let semi = scaling(|e| e.semibasic_condition.0);
        let metric = scaling(|e| e.metric_condition.0);
        report.push(CheckRecord::new(
            "perturbation_scaling_semibasic",
            "semibasic residual is linear in ε (|ratio/10 − 1| for successive decades)",
            semi,
            0.2,
            n,
        ));
        report.push(CheckRecord::new(
            "perturbation_scaling_metric",
            "metric-condition residual is linear in ε (|ratio/10 − 1| for successive decades)",
            metric,
            0.2,
            n,
        ));
    }
    Ok(report)
}
