//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that every line is printed by a
//! plain `cargo test`; the process exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;

use cotangent::dynamics::{jacobi_endomorphism, DynCovDerivative};
use cotangent::expr::{CoordinateChart, Expr, ScalarField};
use cotangent::frame::{lie_bracket, PhaseVectorField};
use cotangent::hamilton::{duality_report, perturbation_table, HamiltonModel, LagrangeModel};
use cotangent::sampling::{max_abs_residual, sample_points, SamplingBox};
use cotangent::Point;
use geocli::legendre::run_legendre;
use geocli::suite::run_checks;
use geocli::{parse_model, CheckReport, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = 42;
const EUCLID: &str = "0.5*(p1^2+p2^2)+x1^2*x2";
const CURVED: &str = "0.5*(1+x1^2)*p1^2";
const CORPUS: [(&str, usize); 3] = [(EUCLID, 2), (CURVED, 1), ("0.5*((1+x1^2)*p1^2+p2^2)", 2)];

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn points(n: usize, count: usize) -> Result<Vec<Point>, String> {
    sample_points(CoordinateChart::cotangent(n), &SamplingBox::default_for(n), SEED, count).map_err(err)
}

fn hamilton(src: &str, n: usize, pts: &[Point]) -> Result<HamiltonModel, String> {
    let h = ScalarField::parse(src, CoordinateChart::cotangent(n)).map_err(err)?;
    HamiltonModel::build(h, pts).map_err(err)
}

fn residual(exprs: &[Expr], pts: &[Point]) -> Result<f64, String> {
    Ok(max_abs_residual(exprs, pts).map_err(err)?.max_abs)
}

fn diff(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Fails with a message naming the first value outside its bound.
fn within(label: &str, value: f64, bound: f64) -> Result<(), String> {
    if value <= bound {
        Ok(())
    } else {
        Err(format!("{label}: {value:.3e} exceeds {bound:.0e}"))
    }
}

fn record_max(report: &CheckReport, name: &str) -> Result<f64, String> {
    let r = report
        .records
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| format!("report has no record `{name}`"))?;
    if r.informational {
        return Err(format!("record `{name}` was downgraded to informational"));
    }
    Ok(r.max_abs_residual.0)
}

fn model_json(src: &str, n: usize) -> String {
    format!(r#"{{"dimension": {n}, "hamiltonian": "{src}"}}"#)
}

fn nabla_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut offset_err = 0.0f64;
    for (src, n) in CORPUS {
        let pts = points(n, 100)?;
        let f = hamilton(src, n, &pts)?.j_regular();
        let conn = f.canonical_connection();
        let j = f.tangent_structure().tensor();
        let nabla_j = |c| -> Result<Vec<Expr>, String> {
            let d = DynCovDerivative::new(f.rho(), c).map_err(err)?;
            Ok(d.tensor(&j).matrix().entries().to_vec())
        };
        let r = residual(&nabla_j(&conn)?, &pts)?;
        within(&format!("∇J for {src}"), r, 1e-9)?;
        worst = worst.max(r);
        let shifted = nabla_j(&conn.with_offset(n - 1, 0, 0.1))?;
        for pt in &pts {
            let at = residual(&shifted, std::slice::from_ref(pt))?;
            offset_err = offset_err.max((at - 0.2).abs());
        }
        within(&format!("offset ∇J − 0.2 for {src}"), offset_err, 1e-6)?;
    }
    Ok(format!("max |∇J| = {worst:.1e}; offset Δ = 0.1 gives 0.2 within {offset_err:.1e} at every point"))
}

/// `N = ½({g, H} − 2 g ∂²H/∂p∂x)` for `H = ½(1+x²)p²`, from nested central
/// differences of a plain closure.
fn curved_connection_oracle(x: f64, p: f64) -> f64 {
    let h = |x: f64, p: f64| 0.5 * (1.0 + x * x) * p * p;
    // H is quadratic in x and p, so these differences are exact up to rounding.
    let e = 1e-2;
    let dp = |x: f64, p: f64| (h(x, p + e) - h(x, p - e)) / (2.0 * e);
    let dx = |x: f64, p: f64| (h(x + e, p) - h(x - e, p)) / (2.0 * e);
    let dpp = |x: f64, p: f64| (dp(x, p + e) - dp(x, p - e)) / (2.0 * e);
    let dpx = |x: f64, p: f64| (dp(x + e, p) - dp(x - e, p)) / (2.0 * e);
    let g = |x: f64, p: f64| 1.0 / dpp(x, p);
    let fine = 1e-4;
    let dgdx = (g(x + fine, p) - g(x - fine, p)) / (2.0 * fine);
    let dgdp = (g(x, p + fine) - g(x, p - fine)) / (2.0 * fine);
    let poisson = dgdp * dx(x, p) - dp(x, p) * dgdx;
    0.5 * (poisson - 2.0 * g(x, p) * dpx(x, p))
}

fn dual_formulas() -> Outcome {
    let mut worst = 0.0f64;
    for (src, n) in CORPUS {
        let pts = points(n, 100)?;
        let m = hamilton(src, n, &pts)?;
        let a = m.j_regular().canonical_connection();
        let b = m.canonical_connection();
        let r = residual(&diff(a.coefficients().entries(), b.coefficients().entries()), &pts)?;
        within(&format!("connection formulas for {src}"), r, 1e-9)?;
        worst = worst.max(r);
    }
    let pts = points(1, 100)?;
    let m = hamilton(CURVED, 1, &pts)?;
    let closed = Expr::constant(-1.0) * Expr::var(0) * Expr::var(1) / (Expr::constant(1.0) + Expr::powi(&Expr::var(0), 2));
    let mut oracle_gap = 0.0f64;
    for pt in &pts {
        let (x, p) = (pt.coords()[0], pt.coords()[1]);
        oracle_gap = oracle_gap.max((curved_connection_oracle(x, p) + x * p / (1.0 + x * x)).abs());
    }
    within("finite-difference oracle vs −x p/(1+x²)", oracle_gap, 1e-6)?;
    let from_field = residual(&[m.j_regular().canonical_connection().coefficient(0, 0) - &closed], &pts)?;
    let from_h = residual(&[m.canonical_connection().coefficient(0, 0) - &closed], &pts)?;
    within("regular-field connection vs −x p/(1+x²)", from_field, 1e-9)?;
    within("Hamilton connection vs −x p/(1+x²)", from_h, 1e-9)?;
    Ok(format!(
        "formulas agree to {worst:.1e}; curved model matches −x1 p1/(1+x1²) to {:.1e} (oracle gap {oracle_gap:.1e})",
        from_field.max(from_h)
    ))
}

fn suite_records(count: usize, pinned: &[(&str, f64)]) -> Outcome {
    let mut worst = 0.0f64;
    for (src, n) in CORPUS {
        let model = parse_model("corpus", &model_json(src, n)).map_err(err)?;
        let report = run_checks(&model, SEED, count, Tolerances::default()).map_err(err)?;
        for &(name, bound) in pinned {
            let r = record_max(&report, name)?;
            within(&format!("{name} for {src}"), r, bound)?;
            worst = worst.max(r);
        }
    }
    Ok(format!("{} identities on 3 models at {count} points, worst {worst:.1e}", pinned.len()))
}

fn cross_checks() -> Outcome {
    suite_records(
        50,
        &[
            ("curvature_vs_intrinsic", 1e-9),
            ("torsion_vs_intrinsic", 1e-9),
            ("jacobi_endomorphism_vs_intrinsic", 1e-9),
        ],
    )
}

fn identity_suites() -> Outcome {
    suite_records(
        100,
        &[
            ("projector_algebra", 1e-12),
            ("tangent_structure_vs_projectors", 1e-12),
            ("compatibility_horizontal", 1e-9),
            ("compatibility_vertical", 1e-9),
            ("almost_complex_square", 1e-10),
            ("almost_complex_f_j", 1e-10),
            ("almost_complex_j_f", 1e-10),
            ("almost_complex_v_f", 1e-10),
            ("almost_complex_h_f", 1e-10),
            ("almost_complex_n_f", 1e-10),
            ("dynamical_derivative_decomposition", 1e-10),
            ("dynamical_derivative_parallel", 1e-10),
            ("frame_bracket_vertical", 1e-9),
            ("frame_bracket_horizontal", 1e-9),
        ],
    )
}

fn jacobi_physics() -> Outcome {
    let pts = points(2, 100)?;
    let m = hamilton(EUCLID, 2, &pts)?;
    let jac = jacobi_endomorphism(m.rho(), &m.canonical_connection()).map_err(err)?;
    let mut worst = 0.0f64;
    for pt in &pts {
        let (x1, x2) = (pt.coords()[0], pt.coords()[1]);
        let want = [2.0 * x2, 2.0 * x1, 2.0 * x1, 0.0];
        let got = jac.intrinsic.eval_at(pt.coords()).map_err(err)?;
        for (g, w) in got.as_slice().iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
    }
    within("Φ vs Hessian of the potential", worst, 1e-10)?;
    Ok(format!("Φ equals [[2x2, 2x1], [2x1, 0]] to {worst:.1e} at 100 points"))
}

fn legendre_pipeline() -> Outcome {
    let (mut trip, mut inv, mut energy) = (0.0f64, 0.0f64, 0.0f64);
    for (src, n) in CORPUS {
        let model = parse_model("corpus", &model_json(src, n)).map_err(err)?;
        let report = run_legendre(&model, SEED, 100, Tolerances::default(), None).map_err(err)?;
        let t = record_max(&report, "legendre_round_trip")?;
        let iy = record_max(&report, "inverse_jacobian_velocity")?;
        let ix = record_max(&report, "inverse_jacobian_position")?;
        let e = record_max(&report, "energy_conservation")?;
        within(&format!("round trip for {src}"), t, 1e-10)?;
        within(&format!("∂ζ/∂y = g for {src}"), iy, 1e-6)?;
        within(&format!("∂ζ/∂x = −g ∂ξ/∂x for {src}"), ix, 1e-6)?;
        within(&format!("ρ_H(H) for {src}"), e, 1e-12)?;
        trip = trip.max(t);
        inv = inv.max(iy).max(ix);
        energy = energy.max(e);
    }
    Ok(format!("round trip {trip:.1e}, inverse-function identities {inv:.1e}, energy {energy:.1e}"))
}

fn duality() -> Outcome {
    let pts = points(2, 100)?;
    let m = hamilton(EUCLID, 2, &pts)?;
    let l = ScalarField::parse("0.5*(y1^2+y2^2)-x1^2*x2", CoordinateChart::tangent(2)).map_err(err)?;
    let lag = LagrangeModel::new(l).map_err(err)?;
    let r = duality_report(&m, &lag, &lag.semispray(), &pts).map_err(err)?;
    let base = [r.semi_a.max_abs, r.semi_b.max_abs, r.metric.max_abs, r.symplectic.max_abs];
    for (label, v) in ["symmetric fiber Jacobian", "semibasic", "metric", "symplectic"].iter().zip(base) {
        within(label, v, 1e-10)?;
    }
    let rows = perturbation_table(&m, &lag, &[1e-1, 1e-2, 1e-3], &pts).map_err(err)?;
    let mut ratios = Vec::new();
    for w in rows.windows(2) {
        for (label, a, b) in [
            ("semibasic", w[0].report.semi_b.max_abs, w[1].report.semi_b.max_abs),
            ("metric", w[0].report.metric.max_abs, w[1].report.metric.max_abs),
        ] {
            let ratio = a / b;
            if !(8.0..=12.0).contains(&ratio) {
                return Err(format!("{label} ratio {ratio:.4} outside 10 ± 20%"));
            }
            ratios.push(ratio);
        }
    }
    Ok(format!(
        "canonical spray residuals ≤ {:.1e}; perturbation ratios {:?}",
        base.iter().cloned().fold(0.0, f64::max),
        ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
    ))
}

const EXPRESSIONS: [&str; 8] = [
    EUCLID,
    CURVED,
    "0.5*((1+x1^2)*p1^2+p2^2)",
    "sin(x1*p2)+cos(x2)*exp(p1/3)",
    "log(2+x1^2)*sqrt(1+p2^2)",
    "tan(0.3*x2)*p1^3-x1/(1+p1^2)",
    "(1+x1^2)^-2*p2+2^x1*p1^2*p2",
    "-(1+x1^2)^0.5*exp(-p1*p2)+p1^4/(3+x2)",
];

fn random_polynomial_field(rng: &mut ChaCha8Rng, chart: CoordinateChart) -> Result<PhaseVectorField, String> {
    let names = chart.names();
    let comps = (0..chart.len())
        .map(|_| {
            let mut terms = vec![format!("{:.6}", rng.gen_range(-1.0..1.0))];
            for a in 0..names.len() {
                terms.push(format!("{:.6}*{}", rng.gen_range(-1.0..1.0), names[a]));
                for b in a..names.len() {
                    terms.push(format!("{:.6}*{}*{}", rng.gen_range(-1.0..1.0), names[a], names[b]));
                }
            }
            ScalarField::parse(&terms.join("+"), chart).map_err(err)
        })
        .collect::<Result<Vec<_>, _>>()?;
    PhaseVectorField::new(chart, comps).map_err(err)
}

fn differentiation_engine() -> Outcome {
    let chart = CoordinateChart::cotangent(2);
    let pts = points(2, 100)?;
    let (mut rel, mut abs, mut mixed) = (0.0f64, 0.0f64, 0.0f64);
    for src in EXPRESSIONS {
        let f = ScalarField::parse(src, chart).map_err(err)?;
        for pt in &pts {
            let errs = f.fd_gradient_check(pt, 1e-5).map_err(err)?;
            for (c, e) in errs.into_iter().enumerate() {
                let exact = f.d(c).evaluate(pt).map_err(err)?;
                if exact.abs() >= 1.0 {
                    rel = rel.max(e / exact.abs());
                } else {
                    abs = abs.max(e);
                }
                for b in 0..chart.len() {
                    let ab = f.d(c).d(b).evaluate(pt).map_err(err)?;
                    let ba = f.d(b).d(c).evaluate(pt).map_err(err)?;
                    mixed = mixed.max((ab - ba).abs());
                }
            }
        }
    }
    within("relative gradient error", rel, 1e-6)?;
    within("absolute gradient error", abs, 1e-8)?;
    within("mixed partials", mixed, 1e-12)?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let jpts = points(2, 100)?;
    let mut jacobi = 0.0f64;
    for _ in 0..50 {
        let x = random_polynomial_field(&mut rng, chart)?;
        let y = random_polynomial_field(&mut rng, chart)?;
        let z = random_polynomial_field(&mut rng, chart)?;
        let br = |a: &PhaseVectorField, b: &PhaseVectorField| lie_bracket(a, b).map_err(err);
        let sum = br(&x, &br(&y, &z)?)?.add(&br(&y, &br(&z, &x)?)?).add(&br(&z, &br(&x, &y)?)?);
        jacobi = jacobi.max(residual(sum.components(), &jpts)?);
    }
    within("Jacobi identity", jacobi, 1e-9)?;
    Ok(format!(
        "{} expressions: gradient rel {rel:.1e} / abs {abs:.1e}, mixed {mixed:.1e}; Jacobi identity {jacobi:.1e} on 50 triples",
        EXPRESSIONS.len()
    ))
}

fn run_cli(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_geocli")).args(args).output().map_err(err)?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<String, String> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(err)?;
    Ok(path.to_string_lossy().into_owned())
}

fn cli_contract() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let euclid = write(dir.path(), "euclid.json", &model_json(EUCLID, 2))?;
    let broken = write(
        dir.path(),
        "broken.json",
        &format!(r#"{{"dimension": 2, "hamiltonian": "{EUCLID}", "connection": [["0.1", "0"], ["0", "0"]]}}"#),
    )?;
    let malformed = write(dir.path(), "malformed.json", r#"{"dimension": 2, "hamiltonian": "#)?;
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let (code_a, _) = run_cli(&["check", &euclid, "--seed", "7", "--report", a.to_str().unwrap()])?;
    let (code_b, _) = run_cli(&["check", &euclid, "--seed", "7", "--report", b.to_str().unwrap()])?;
    if (code_a, code_b) != (0, 0) {
        return Err(format!("Euclidean model exited with {code_a} and {code_b}"));
    }
    let (ra, rb) = (std::fs::read(&a).map_err(err)?, std::fs::read(&b).map_err(err)?);
    if ra != rb {
        return Err("reports differ between identical runs".into());
    }
    let (code, stdout) = run_cli(&["check", &broken])?;
    if code != 1 {
        return Err(format!("broken model exited with {code}"));
    }
    let report: serde_json::Value = serde_json::from_slice(&stdout).map_err(err)?;
    let nabla = report["records"]
        .as_array()
        .and_then(|rs| rs.iter().find(|r| r["name"] == "nabla_j_vanishes"))
        .and_then(|r| r["max_abs_residual"].as_f64())
        .ok_or("broken report lacks the ∇J record")?;
    within("broken-model ∇J − 0.2", (nabla - 0.2).abs(), 1e-6)?;
    let (code, _) = run_cli(&["check", &malformed])?;
    if code != 2 {
        return Err(format!("malformed model exited with {code}"));
    }
    Ok(format!(
        "exit 0 with byte-identical reports ({} bytes), broken connection exit 1 (∇J = {nabla:.6}), malformed exit 2",
        ra.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("dynamical covariant derivative of J", nabla_suite),
        ("two canonical-connection formulas agree", dual_formulas),
        ("coordinate formulas vs intrinsic definitions", cross_checks),
        ("identity suites", identity_suites),
        ("Jacobi endomorphism is the potential Hessian", jacobi_physics),
        ("Legendre pipeline", legendre_pipeline),
        ("semispray duality and perturbation scaling", duality),
        ("differentiation engine", differentiation_engine),
        ("command-line contract", cli_contract),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {}: {title}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {title}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
