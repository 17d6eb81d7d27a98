//! `geocli eval`: one named object at one point.

use std::fmt::Write as _;

use cotangent::cotangent::{intrinsic_curvature, intrinsic_strong_torsion, intrinsic_tension, intrinsic_torsion};
use cotangent::dynamics::{almost_complex, jacobi_endomorphism};
use cotangent::expr::{ChartPoint, Evaluator, Expr};
use cotangent::Point;

use crate::error::{CliError, OBJECTS};
use crate::model::Model;

/// Parses `"x=1,1;p=0,0.5"` (either order, whitespace allowed) into a point.
pub fn parse_point(model: &Model, text: &str) -> Result<Point, CliError> {
    let bad = |message: String| CliError::Point {
        text: text.to_string(),
        message,
    };
    let n = model.dim();
    let (mut x, mut p) = (None, None);
    for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected `x=…` or `p=…`, got `{part}`")))?;
        let values = values
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| bad(format!("`{v}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != n {
            return Err(bad(format!("`{}` needs {n} values, got {}", key.trim(), values.len())));
        }
        match key.trim() {
            "x" => x = Some(values),
            "p" => p = Some(values),
            other => return Err(bad(format!("unknown coordinate group `{other}`"))),
        }
    }
    let (x, p) = match (x, p) {
        (Some(x), Some(p)) => (x, p),
        _ => return Err(bad("both `x=` and `p=` are required".to_string())),
    };
    if let Some(v) = x.iter().chain(&p).find(|v| !v.is_finite()) {
        return Err(bad(format!("coordinate {v} is not finite")));
    }
    ChartPoint::from_parts(model.chart, &x, &p).map_err(|e| bad(e.to_string()))
}

/// An evaluated object: shape plus row-major values.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated {
    pub object: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl Evaluated {
    /// Full-precision printout; rank-3 arrays are printed as `n` blocks of
    /// `n × n` matrices indexed by the first slot.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let dims: Vec<String> = self.shape.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{} [{}]", self.object, dims.join("x"));
        let cols = *self.shape.last().unwrap_or(&1);
        let block = if self.shape.len() == 3 { self.shape[1] * cols } else { usize::MAX };
        for (r, row) in self.values.chunks(cols).enumerate() {
            if self.shape.len() == 3 && (r * cols).is_multiple_of(block) {
                let _ = writeln!(out, "[{}]", r * cols / block + 1);
            }
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }
}

pub fn evaluate_object(model: &Model, object: &str, pt: &Point) -> Result<Evaluated, CliError> {
    if !OBJECTS.contains(&object) {
        return Err(CliError::UnknownObject(object.to_string()));
    }
    let pts = std::slice::from_ref(pt);
    let ing = model.ingredients(pts)?;
    let n = model.dim();
    let rho = ing.field.rho();
    let j = ing.field.tangent_structure();
    let conn = &ing.connection;
    let core = |e: cotangent::expr::ChartError| CliError::Core(e.into());
    let (shape, exprs): (Vec<usize>, Vec<Expr>) = match object {
        "connection" => (vec![n, n], conn.coefficients().entries().to_vec()),
        // R_ijk is read off the intrinsic curvature, Ω(δ_i, δ_j) = −R_ijk ∂/∂p_k.
        "curvature" => (vec![n, n, n], intrinsic_curvature(conn).entries().iter().map(|e| -e).collect()),
        "jacobi" => (vec![n, n], jacobi_endomorphism(rho, conn).map_err(core)?.intrinsic.entries().to_vec()),
        "tension" => (vec![n, n], intrinsic_tension(conn).entries().to_vec()),
        "torsion" => (vec![n, n, n], intrinsic_torsion(j, conn).map_err(core)?.entries().to_vec()),
        "strong_torsion" => (vec![n, n], intrinsic_strong_torsion(rho, j, conn).map_err(core)?.entries().to_vec()),
        "almost_complex" => (
            vec![2 * n, 2 * n],
            almost_complex(&ing.field, conn).map_err(core)?.intrinsic.matrix().entries().to_vec(),
        ),
        "metric" => match &ing.hamilton {
            Some(h) => (vec![n, n], h.metric_upper().entries().to_vec()),
            None => (vec![n, n], j.upper().entries().to_vec()),
        },
        _ => unreachable!("checked against OBJECTS"),
    };
    let values = Evaluator::new(pt.coords())
        .eval_all(&exprs)
        .map_err(|source| cotangent::Error::AtPoint {
            point: pt.coords().to_vec(),
            source,
        })?;
    Ok(Evaluated {
        object: object.to_string(),
        shape,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn model(src: &str, n: usize) -> Model {
        parse_model("m", &format!(r#"{{"dimension": {n}, "hamiltonian": "{src}"}}"#)).unwrap()
    }

    #[test]
    fn point_syntax() {
        let m = model("0.5*(p1^2+p2^2)", 2);
        let pt = parse_point(&m, " p=0, 0.5 ; x=1,1 ").unwrap();
        assert_eq!(pt.coords(), &[1.0, 1.0, 0.0, 0.5]);
        assert!(parse_point(&m, "x=1;p=0,0").is_err());
        assert!(parse_point(&m, "x=1,1").is_err());
        assert!(parse_point(&m, "x=1,a;p=0,0").is_err());
        assert!(parse_point(&m, "q=1,1;p=0,0").is_err());
    }

    #[test]
    fn curved_connection_value() {
        let m = model("0.5*(1+x1^2)*p1^2", 1);
        let pt = parse_point(&m, "x=1;p=1").unwrap();
        let e = evaluate_object(&m, "connection", &pt).unwrap();
        assert!((e.values[0] + 0.5).abs() < 1e-15);
        let c = evaluate_object(&m, "curvature", &pt).unwrap();
        assert_eq!(c.values, vec![0.0]);
    }

    #[test]
    fn jacobi_is_potential_hessian() {
        let m = model("0.5*(p1^2+p2^2)+x1^2*x2", 2);
        let pt = parse_point(&m, "x=1,1;p=0,0.5").unwrap();
        let e = evaluate_object(&m, "jacobi", &pt).unwrap();
        for (got, want) in e.values.iter().zip([2.0, 2.0, 2.0, 0.0]) {
            assert!((got - want).abs() < 1e-12, "{:?}", e.values);
        }
        assert!(e.render().starts_with("jacobi [2x2]\n2.0000000000000000e0 "));
    }

    #[test]
    fn unknown_object_lists_names() {
        let m = model("0.5*p1^2", 1);
        let pt = parse_point(&m, "x=0;p=1").unwrap();
        let msg = evaluate_object(&m, "ricci", &pt).unwrap_err().to_string();
        assert!(msg.contains("ricci") && msg.contains("strong_torsion") && msg.contains("metric"));
    }

    #[test]
    fn rank_three_render() {
        let e = Evaluated {
            object: "t".into(),
            shape: vec![2, 2, 2],
            values: (0..8).map(f64::from).collect(),
        };
        let r = e.render();
        assert_eq!(r.lines().count(), 1 + 2 * 3);
        assert!(r.contains("[2]\n4.0"));
    }
}
