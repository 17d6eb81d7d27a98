//! Model files: the on-disk description of a geometry to check.

use std::path::Path;

use cotangent::cotangent::{AdaptedTangentStructure, NonlinearConnection};
use cotangent::dynamics::JRegularField;
use cotangent::expr::{CoordinateChart, ExprMatrix, ScalarField};
use cotangent::frame::PhaseVectorField;
use cotangent::hamilton::HamiltonModel;
use cotangent::sampling::{sample_points, SamplingBox};
use cotangent::Point;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// The structured-text model description, exactly as read from disk.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangent_structure: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_field: Option<VectorFieldSpec>,
    #[serde(default)]
    pub sampling: SamplingSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VectorFieldSpec {
    pub xi: Vec<String>,
    pub chi: Vec<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    /// One `[lo, hi]` interval per base coordinate; defaults to `[-1, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_box: Option<Vec<[f64; 2]>>,
    /// One `[lo, hi]` interval per fiber coordinate; defaults to `[-2, 2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_box: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_min_norm")]
    pub p_min_norm: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_min_norm() -> f64 {
    SamplingBox::DEFAULT_MIN_NORM
}

fn default_seed() -> u64 {
    42
}

fn default_count() -> usize {
    100
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            x_box: None,
            p_box: None,
            p_min_norm: default_min_norm(),
            seed: default_seed(),
            count: default_count(),
        }
    }
}

/// A validated model with every expression parsed.
#[derive(Clone, Debug)]
pub struct Model {
    pub id: String,
    pub file: ModelFile,
    pub chart: CoordinateChart,
    pub hamiltonian: Option<ScalarField>,
    pub lagrangian: Option<ScalarField>,
    pub connection: Option<NonlinearConnection>,
    pub tangent_structure: Option<AdaptedTangentStructure>,
    pub vector_field: Option<PhaseVectorField>,
    pub sampling: SamplingBox,
}

/// Where the field, tangent structure and connection used by the checks
/// came from.
#[derive(Clone, Debug)]
pub struct Ingredients {
    pub hamilton: Option<HamiltonModel>,
    pub field: JRegularField,
    /// `ρ` is the Hamiltonian field of the model's `H`.
    pub rho_from_h: bool,
    /// `J` is built from the fiber Hessian of `H`.
    pub j_from_h: bool,
    /// The connection in use, either supplied or the canonical one of `ρ`.
    pub connection: NonlinearConnection,
    pub connection_supplied: bool,
}

/// Reads and validates a model file; the identifier is the file stem.
pub fn load_model(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".to_string());
    parse_model(&id, &text)
}

pub fn parse_model(id: &str, text: &str) -> Result<Model, CliError> {
    let file: ModelFile = serde_json::from_str(text)?;
    Model::from_file(id, file)
}

fn scalar(field: &str, src: &str, chart: CoordinateChart) -> Result<ScalarField, CliError> {
    ScalarField::parse(src, chart).map_err(|e| CliError::field(field, e))
}

fn matrix(field: &str, rows: &[Vec<String>], chart: CoordinateChart) -> Result<ExprMatrix, CliError> {
    let n = chart.dim();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        let shape: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(CliError::field(
            field,
            format!("shape mismatch: expected {n}x{n}, got rows of lengths {shape:?}"),
        ));
    }
    let mut m = ExprMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, src) in row.iter().enumerate() {
            let f = scalar(&format!("{field}[{i}][{j}]"), src, chart)?;
            m.set(i, j, f.into_expr());
        }
    }
    Ok(m)
}

fn intervals(field: &str, given: &Option<Vec<[f64; 2]>>, n: usize, default: (f64, f64)) -> Result<Vec<(f64, f64)>, CliError> {
    match given {
        None => Ok(vec![default; n]),
        Some(v) if v.len() != n => Err(CliError::field(
            field,
            format!("shape mismatch: expected {n} intervals, got {}", v.len()),
        )),
        Some(v) => v
            .iter()
            .enumerate()
            .map(|(i, &[lo, hi])| {
                if lo.is_finite() && hi.is_finite() && lo <= hi {
                    Ok((lo, hi))
                } else {
                    Err(CliError::field(format!("{field}[{i}]"), format!("invalid interval [{lo}, {hi}]")))
                }
            })
            .collect(),
    }
}

impl Model {
    pub fn from_file(id: &str, file: ModelFile) -> Result<Self, CliError> {
        let n = file.dimension;
        if n == 0 {
            return Err(CliError::field("dimension", "must be at least 1"));
        }
        let chart = CoordinateChart::cotangent(n);
        let hamiltonian = file
            .hamiltonian
            .as_deref()
            .map(|s| scalar("hamiltonian", s, chart))
            .transpose()?;
        let lagrangian = file
            .lagrangian
            .as_deref()
            .map(|s| scalar("lagrangian", s, CoordinateChart::tangent(n)))
            .transpose()?;
        let connection = file
            .connection
            .as_ref()
            .map(|rows| Ok::<_, CliError>(NonlinearConnection::new(chart, matrix("connection", rows, chart)?)?))
            .transpose()?;
        let tangent_structure = file
            .tangent_structure
            .as_ref()
            .map(|rows| Ok::<_, CliError>(AdaptedTangentStructure::from_lower(chart, matrix("tangent_structure", rows, chart)?)?))
            .transpose()?;
        let vector_field = file
            .vector_field
            .as_ref()
            .map(|vf| {
                for (name, v) in [("vector_field.xi", &vf.xi), ("vector_field.chi", &vf.chi)] {
                    if v.len() != n {
                        return Err(CliError::field(
                            name,
                            format!("shape mismatch: expected {n} components, got {}", v.len()),
                        ));
                    }
                }
                let parse_all = |name: &str, v: &[String]| {
                    v.iter()
                        .enumerate()
                        .map(|(i, s)| scalar(&format!("{name}[{i}]"), s, chart))
                        .collect::<Result<Vec<_>, _>>()
                };
                let xi = parse_all("vector_field.xi", &vf.xi)?;
                let chi = parse_all("vector_field.chi", &vf.chi)?;
                PhaseVectorField::from_split(chart, xi, chi).map_err(|e| CliError::field("vector_field", e))
            })
            .transpose()?;

        if hamiltonian.is_none() {
            match (&tangent_structure, &vector_field) {
                (Some(_), Some(_)) => {}
                (None, _) => {
                    return Err(CliError::field(
                        "tangent_structure",
                        "required (together with vector_field) when no hamiltonian is given",
                    ))
                }
                (_, None) => {
                    return Err(CliError::field(
                        "vector_field",
                        "required (together with tangent_structure) when no hamiltonian is given",
                    ))
                }
            }
        }

        let s = &file.sampling;
        let sampling = SamplingBox {
            x_box: intervals("sampling.x_box", &s.x_box, n, SamplingBox::DEFAULT_X)?,
            p_box: intervals("sampling.p_box", &s.p_box, n, SamplingBox::DEFAULT_P)?,
            p_min_norm: s.p_min_norm,
        };
        if !(s.p_min_norm >= 0.0 && s.p_min_norm.is_finite()) {
            return Err(CliError::field("sampling.p_min_norm", "must be a finite non-negative number"));
        }
        if s.count == 0 {
            return Err(CliError::field("sampling.count", "must be at least 1"));
        }

        Ok(Self {
            id: id.to_string(),
            chart,
            hamiltonian,
            lagrangian,
            connection,
            tangent_structure,
            vector_field,
            sampling,
            file,
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Short description of how the dynamics is specified.
    pub fn route(&self) -> &'static str {
        match (&self.hamiltonian, &self.vector_field, &self.tangent_structure) {
            (Some(_), None, None) => "hamilton",
            (Some(_), _, _) => "hamilton with explicit overrides",
            (None, _, _) => "explicit ingredients",
        }
    }

    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<Point>, CliError> {
        Ok(sample_points(self.chart, &self.sampling, seed, count)?)
    }

    /// Assembles `(ρ, J, N)`, checking regularity of `H` and `J` at `pts`.
    pub fn ingredients(&self, pts: &[Point]) -> Result<Ingredients, CliError> {
        let hamilton = self
            .hamiltonian
            .clone()
            .map(|h| HamiltonModel::build(h, pts))
            .transpose()?;
        let rho = match (&self.vector_field, &hamilton) {
            (Some(v), _) => v.clone(),
            (None, Some(m)) => m.rho().clone(),
            (None, None) => unreachable!("validated in from_file"),
        };
        let j = match (&self.tangent_structure, &hamilton) {
            (Some(j), _) => j.clone(),
            (None, Some(m)) => m.tangent_structure().clone(),
            (None, None) => unreachable!("validated in from_file"),
        };
        j.check_regular(pts, cotangent::cotangent::REGULARITY_FLOOR)?;
        let field = JRegularField::new(rho, j).map_err(cotangent::Error::from)?;
        let connection = match &self.connection {
            Some(c) => c.clone(),
            None => field.canonical_connection(),
        };
        Ok(Ingredients {
            rho_from_h: hamilton.is_some() && self.vector_field.is_none(),
            j_from_h: hamilton.is_some() && self.tangent_structure.is_none(),
            connection_supplied: self.connection.is_some(),
            hamilton,
            field,
            connection,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_hamilton_model() {
        let m = parse_model("e", r#"{"dimension": 2, "hamiltonian": "0.5*(p1^2+p2^2)+x1^2*x2"}"#).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.file.sampling.seed, 42);
        assert_eq!(m.file.sampling.count, 100);
        assert_eq!(m.sampling.p_min_norm, 0.1);
        assert_eq!(m.route(), "hamilton");
    }

    #[test]
    fn connection_shape_is_checked() {
        let e = parse_model("e", r#"{"dimension": 2, "connection": [["0"]]}"#).unwrap_err();
        assert!(e.to_string().contains("connection") && e.to_string().contains("shape"), "{e}");
    }

    #[test]
    fn parse_errors_name_the_field_and_offset() {
        let e = parse_model("e", r#"{"dimension": 1, "hamiltonian": "p1^2 + q1"}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("hamiltonian") && msg.contains("offset 7"), "{msg}");
        let e = parse_model(
            "e",
            r#"{"dimension": 1, "hamiltonian": "p1^2", "connection": [["x1*"]]}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("connection[0][0]"), "{e}");
    }

    #[test]
    fn some_dynamics_is_required() {
        let e = parse_model("e", r#"{"dimension": 1, "tangent_structure": [["1"]]}"#).unwrap_err();
        assert!(e.to_string().contains("vector_field"));
        let ok = parse_model(
            "e",
            r#"{"dimension": 1, "tangent_structure": [["1"]], "vector_field": {"xi": ["p1"], "chi": ["0"]}}"#,
        )
        .unwrap();
        assert_eq!(ok.route(), "explicit ingredients");
    }

    #[test]
    fn unknown_fields_and_bad_json_are_rejected() {
        assert!(matches!(
            parse_model("e", r#"{"dimension": 1, "hamiltonain": "p1^2"}"#),
            Err(CliError::Syntax { .. })
        ));
        assert!(matches!(parse_model("e", "{\"dimension\": "), Err(CliError::Syntax { .. })));
        assert!(parse_model("e", r#"{"dimension": 0, "hamiltonian": "1"}"#).is_err());
    }

    #[test]
    fn sampling_box_shapes() {
        let e = parse_model(
            "e",
            r#"{"dimension": 2, "hamiltonian": "p1^2+p2^2", "sampling": {"x_box": [[0, 1]]}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("sampling.x_box"));
        let m = parse_model(
            "e",
            r#"{"dimension": 1, "hamiltonian": "p1^2", "sampling": {"p_box": [[0.5, 1]], "seed": 7, "count": 3}}"#,
        )
        .unwrap();
        let pts = m.sample(7, 3).unwrap();
        assert!(pts.iter().all(|p| (0.5..=1.0).contains(&p.coords()[1])));
    }
}
