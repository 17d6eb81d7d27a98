use std::path::PathBuf;

use thiserror::Error;

/// Names accepted by `geocli eval --object`.
pub const OBJECTS: [&str; 8] = [
    "connection",
    "curvature",
    "jacobi",
    "tension",
    "torsion",
    "strong_torsion",
    "almost_complex",
    "metric",
];

/// Anything that stops a command before it can produce a verdict. All of
/// these map to exit status 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed model file: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("unknown object `{0}`; valid objects are: {list}", list = OBJECTS.join(", "))]
    UnknownObject(String),
    #[error("bad point `{text}`: {message}")]
    Point { text: String, message: String },
    #[error(transparent)]
    Core(#[from] cotangent::Error),
}

impl CliError {
    pub(crate) fn field(field: impl Into<String>, message: impl ToString) -> Self {
        CliError::Field {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
