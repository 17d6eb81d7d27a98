//! Model files, the invariant suite and the command implementations behind
//! the `geocli` binary.

pub mod error;
pub mod eval;
pub mod legendre;
pub mod model;
pub mod report;
pub mod suite;

pub use error::CliError;
pub use model::{load_model, parse_model, Model, ModelFile};
pub use report::{CheckRecord, CheckReport, Tolerances};
