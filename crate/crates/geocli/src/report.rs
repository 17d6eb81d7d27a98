//! Machine-readable reports and their human-readable summary.

use std::fmt::Write as _;

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A real number serialized with 17 significant digits; non-finite values
/// become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

fn as_num<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    Num(*v).serialize(s)
}

/// The three tolerance regimes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Derivative-free identities.
    #[serde(serialize_with = "as_num")]
    pub algebraic: f64,
    /// Identities built from symbolic derivatives.
    #[serde(serialize_with = "as_num")]
    pub symbolic: f64,
    /// Newton- and finite-difference-limited identities.
    #[serde(serialize_with = "as_num")]
    pub numeric: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-12,
            symbolic: 1e-9,
            numeric: 1e-6,
        }
    }
}

impl Tolerances {
    /// Operator identities that hold to a decade below the symbolic regime.
    pub fn identity(&self) -> f64 {
        self.symbolic * 0.1
    }
}

/// One verified identity.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// The mathematical statement under test.
    pub anchor: String,
    pub max_abs_residual: Num,
    pub tolerance: Num,
    pub points_evaluated: usize,
    /// Always `true` for informational records.
    pub pass: bool,
    pub informational: bool,
    pub within_tolerance: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(name: &str, anchor: &str, residual: f64, tolerance: f64, points: usize) -> Self {
        let within = residual <= tolerance;
        Self {
            name: name.to_string(),
            anchor: anchor.to_string(),
            max_abs_residual: Num(residual),
            tolerance: Num(tolerance),
            points_evaluated: points,
            pass: within,
            informational: false,
            within_tolerance: within,
            note: None,
        }
    }

    /// Marks the record as a diagnostic that never fails the run.
    pub fn informational(mut self) -> Self {
        self.informational = true;
        self.pass = true;
        self
    }

    pub fn informational_if(self, cond: bool) -> Self {
        if cond {
            self.informational()
        } else {
            self
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Like [`with_note`](Self::with_note) but only when the check is out of
    /// tolerance.
    pub fn note_on_miss(self, note: impl Into<String>) -> Self {
        if self.within_tolerance {
            self
        } else {
            self.with_note(note)
        }
    }
}

/// One row of the perturbed-semispray scaling table.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationEntry {
    pub epsilon: Num,
    pub symmetric_fiber_jacobian: Num,
    pub semibasic_condition: Num,
    pub metric_condition: Num,
    pub symplectic_condition: Num,
}

/// Output of `check` and `legendre`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub model: String,
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub count: usize,
    pub sampler: String,
    pub tolerances: Tolerances,
    pub records: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub perturbation: Vec<PerturbationEntry>,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(model: &str, command: &str, seed: u64, count: usize, tolerances: Tolerances) -> Self {
        Self {
            model: model.to_string(),
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            count,
            sampler: cotangent::sampling::SAMPLER_ALGORITHM.to_string(),
            tolerances,
            records: Vec::new(),
            perturbation: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.pass &= record.pass;
        self.records.push(record);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    /// A fixed-width summary for a terminal.
    pub fn table(&self) -> String {
        let width = self.records.iter().map(|r| r.name.len()).max().unwrap_or(4).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "{} ({}), seed {}, {} points", self.model, self.command, self.seed, self.count);
        let _ = writeln!(out, "{:<width$}  {:>10}  {:>9}  result", "check", "residual", "tolerance");
        for r in &self.records {
            let verdict = match (r.informational, r.within_tolerance) {
                (false, true) => "pass",
                (false, false) => "FAIL",
                (true, true) => "info",
                (true, false) => "info (out of tolerance)",
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:>10.3e}  {:>9.1e}  {verdict}",
                r.name, r.max_abs_residual.0, r.tolerance.0
            );
            if let Some(note) = &r.note {
                let _ = writeln!(out, "{:<width$}    note: {note}", "");
            }
        }
        let _ = writeln!(out, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}
