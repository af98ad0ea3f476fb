//! Run reports: a fixed envelope around a command-specific result.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gwsplit::Error;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const OK: i32 = 0;
pub const NEGATIVE: i32 = 1;
pub const SCHEMA: i32 = 2;
pub const ALGEBRA: i32 = 3;
pub const CONVENTION: i32 = 4;

pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::SignConvention(_) => CONVENTION,
        e if e.is_algebraic() => ALGEBRA,
        _ => SCHEMA,
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::MismatchedAlgebra => "mismatched_algebra",
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::SingularPairing(_) => "singular_pairing",
        Error::Validation(_) => "validation",
        Error::Degree(_) => "degree",
        Error::ArityMismatch { .. } => "arity_mismatch",
        Error::ChernDegree { .. } => "chern_degree",
        Error::DegreeOverflow { .. } => "degree_overflow",
        Error::SignConvention(_) => "sign_convention",
        Error::UnknownBasis(_) => "unknown_basis",
        Error::Schema(_) => "schema",
        Error::Json(_) => "json",
        Error::Io(_) => "io",
    }
}

pub fn sha256_file(path: &Path) -> Result<String, Error> {
    let bytes = std::fs::read(path).map_err(Error::Io)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// What a command hands back before the envelope is added.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub status: String,
    pub result: Value,
    pub text: Vec<String>,
    pub diagnostics: Vec<String>,
    pub assumptions: Vec<String>,
    /// Every file read, the main input first.
    pub files: Vec<PathBuf>,
    pub metadata: BTreeMap<String, Value>,
}

impl Outcome {
    pub fn new(code: i32, status: impl Into<String>) -> Self {
        Outcome { code, status: status.into(), result: Value::Null, ..Default::default() }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }
}

pub struct Envelope<'a> {
    pub command: &'a [String],
    pub convention: &'a str,
    pub max_arity: usize,
}

impl Envelope<'_> {
    fn digests(&self, files: &[PathBuf]) -> Value {
        let mut m = BTreeMap::new();
        for f in files {
            let d = sha256_file(f).unwrap_or_else(|e| format!("unreadable: {e}"));
            m.insert(f.display().to_string(), Value::String(d));
        }
        json!(m)
    }

    pub fn wrap(&self, o: &Outcome) -> Value {
        json!({
            "command": self.command,
            "settings": { "leibniz_sign": self.convention, "max_arity": self.max_arity },
            "inputs": self.digests(&o.files),
            "status": o.status,
            "exit_code": o.code,
            "result": o.result,
            "diagnostics": o.diagnostics,
            "assumptions": o.assumptions,
            "metadata": o.metadata,
        })
    }

    pub fn wrap_error(&self, e: &Error, files: &[PathBuf]) -> Value {
        json!({
            "command": self.command,
            "settings": { "leibniz_sign": self.convention, "max_arity": self.max_arity },
            "inputs": self.digests(files),
            "status": "error",
            "exit_code": error_code(e),
            "error": { "kind": error_kind(e), "message": e.to_string() },
        })
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}
