use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use varilab_core::{Error, ErrorClass};

use crate::config::RunConfig;

/// One labelled result: which operation produced it and in what units.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub operation: &'static str,
    pub units: &'static str,
    pub result: Value,
}

impl Record {
    pub fn new<T: Serialize>(operation: &'static str, units: &'static str, result: &T) -> Self {
        let result = serde_json::to_value(result).unwrap_or(Value::Null);
        Self { operation, units, result }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of the input (or generated) mesh file followed by its sidecar.
    pub mesh_sha256: Option<String>,
    pub wall_time_s: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub provenance: Provenance,
}

/// Hash of a mesh file and, if present, its sidecar.
pub fn mesh_hash(path: &Path) -> std::io::Result<String> {
    let mut h = Sha256::new();
    h.update(std::fs::read(path)?);
    let side = varilab_core::mesh::io::sidecar_path(path);
    if side.exists() {
        h.update(std::fs::read(side)?);
    }
    Ok(format!("{:x}", h.finalize()))
}

/// Errors as the front end reports them.
#[derive(Debug, Clone)]
pub struct CliError {
    pub code: String,
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: "Usage".into(), class: ErrorClass::InvalidInput, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(self.class)
    }

    /// Single-line JSON for the error stream.
    pub fn to_json_line(&self) -> String {
        json!({
            "error": self.code,
            "class": self.class,
            "message": self.message,
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self { code: e.code().into(), class: e.class(), message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

/// 2 for invalid input, 3 for numeric failure, 4 for an out-of-hypothesis
/// abort.
pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::InvalidInput => 2,
        ErrorClass::Numeric => 3,
        ErrorClass::OutOfHypothesis => 4,
    }
}

/// Exit code of a suite run with failing criteria.
pub const CRITERIA_FAILED: i32 = 1;
