use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: u32 = 1;

/// Outcome of a subcommand: a JSON body and whether every checked property held.
pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub body: Value,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &'static str, seed: u64, body: impl Serialize, pass: bool) -> Self {
        Self {
            command,
            seed,
            tolerances: BTreeMap::new(),
            body: serde_json::to_value(body).expect("report bodies serialize"),
            pass,
        }
    }

    pub fn tol(mut self, name: &'static str, value: f64) -> Self {
        self.tolerances.insert(name, value);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "pass": self.pass,
            "result": self.body,
        })
    }
}

/// Bad input: unreadable files, malformed JSON, or values the library rejects.
#[derive(Debug)]
pub struct InputError {
    pub message: String,
    pub file: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl InputError {
    pub fn msg(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            file: None,
            line: None,
            column: None,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "error": self.message,
            "file": self.file,
            "line": self.line,
            "column": self.column,
        })
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}: ")?;
        }
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, "line {l}, column {c}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl From<ncp_lab::Error> for InputError {
    fn from(e: ncp_lab::Error) -> Self {
        Self::msg(e.to_string())
    }
}

/// Reads and deserializes a JSON file, keeping the parser position on failure.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let file = Some(path.display().to_string());
    let text = std::fs::read_to_string(path).map_err(|e| InputError {
        message: e.to_string(),
        file: file.clone(),
        line: None,
        column: None,
    })?;
    serde_json::from_str(&text).map_err(|e| InputError {
        message: e.to_string(),
        file,
        line: Some(e.line()),
        column: Some(e.column()),
    })
}
