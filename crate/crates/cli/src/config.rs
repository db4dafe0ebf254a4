//! Flag and JSON-file configuration, merged with flags taking precedence.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use spherent::norms::{Exponent, NormSpec};
use spherent::Error;

/// A failure with the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CERTIFICATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.into() }
    }

    pub fn certification(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CERTIFICATION, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Certification(_) => EXIT_CERTIFICATION,
            Error::NoConvergence { .. } | Error::SpecDefect(_) | Error::Inconsistent(_) => EXIT_SOLVER,
            _ => EXIT_VALIDATION,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::validation(e.to_string())
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// Reads a JSON object from `path`; a missing path gives an empty object.
pub fn load_file(path: Option<&Path>) -> Outcome<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Failure::validation("config file must hold a JSON object")),
        Err(e) => Err(Failure::validation(format!("config file {}: {e}", path.display()))),
    }
}

/// Overlays the non-null fields of `flags` on `file` and decodes the result.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: &Map<String, Value>) -> Outcome<T> {
    let mut merged = file.clone();
    merged.remove("command");
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| Failure::validation(e.to_string()))? else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in given {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::validation(format!("config: {e}")))
}

pub fn parse_json(s: &str) -> Result<Value, String> {
    serde_json::from_str(s).map_err(|e| format!("invalid JSON: {e}"))
}

pub fn norm_from(value: Option<&Value>, what: &str) -> Outcome<NormSpec> {
    let v = value.ok_or_else(|| Failure::validation(format!("missing {what}")))?;
    serde_json::from_value(v.clone()).map_err(|e| Failure::validation(format!("{what}: {e}")))
}

pub fn exponent(s: &str) -> Outcome<Exponent> {
    let e: Exponent = s.parse().map_err(Failure::validation)?;
    if !(e.value() > 0.0) {
        return Err(Failure::validation(format!("exponent must be positive, got {s}")));
    }
    Ok(e)
}

/// `a/b` fractions or plain numbers.
pub fn number(s: &str) -> Outcome<f64> {
    let t = s.trim();
    let v = match t.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| Failure::validation(format!("bad number {s:?}")))?;
            let d: f64 = d.trim().parse().map_err(|_| Failure::validation(format!("bad number {s:?}")))?;
            n / d
        }
        None => t.parse().map_err(|_| Failure::validation(format!("bad number {s:?}")))?,
    };
    if !v.is_finite() {
        return Err(Failure::validation(format!("bad number {s:?}")));
    }
    Ok(v)
}

/// `a..b` (inclusive), `a..=b`, a comma list, or a single integer.
pub fn int_list(s: &str) -> Outcome<Vec<u32>> {
    let bad = || Failure::validation(format!("bad integer list {s:?}"));
    let t = s.trim();
    if let Some((a, b)) = t.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    t.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_numbers() {
        assert_eq!(int_list("6..9").unwrap(), vec![6, 7, 8, 9]);
        assert_eq!(int_list("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(int_list("1, 4,9").unwrap(), vec![1, 4, 9]);
        assert!(int_list("5..2").is_err());
        assert_eq!(number("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(number("0.25").unwrap(), 0.25);
        assert!(number("x").is_err());
        assert!(exponent("inf").unwrap().is_infinite());
        assert!(exponent("-1").is_err());
    }
}
