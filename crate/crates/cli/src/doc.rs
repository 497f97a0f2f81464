//! Input and output documents, and the number format used on output.

use embed_linalg::{Mat, Tolerances};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A matrix as read from and written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

impl MatrixDocument {
    pub fn from_mat(m: &Mat, label: Option<String>) -> Self {
        MatrixDocument { dim: m.dim(), rows: m.rows(), label, tolerances: None }
    }

    pub fn to_mat(&self) -> Result<Mat, InputError> {
        if !(2..=4).contains(&self.dim) {
            return Err(InputError::new(None, format!("dim must be 2, 3 or 4, got {}", self.dim)));
        }
        if self.rows.len() != self.dim {
            return Err(InputError::new(None, format!("dim is {} but {} rows given", self.dim, self.rows.len())));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.dim {
                return Err(InputError::new(None, format!("row {} has {} entries, expected {}", i + 1, r.len(), self.dim)));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(InputError::new(None, format!("row {} has a non-finite entry", i + 1)));
            }
        }
        Mat::from_rows(&self.rows).map_err(|e| InputError::new(None, e.to_string()))
    }
}

/// Malformed input, with the 1-based line it was found on when known.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub line: Option<usize>,
    pub message: String,
}

impl InputError {
    pub fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        InputError { line, message: message.into() }
    }
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Parse a matrix from a JSON document or from plain rows.
///
/// Plain rows hold one matrix row per line, entries separated by
/// whitespace or commas. Blank lines and `#` comments are skipped.
pub fn parse_matrix(text: &str) -> Result<MatrixDocument, InputError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: MatrixDocument = serde_json::from_str(text).map_err(json_error)?;
        doc.to_mat()?;
        return Ok(doc);
    }
    if trimmed.starts_with('[') {
        let rows: Vec<Vec<f64>> = serde_json::from_str(text).map_err(json_error)?;
        let doc = MatrixDocument { dim: rows.len(), rows, label: None, tolerances: None };
        doc.to_mat()?;
        return Ok(doc);
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut lines: Vec<usize> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        let row = fields
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(InputError::new(Some(k + 1), format!("cannot read '{f}' as a finite number"))),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(InputError::new(
                    Some(k + 1),
                    format!("expected {} entries, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
        lines.push(k + 1);
    }
    if rows.is_empty() {
        return Err(InputError::new(None, "no matrix rows in input"));
    }
    if rows.len() != rows[0].len() {
        let last = *lines.last().expect("non-empty");
        return Err(InputError::new(Some(last), format!("{} rows of {} entries is not square", rows.len(), rows[0].len())));
    }
    let doc = MatrixDocument { dim: rows.len(), rows, label: None, tolerances: None };
    doc.to_mat().map_err(|e| InputError::new(lines.first().copied(), e.message))?;
    Ok(doc)
}

pub(crate) fn json_error(e: serde_json::Error) -> InputError {
    InputError::new(Some(e.line()), format!("column {}: {}", e.column(), strip_position(&e.to_string())))
}

fn strip_position(msg: &str) -> &str {
    msg.split(" at line ").next().unwrap_or(msg)
}

/// 17 significant digits, so every `f64` reads back bit for bit
/// (except `-0`, which prints as `0`).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x + 0.0)
    } else {
        "null".to_string()
    }
}

/// Pretty JSON with every float printed by [`fmt_f64`].
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) if !n.is_f64() => out.push_str(&u.to_string()),
            (_, Some(i), _) if !n.is_f64() => out.push_str(&i.to_string()),
            (_, _, Some(f)) => out.push_str(&fmt_f64(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        // Rows of numbers stay on one line.
        Value::Array(items) if items.iter().all(Value::is_number) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(item, indent, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(item, indent + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}
