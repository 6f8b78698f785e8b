//! Structural diff over emitted JSON reports.
//!
//! Reports are compared as parsed JSON with object keys walked in sorted
//! order, so the diff is stable regardless of serialization details.  Each
//! differing leaf produces one line:
//!
//! ```text
//! ~ path.to.value: old -> new     (changed)
//! + path.to.value: new            (only in the new report)
//! - path.to.value: old            (only in the old report)
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde_json::Value;

/// Reasons a diff cannot be computed at all.
#[derive(Debug)]
pub enum DiffError {
    /// The two reports declare different schema versions; field-by-field
    /// comparison would be misleading.
    SchemaMismatch { old: String, new: String },
    /// A report root is not a JSON object.
    NotAReport { side: &'static str },
}

impl fmt::Display for DiffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffError::SchemaMismatch { old, new } => write!(
                f,
                "schema version mismatch: old report declares {old}, new report \
                 declares {new}"
            ),
            DiffError::NotAReport { side } => {
                write!(f, "{side} file is not a JSON report object")
            }
        }
    }
}

impl std::error::Error for DiffError {}

const VALUE_PREVIEW: usize = 120;

/// Compact single-line preview of a value for diff output.
fn preview(v: &Value) -> String {
    let s = serde_json::to_string(v).unwrap_or_else(|_| "<unprintable>".to_string());
    if s.len() > VALUE_PREVIEW {
        let mut cut = VALUE_PREVIEW;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        format!("{}...", &s[..cut])
    } else {
        s
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn walk(path: &str, old: &Value, new: &Value, out: &mut Vec<String>) {
    match (old, new) {
        (Value::Object(o), Value::Object(n)) => {
            let keys: BTreeSet<&String> = o.keys().chain(n.keys()).collect();
            for key in keys {
                let p = join(path, key);
                match (o.get(key.as_str()), n.get(key.as_str())) {
                    (Some(a), Some(b)) => walk(&p, a, b, out),
                    (Some(a), None) => out.push(format!("- {p}: {}", preview(a))),
                    (None, Some(b)) => out.push(format!("+ {p}: {}", preview(b))),
                    (None, None) => unreachable!("key from union of both maps"),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            let shared = a.len().min(b.len());
            for i in 0..shared {
                walk(&format!("{path}[{i}]"), &a[i], &b[i], out);
            }
            for (i, item) in a.iter().enumerate().skip(shared) {
                out.push(format!("- {path}[{i}]: {}", preview(item)));
            }
            for (i, item) in b.iter().enumerate().skip(shared) {
                out.push(format!("+ {path}[{i}]: {}", preview(item)));
            }
        }
        _ => {
            if old != new {
                out.push(format!("~ {path}: {} -> {}", preview(old), preview(new)));
            }
        }
    }
}

/// Compares two reports structurally.  Returns the ordered list of
/// differences (empty when the reports agree) or a schema-level error.
pub fn diff_reports(old: &Value, new: &Value) -> Result<Vec<String>, DiffError> {
    let o = old
        .as_object()
        .ok_or(DiffError::NotAReport { side: "old" })?;
    let n = new
        .as_object()
        .ok_or(DiffError::NotAReport { side: "new" })?;
    let schema_of = |m: &serde_json::Map<String, Value>| {
        m.get("schema_version")
            .map(preview)
            .unwrap_or_else(|| "<absent>".to_string())
    };
    let (so, sn) = (schema_of(o), schema_of(n));
    if so != sn {
        return Err(DiffError::SchemaMismatch { old: so, new: sn });
    }
    let mut out = Vec::new();
    walk("", old, new, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn identical_reports_diff_empty() {
        let r = json!({"schema_version": "1", "jobs": [{"p": 1}], "x": 2.5});
        assert!(diff_reports(&r, &r).unwrap().is_empty());
    }

    #[test]
    fn changed_nested_value_names_full_path() {
        let old = json!({"schema_version": "1",
            "jobs": [{"structure": {"equations": [{"name": "casimir", "residual": "0"}]}}]});
        let new = json!({"schema_version": "1",
            "jobs": [{"structure": {"equations": [{"name": "casimir", "residual": "3"}]}}]});
        let lines = diff_reports(&old, &new).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(
            lines[0],
            "~ jobs[0].structure.equations[0].residual: \"0\" -> \"3\""
        );
    }

    #[test]
    fn added_and_removed_entries_are_marked() {
        let old = json!({"schema_version": "1", "numerics": [1, 2, 3], "gone": true});
        let new = json!({"schema_version": "1", "numerics": [1, 2], "fresh": false});
        let lines = diff_reports(&old, &new).unwrap();
        assert!(lines.contains(&"+ fresh: false".to_string()), "{lines:?}");
        assert!(lines.contains(&"- gone: true".to_string()), "{lines:?}");
        assert!(lines.contains(&"- numerics[2]: 3".to_string()), "{lines:?}");
    }

    #[test]
    fn schema_version_gate() {
        let old = json!({"schema_version": "1"});
        let new = json!({"schema_version": "2"});
        match diff_reports(&old, &new) {
            Err(DiffError::SchemaMismatch { .. }) => {}
            other => panic!("expected schema mismatch, got {other:?}"),
        }
    }

    #[test]
    fn long_values_are_truncated() {
        let old = json!({"schema_version": "1", "blob": "x".repeat(400)});
        let new = json!({"schema_version": "1", "blob": "y".repeat(400)});
        let lines = diff_reports(&old, &new).unwrap();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].len() < 300, "{}", lines[0].len());
        assert!(lines[0].contains("..."));
    }
}
