//! Field-wise comparison of two JSON reports.

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Clone, Debug)]
pub struct DiffOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub only: Vec<String>,
    pub ignore: Vec<String>,
}

impl Default for DiffOptions {
    fn default() -> Self {
        DiffOptions { abs_tol: 1e-9, rel_tol: 0.0, only: Vec::new(), ignore: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Difference {
    pub path: String,
    pub a: Value,
    pub b: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_diff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDiff {
    pub report: String,
    pub abs_tolerance: f64,
    pub rel_tolerance: f64,
    pub differences: Vec<Difference>,
}

/// Length of the part of `path` matched by `pattern`, where `[*]` in the
/// pattern matches any array index.
fn match_prefix(path: &str, pattern: &str) -> Option<usize> {
    let (p, q) = (path.as_bytes(), pattern.as_bytes());
    let (mut i, mut j) = (0, 0);
    while j < q.len() {
        if q[j..].starts_with(b"[*]") && i < p.len() && p[i] == b'[' {
            let close = p[i..].iter().position(|&c| c == b']')?;
            i += close + 1;
            j += 3;
        } else if i < p.len() && p[i] == q[j] {
            i += 1;
            j += 1;
        } else {
            return None;
        }
    }
    Some(i)
}

/// Whether `path` is `prefix` or lies below it.
fn under(path: &str, prefix: &str) -> bool {
    match_prefix(path, prefix).is_some_and(|n| {
        let rest = &path[n..];
        rest.is_empty() || rest.starts_with('.') || rest.starts_with('[')
    })
}

/// Whether `path` is an ancestor of something `pattern` selects.
fn above(path: &str, pattern: &str) -> bool {
    path.is_empty()
        || (0..=pattern.len())
            .filter(|&k| pattern.is_char_boundary(k))
            .any(|k| {
                let head = &pattern[..k];
                let next = pattern[k..].chars().next();
                matches!(next, None | Some('.') | Some('[')) && match_prefix(path, head) == Some(path.len())
            })
}

impl DiffOptions {
    fn skipped(&self, path: &str) -> bool {
        self.ignore.iter().any(|p| under(path, p))
    }

    /// Whether `path` or something below or above it is selected.
    fn selected(&self, path: &str) -> bool {
        self.only.is_empty() || self.only.iter().any(|p| under(path, p) || above(path, p))
    }

    fn leaf_selected(&self, path: &str) -> bool {
        self.only.is_empty() || self.only.iter().any(|p| under(path, p))
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "bool",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn walk(a: &Value, b: &Value, path: &str, opts: &DiffOptions, out: &mut Vec<Difference>) -> Result<()> {
    if opts.skipped(path) || !opts.selected(path) {
        return Ok(());
    }
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for key in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                let p = join(path, key);
                match (x.get(key), y.get(key)) {
                    (Some(u), Some(v)) => walk(u, v, &p, opts, out)?,
                    _ if opts.skipped(&p) || !opts.selected(&p) => {}
                    _ => return Err(CliError::validation(format!("schema mismatch: `{p}` is present in only one report"))),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                if opts.leaf_selected(path) {
                    out.push(Difference {
                        path: format!("{path}.len"),
                        a: x.len().into(),
                        b: y.len().into(),
                        abs_diff: None,
                    });
                }
                return Ok(());
            }
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                walk(u, v, &format!("{path}[{i}]"), opts, out)?;
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            if !opts.leaf_selected(path) {
                return Ok(());
            }
            let (u, v) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            let d = (u - v).abs();
            if !(d <= opts.abs_tol + opts.rel_tol * u.abs().max(v.abs())) {
                out.push(Difference { path: path.to_string(), a: a.clone(), b: b.clone(), abs_diff: Some(d) });
            }
        }
        // NaN and infinities are written as null
        (Value::Null, Value::Number(_)) | (Value::Number(_), Value::Null) => {
            if opts.leaf_selected(path) {
                out.push(Difference { path: path.to_string(), a: a.clone(), b: b.clone(), abs_diff: None });
            }
        }
        _ if kind(a) != kind(b) => {
            return Err(CliError::validation(format!(
                "schema mismatch at `{path}`: {} vs {}",
                kind(a),
                kind(b)
            )))
        }
        _ => {
            if a != b && opts.leaf_selected(path) {
                out.push(Difference { path: path.to_string(), a: a.clone(), b: b.clone(), abs_diff: None });
            }
        }
    }
    Ok(())
}

/// Compares two reports of the same kind; structural differences are
/// schema errors, value differences beyond tolerance are listed.
pub fn report_diff(a: &Value, b: &Value, opts: &DiffOptions) -> Result<ReportDiff> {
    let name = |v: &Value| v.get("report").and_then(Value::as_str).map(str::to_string);
    let (ra, rb) = match (name(a), name(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(CliError::validation("schema mismatch: both files must carry a `report` field")),
    };
    if ra != rb {
        return Err(CliError::validation(format!("schema mismatch: comparing a {ra} report with a {rb} report")));
    }
    let mut differences = Vec::new();
    walk(a, b, "", opts, &mut differences)?;
    Ok(ReportDiff {
        report: ra,
        abs_tolerance: opts.abs_tol,
        rel_tolerance: opts.rel_tol,
        differences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn identical_reports_have_no_differences() {
        let a = json!({"report": "gap", "gap": 2.1, "alpha": [0.7, 1.3, 2.1], "agrees": true});
        assert!(report_diff(&a, &a, &DiffOptions::default()).unwrap().differences.is_empty());
    }

    #[test]
    fn tolerances_and_paths() {
        let a = json!({"report": "x", "v": {"w": [1.0, 2.0]}, "s": "p"});
        let b = json!({"report": "x", "v": {"w": [1.0, 2.5]}, "s": "q"});
        let d = report_diff(&a, &b, &DiffOptions::default()).unwrap();
        let paths: Vec<&str> = d.differences.iter().map(|e| e.path.as_str()).collect();
        assert_eq!(paths, ["v.w[1]", "s"]);
        let loose = DiffOptions { rel_tol: 0.5, ..DiffOptions::default() };
        assert_eq!(report_diff(&a, &b, &loose).unwrap().differences.len(), 1);
        let only = DiffOptions { only: vec!["v".into()], ..DiffOptions::default() };
        assert_eq!(report_diff(&a, &b, &only).unwrap().differences.len(), 1);
        let ignore = DiffOptions { ignore: vec!["v".into(), "s".into()], ..DiffOptions::default() };
        assert!(report_diff(&a, &b, &ignore).unwrap().differences.is_empty());
    }

    #[test]
    fn structural_changes_are_schema_errors() {
        let a = json!({"report": "x", "v": 1.0});
        assert!(report_diff(&a, &json!({"report": "x", "w": 1.0}), &DiffOptions::default()).is_err());
        assert!(report_diff(&a, &json!({"report": "x", "v": "1"}), &DiffOptions::default()).is_err());
        assert!(report_diff(&a, &json!({"report": "y", "v": 1.0}), &DiffOptions::default()).is_err());
        assert!(report_diff(&a, &json!({"v": 1.0}), &DiffOptions::default()).is_err());
    }

    #[test]
    fn prefix_matching_respects_field_boundaries() {
        assert!(under("gap", "gap"));
        assert!(under("gap.x", "gap"));
        assert!(under("rows[2]", "rows"));
        assert!(!under("gap_error", "gap"));
        assert!(under("terminal[3].mean", "terminal[*].mean"));
        assert!(!under("terminal[3].se", "terminal[*].mean"));
        assert!(above("terminal[3]", "terminal[*].mean"));
        assert!(above("terminal", "terminal[*].mean"));
        assert!(!above("alpha", "terminal[*].mean"));
    }
}
