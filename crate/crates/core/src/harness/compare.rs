use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::estimate::{hausdorff_distance, read_estimate};

use super::HarnessError;

/// One compared quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub name: String,
    pub left: Option<f64>,
    pub right: Option<f64>,
    /// Absolute difference, or the Hausdorff distance for estimates.
    pub difference: f64,
    pub tolerance: f64,
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.flagged() == 0 {
            0
        } else {
            2
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
            let _ = write!(
                s,
                "{:<32} {:>14} {:>14} {:>12.4e} {:>10.3e} {}",
                r.name,
                show(r.left),
                show(r.right),
                r.difference,
                r.tolerance,
                if r.flagged { "DIFF" } else { "ok" }
            );
            if let Some(n) = &r.note {
                let _ = write!(s, "  {n}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{} of {} rows differ", self.flagged(), self.rows.len());
        s
    }
}

fn load(dir: &Path) -> Result<Value, HarnessError> {
    let path = dir.join("report.json");
    let text = fs::read_to_string(&path)?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Report {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn real(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan())
}

/// Compares the diagnostics and written estimates of two run directories.
///
/// A scalar is flagged when its values differ by more than its tolerance
/// (or exactly, for untoleranced values) or its outcome changed. An
/// estimate is flagged when it is missing on one side or the Hausdorff
/// distance between the two exceeds twice the coarser resolution.
pub fn compare_runs(a: &Path, b: &Path) -> Result<Comparison, HarnessError> {
    let (ra, rb) = (load(a)?, load(b)?);
    if ra["schema_version"] != rb["schema_version"] {
        return Err(HarnessError::Report {
            path: b.display().to_string(),
            msg: format!(
                "schema version {} does not match {}",
                rb["schema_version"], ra["schema_version"]
            ),
        });
    }
    let diags = |r: &Value| -> Vec<Value> { r["diagnostics"]["diagnostics"].as_array().cloned().unwrap_or_default() };
    let (da, db) = (diags(&ra), diags(&rb));
    let find = |ds: &[Value], name: &str| ds.iter().find(|d| d["name"] == name).cloned();
    let mut names: Vec<String> = Vec::new();
    for d in da.iter().chain(&db) {
        let n = d["name"].as_str().unwrap_or_default().to_string();
        if !names.contains(&n) {
            names.push(n);
        }
    }
    let mut rows = Vec::new();
    for name in names {
        let (x, y) = (find(&da, &name), find(&db, &name));
        let left = x.as_ref().and_then(|d| real(&d["value"]));
        let right = y.as_ref().and_then(|d| real(&d["value"]));
        let tolerance = x
            .as_ref()
            .or(y.as_ref())
            .and_then(|d| real(&d["tolerance"]))
            .unwrap_or(0.0);
        let (outcome_a, outcome_b) = (
            x.as_ref().map(|d| d["outcome"].clone()),
            y.as_ref().map(|d| d["outcome"].clone()),
        );
        let (difference, mut flagged) = match (left, right) {
            (Some(l), Some(r)) if same(l, r) => (0.0, false),
            (Some(l), Some(r)) => {
                let d = (l - r).abs();
                (d, !(d <= tolerance))
            }
            _ => (f64::INFINITY, true),
        };
        let mut note = None;
        if outcome_a != outcome_b {
            flagged = true;
            note = Some(format!(
                "outcome {} vs {}",
                outcome_a.unwrap_or(Value::Null),
                outcome_b.unwrap_or(Value::Null)
            ));
        }
        rows.push(ComparisonRow {
            name,
            left,
            right,
            difference,
            tolerance,
            flagged,
            note,
        });
    }

    let estimates = |dir: &Path| -> Result<BTreeSet<String>, HarnessError> {
        let mut out = BTreeSet::new();
        for entry in fs::read_dir(dir)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if name.starts_with("estimate_") && name.ends_with(".csv") {
                out.insert(name);
            }
        }
        Ok(out)
    };
    let (fa, fb) = (estimates(a)?, estimates(b)?);
    for file in fa.union(&fb) {
        let row_name = file.trim_end_matches(".csv").to_string();
        if !(fa.contains(file) && fb.contains(file)) {
            rows.push(ComparisonRow {
                name: row_name,
                left: None,
                right: None,
                difference: f64::INFINITY,
                tolerance: 0.0,
                flagged: true,
                note: Some("present in one run only".into()),
            });
            continue;
        }
        let ea = read_estimate(&a.join(file))?;
        let eb = read_estimate(&b.join(file))?;
        let tolerance = 2.0 * ea.resolution.max(eb.resolution);
        let (left, right) = (Some(ea.len() as f64), Some(eb.len() as f64));
        let row = match hausdorff_distance(&ea, &eb) {
            Ok(d) => ComparisonRow {
                name: row_name,
                left,
                right,
                difference: d,
                tolerance,
                flagged: !(d <= tolerance) && !(ea.is_empty() && eb.is_empty()),
                note: None,
            },
            Err(e) => ComparisonRow {
                name: row_name,
                left,
                right,
                difference: f64::INFINITY,
                tolerance,
                flagged: true,
                note: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    Ok(Comparison { rows })
}
