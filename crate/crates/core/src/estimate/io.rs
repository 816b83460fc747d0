//! CSV points plus a JSON sidecar with the parameters.
//!
//! The CSV has a header `c0,c1,...,provenance,resolution,window` and one
//! row per point. Numbers use Rust's shortest round-trip formatting, so the
//! files are byte-stable for identical inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::group::{GroupElement, GroupInstance};

use super::{EmptyFlag, EstimateError, EstimateKind, Provenance, SetEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSidecar {
    pub group: GroupInstance,
    pub kind: EstimateKind,
    pub count: usize,
    pub resolution: f64,
    pub window: f64,
    pub flag: Option<EmptyFlag>,
    pub provenance: Provenance,
}

pub(crate) fn to_csv(est: &SetEstimate) -> String {
    let mut s = String::new();
    for i in 0..est.group.dim() {
        let _ = write!(s, "c{i},");
    }
    s.push_str("provenance,resolution,window\n");
    for p in &est.points {
        for c in p.to_f64_vec() {
            let _ = write!(s, "{c},");
        }
        let _ = writeln!(s, "{},{},{}", est.kind.name(), est.resolution, est.window);
    }
    s
}

/// Writes `estimate_<name>.csv` and `estimate_<name>.json` into `dir` and
/// returns the CSV path.
pub fn write_estimate(est: &SetEstimate, dir: &Path, name: &str) -> std::io::Result<PathBuf> {
    let csv = dir.join(format!("estimate_{name}.csv"));
    fs::write(&csv, to_csv(est))?;
    let side = EstimateSidecar {
        group: est.group.clone(),
        kind: est.kind,
        count: est.points.len(),
        resolution: est.resolution,
        window: est.window,
        flag: est.flag,
        provenance: est.provenance.clone(),
    };
    let mut json = serde_json::to_string_pretty(&side).expect("sidecar serializes");
    json.push('\n');
    fs::write(csv.with_extension("json"), json)?;
    Ok(csv)
}

/// Reads an estimate written by [`write_estimate`] from its CSV path.
pub fn read_estimate(csv: &Path) -> Result<SetEstimate, EstimateError> {
    let fmt = |m: String| EstimateError::Format(format!("{}: {m}", csv.display()));
    let side_text = fs::read_to_string(csv.with_extension("json")).map_err(|e| fmt(e.to_string()))?;
    let side: EstimateSidecar = serde_json::from_str(&side_text).map_err(|e| fmt(e.to_string()))?;
    let text = fs::read_to_string(csv).map_err(|e| fmt(e.to_string()))?;
    let dim = side.group.dim();
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| fmt("missing header".into()))?;
    if header.split(',').count() != dim + 3 {
        return Err(fmt(format!("header {header:?} does not match group {}", side.group)));
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let coords = line
            .split(',')
            .take(dim)
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| fmt(format!("row {}: {e}", i + 1)))?;
        if coords.len() != dim {
            return Err(fmt(format!("row {} has {} coordinates", i + 1, coords.len())));
        }
        points.push(GroupElement::from_f64(&coords));
    }
    if points.len() != side.count {
        return Err(fmt(format!("{} rows but the sidecar says {}", points.len(), side.count)));
    }
    Ok(SetEstimate {
        group: side.group,
        points,
        resolution: side.resolution,
        window: side.window,
        kind: side.kind,
        provenance: side.provenance,
        flag: side.flag,
    })
}
