//! Orbit-closure sampling in `X × G` and diagnostics for the structure of
//! orbit closures and essential ranges.
//!
//! None of the diagnostics decides a property: each one returns a number
//! that the caller compares against a tolerance, and [`DiagnosticsReport`]
//! keeps the number, the tolerance and the outcome together.

mod sample;
mod structure;

pub use sample::{
    compactness_profile, compactness_verdict, right_translate, sample_hausdorff, sample_hausdorff_capped, sample_orbit_closure,
    stabilizer_candidates, surjectivity_defect, vertical_section, CompactnessVerdict, OrbitClosureSample,
    StridePlan, STABILIZER_SAMPLE,
};
pub use structure::{
    connected_components, consistent_selection_defect, gamma_modulus, inclusion_chain, modulus_envelope,
    section_anchor, section_coset_defect, section_quotients, selection_containment_defect, Components,
    InclusionChain, Selection,
};

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::base::BaseError;
use crate::budget::Exhausted;
use crate::cocycle::CocycleError;
use crate::estimate::EstimateError;
use crate::group::GroupError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Base(#[from] BaseError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Budget(Exhausted),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid analysis parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Within tolerance, or the expected verdict was observed.
    Pass,
    /// Out of tolerance.
    Fail,
    /// Reported without a tolerance.
    Info,
    /// The hypothesis of the check was not met, so no comparison was made.
    NotApplicable,
    /// The budget ran out before the input was complete.
    Truncated,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "FAIL",
            Outcome::Info => "info",
            Outcome::NotApplicable => "n/a",
            Outcome::Truncated => "truncated",
        }
    }
}

/// Serializes non-finite values as the strings `"inf"`, `"-inf"`, `"nan"`.
pub fn serialize_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn serialize_opt_real<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => serialize_real(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: String,
    #[serde(serialize_with = "serialize_real")]
    pub value: f64,
    /// Pass when `value <= tolerance`.
    #[serde(serialize_with = "serialize_opt_real")]
    pub tolerance: Option<f64>,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DiagnosticsReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl DiagnosticsReport {
    /// Records `value` compared against `tolerance`.
    pub fn check(&mut self, name: impl Into<String>, value: f64, tolerance: f64) -> Outcome {
        let outcome = if value <= tolerance { Outcome::Pass } else { Outcome::Fail };
        self.diagnostics.push(Diagnostic {
            name: name.into(),
            value,
            tolerance: Some(tolerance),
            outcome,
            note: None,
        });
        outcome
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64) {
        self.push(name, value, None, Outcome::Info, None);
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        value: f64,
        tolerance: Option<f64>,
        outcome: Outcome,
        note: Option<String>,
    ) {
        self.diagnostics.push(Diagnostic {
            name: name.into(),
            value,
            tolerance,
            outcome,
            note,
        });
    }

    /// Attaches a note to the most recent entry.
    pub fn note(&mut self, note: impl Into<String>) {
        if let Some(d) = self.diagnostics.last_mut() {
            d.note = Some(note.into());
        }
    }

    pub fn get(&self, name: &str) -> Option<&Diagnostic> {
        self.diagnostics.iter().find(|d| d.name == name)
    }

    pub fn any(&self, outcome: Outcome) -> bool {
        self.diagnostics.iter().any(|d| d.outcome == outcome)
    }

    /// One aligned row per diagnostic.
    pub fn to_text(&self) -> String {
        let fmt = |v: f64| format!("{v:.6e}");
        let rows: Vec<[String; 4]> = self
            .diagnostics
            .iter()
            .map(|d| {
                [
                    d.name.clone(),
                    fmt(d.value),
                    d.tolerance.map_or_else(|| "-".to_string(), fmt),
                    d.outcome.name().to_string(),
                ]
            })
            .collect();
        let header = ["diagnostic", "value", "tolerance", "outcome"].map(String::from);
        let mut widths = header.clone().map(|h| h.len());
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        for (r, note) in std::iter::once((&header, None)).chain(rows.iter().zip(self.diagnostics.iter().map(|d| d.note.as_ref()))) {
            let _ = write!(
                out,
                "{:<w0$}  {:>w1$}  {:>w2$}  {:<w3$}",
                r[0],
                r[1],
                r[2],
                r[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            );
            if let Some(n) = note {
                let _ = write!(out, "  {n}");
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        out
    }
}
