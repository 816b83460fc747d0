//! Scenario files.
//!
//! A scenario is a JSON object. Only `name`, `group`, `cocycle` and `N`
//! (or `budgets.N`) are required:
//!
//! ```json
//! { "name": "anzai", "base": "golden", "group": "torus:1", "cocycle": "anzai", "N": 1000000 }
//! ```
//!
//! Everything else falls back to the defaults in [`Tolerances`] and
//! [`ScenarioConfig`]; the resolved form is echoed into every report.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::analysis::{CompactnessVerdict, Selection};
use crate::base::{AlphaSpec, NamedAlpha, RotationSystem, TorusPoint};
use crate::cocycle::{Cocycle, CocycleSpec};
use crate::group::{GroupElement, GroupInstance, SubgroupSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed JSON or a schema violation, with the offending key path.
    Parse { path: String, msg: String },
    /// Well-formed but inconsistent values.
    Invalid { path: String, msg: String },
    Io(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { path, msg } => write!(f, "config error at {path}: {msg}"),
            ConfigError::Invalid { path, msg } => write!(f, "invalid config value at {path}: {msg}"),
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(path: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        msg: msg.into(),
    }
}

/// The base rotation: a named alpha, or a list of alpha specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    pub alpha: Vec<AlphaSpec>,
}

impl Default for BaseConfig {
    fn default() -> BaseConfig {
        BaseConfig {
            alpha: vec![AlphaSpec::Named(NamedAlpha::Golden)],
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawBase {
    One(AlphaSpec),
    Many(Vec<AlphaSpec>),
    Full {
        alpha: RawAlphas,
        #[serde(default)]
        dimension: Option<usize>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAlphas {
    One(AlphaSpec),
    Many(Vec<AlphaSpec>),
}

/// Subgroups written as `"trivial"`, `"full"`, `"center"`, `"lattice:d"`,
/// or the structured form.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawSubgroup {
    Tag(String),
    Spec(SubgroupSpec),
}

fn parse_subgroup(raw: RawSubgroup) -> Result<SubgroupSpec, String> {
    match raw {
        RawSubgroup::Spec(s) => Ok(s),
        RawSubgroup::Tag(t) => match t.as_str() {
            "trivial" => Ok(SubgroupSpec::trivial()),
            "full" => Ok(SubgroupSpec::full()),
            "center" => Ok(SubgroupSpec::center()),
            other => match other.strip_prefix("lattice:").and_then(|d| d.parse().ok()) {
                Some(d) => Ok(SubgroupSpec::lattice(d)),
                None => Err(format!(
                    "unknown subgroup tag {other:?}; valid tags: trivial, full, center, lattice:<d>"
                )),
            },
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Start {
    /// Base point; defaults to the origin.
    #[serde(default)]
    pub x: Vec<f64>,
    /// Group component; defaults to the identity.
    #[serde(default)]
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(rename = "N")]
    pub n: u64,
    /// Wall-clock limit for the whole run. Not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_seconds: Option<f64>,
    /// Orbit-sample stride; defaults to `max(1, N / 100000)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Return-time radii for the P-estimate, strictly decreasing. The
    /// finest level is also the E-estimate radius.
    pub eps: Vec<f64>,
    /// Radius of the ball of E-estimate sample points.
    pub eta: f64,
    /// Resolution of every set estimate.
    pub r: f64,
    /// Window radius `W`.
    #[serde(rename = "W")]
    pub w: f64,
    /// Grid of the surjectivity check.
    pub grid: f64,
    /// Linkage scale for components; defaults to `3r`.
    pub scale: Option<f64>,
    /// Radius of vertical sections; defaults to `grid`.
    pub section_eta: Option<f64>,
    /// Number of E-estimate sample points.
    pub m: usize,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            eps: vec![0.01, 0.001],
            eta: 0.01,
            r: 0.05,
            w: 5.0,
            grid: 0.01,
            scale: None,
            section_eta: None,
            m: 16,
        }
    }
}

impl Tolerances {
    pub fn eps_fine(&self) -> f64 {
        *self.eps.last().expect("validated")
    }

    pub fn scale(&self) -> f64 {
        self.scale.unwrap_or(3.0 * self.r)
    }

    pub fn section_eta(&self) -> f64 {
        self.section_eta.unwrap_or(self.grid)
    }
}

/// The diagnostics a run can perform, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticName {
    PEstimate,
    EEstimate,
    Surjectivity,
    Compactness,
    Section,
    Gamma,
    Stabilizer,
    Components,
    Conjugation,
    Constancy,
    Selection,
    Inclusion,
}

impl DiagnosticName {
    pub const ALL: [DiagnosticName; 12] = [
        DiagnosticName::PEstimate,
        DiagnosticName::EEstimate,
        DiagnosticName::Surjectivity,
        DiagnosticName::Compactness,
        DiagnosticName::Section,
        DiagnosticName::Gamma,
        DiagnosticName::Stabilizer,
        DiagnosticName::Components,
        DiagnosticName::Conjugation,
        DiagnosticName::Constancy,
        DiagnosticName::Selection,
        DiagnosticName::Inclusion,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetExpectation {
    Empty,
    Nonempty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilizerExpectation {
    /// Every probe is an approximate stabilizer.
    Full,
    /// Only probes at the identity are.
    Trivial,
}

/// Expected verdicts and extra limits on named scalar diagnostics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Expectations {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compactness: Option<CompactnessVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_estimate: Option<SetExpectation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_estimate: Option<SetExpectation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilizer: Option<StabilizerExpectation>,
    /// Upper bounds for scalar diagnostics by name, replacing the default
    /// tolerance where there is one.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub limits: BTreeMap<String, f64>,
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub base: BaseConfig,
    pub group: GroupInstance,
    pub cocycle: CocycleSpec,
    pub start: Start,
    pub budgets: Budgets,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub diagnostics: Vec<DiagnosticName>,
    pub subgroup: SubgroupSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<Selection>,
    pub expect: Expectations,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    #[serde(default)]
    base: Option<RawBase>,
    group: GroupInstance,
    cocycle: CocycleSpec,
    #[serde(default)]
    start: Option<Start>,
    #[serde(rename = "N", default)]
    n: Option<u64>,
    #[serde(default)]
    budgets: Option<Budgets>,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    diagnostics: Option<Vec<DiagnosticName>>,
    #[serde(default)]
    subgroup: Option<RawSubgroup>,
    #[serde(default)]
    selection: Option<Selection>,
    #[serde(default)]
    expect: Expectations,
}

/// Parses and validates a scenario from JSON text.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse {
            path,
            msg: if inner.line() > 0 {
                format!("{inner}")
            } else {
                inner.to_string()
            },
        }
    })?;
    resolve(raw)
}

/// Reads and parses a scenario file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

fn resolve(raw: RawConfig) -> Result<ScenarioConfig, ConfigError> {
    let base = match raw.base {
        None => BaseConfig::default(),
        Some(RawBase::One(a)) => BaseConfig { alpha: vec![a] },
        Some(RawBase::Many(v)) => BaseConfig { alpha: v },
        Some(RawBase::Full { alpha, dimension }) => {
            let alpha = match alpha {
                RawAlphas::One(a) => vec![a],
                RawAlphas::Many(v) => v,
            };
            if let Some(d) = dimension {
                if d != alpha.len() {
                    return Err(invalid(
                        "base.dimension",
                        format!("dimension {d} but {} alpha values", alpha.len()),
                    ));
                }
            }
            BaseConfig { alpha }
        }
    };
    let system = RotationSystem::from_specs(&base.alpha).map_err(|e| invalid("base.alpha", e.to_string()))?;
    let d = system.dim();

    let budgets = match (raw.n, raw.budgets) {
        (Some(_), Some(_)) => return Err(invalid("N", "give N either at the top level or in budgets, not both")),
        (Some(n), None) => Budgets {
            n,
            max_seconds: None,
            stride: None,
        },
        (None, Some(b)) => b,
        (None, None) => return Err(invalid("budgets.N", "missing N")),
    };
    if budgets.n < 1 {
        return Err(invalid("budgets.N", "N must be at least 1"));
    }
    if budgets.n > crate::base::MAX_RETURN_N {
        return Err(invalid("budgets.N", format!("N above {}", crate::base::MAX_RETURN_N)));
    }
    if budgets.max_seconds.is_some_and(|s| !(s > 0.0)) {
        return Err(invalid("budgets.max_seconds", "must be positive"));
    }
    if budgets.stride == Some(0) {
        return Err(invalid("budgets.stride", "must be at least 1"));
    }

    let t = &raw.tolerances;
    if t.eps.len() < 2 {
        return Err(invalid("tolerances.eps", "needs at least two levels"));
    }
    if t.eps.iter().any(|e| !(*e > 0.0 && *e <= 0.5)) {
        return Err(invalid("tolerances.eps", "every level must lie in (0, 0.5]"));
    }
    if t.eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("tolerances.eps", "must be strictly decreasing"));
    }
    for (key, v) in [
        ("tolerances.eta", t.eta),
        ("tolerances.r", t.r),
        ("tolerances.W", t.w),
        ("tolerances.grid", t.grid),
        ("tolerances.scale", t.scale.unwrap_or(1.0)),
        ("tolerances.section_eta", t.section_eta.unwrap_or(1.0)),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(key, "must be positive"));
        }
    }
    if t.grid > 0.25 {
        return Err(invalid("tolerances.grid", "must be at most 0.25"));
    }
    if t.scale() < t.r {
        return Err(invalid("tolerances.scale", "must be at least r"));
    }
    if t.m == 0 {
        return Err(invalid("tolerances.m", "must be at least 1"));
    }

    let group = raw.group.validated().map_err(|e| invalid("group", e.to_string()))?;
    let mut start = raw.start.unwrap_or(Start {
        x: Vec::new(),
        g: Vec::new(),
    });
    if start.x.is_empty() {
        start.x = vec![0.0; d];
    }
    if start.x.len() != d {
        return Err(invalid("start.x", format!("{} coordinates for a {d}-dimensional base", start.x.len())));
    }
    if start.g.is_empty() {
        start.g = group.identity().to_f64_vec();
    }
    group
        .check(&GroupElement::from_f64(&start.g))
        .map_err(|e| invalid("start.g", e.to_string()))?;
    raw.cocycle
        .build(&system, &group)
        .map_err(|e| invalid("cocycle", e.to_string()))?;

    let subgroup = match raw.subgroup {
        None => SubgroupSpec::trivial(),
        Some(s) => parse_subgroup(s).map_err(|m| ConfigError::Parse {
            path: "subgroup".into(),
            msg: m,
        })?,
    };
    subgroup.check(&group).map_err(|e| invalid("subgroup", e.to_string()))?;
    if let Some(sel) = &raw.selection {
        sel.subgroup(&group).map_err(|e| invalid("selection", e.to_string()))?;
    }
    let mut diagnostics = raw.diagnostics.unwrap_or_else(|| DiagnosticName::ALL.to_vec());
    diagnostics.sort();
    diagnostics.dedup();
    for (k, v) in &raw.expect.limits {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(invalid(&format!("expect.limits.{k}"), "must be a finite non-negative number"));
        }
    }
    Ok(ScenarioConfig {
        name: raw.name,
        base,
        group,
        cocycle: raw.cocycle,
        start,
        budgets,
        tolerances: raw.tolerances,
        seed: raw.seed,
        diagnostics,
        subgroup,
        selection: raw.selection,
        expect: raw.expect,
    })
}

impl ScenarioConfig {
    pub fn system(&self) -> RotationSystem {
        RotationSystem::from_specs(&self.base.alpha).expect("validated")
    }

    pub fn cocycle(&self) -> Cocycle {
        self.cocycle.build(&self.system(), &self.group).expect("validated")
    }

    pub fn start_point(&self) -> TorusPoint {
        TorusPoint::from_f64(&self.start.x)
    }

    pub fn start_value(&self) -> GroupElement {
        GroupElement::from_f64(&self.start.g)
    }

    pub fn stride(&self) -> u64 {
        self.budgets.stride.unwrap_or((self.budgets.n / 100_000).max(1))
    }

    pub fn runs(&self, d: DiagnosticName) -> bool {
        self.diagnostics.contains(&d)
    }

    /// The resolved config as JSON, with the keys that do not affect
    /// results (the wall-clock limit) removed.
    pub fn semantic_value(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(b) = v.get_mut("budgets").and_then(Value::as_object_mut) {
            b.remove("max_seconds");
        }
        v
    }

    /// First 16 hex digits of the SHA-256 of the canonical semantic JSON.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.semantic_value()).expect("serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// `<name>-<hash>`.
    pub fn dir_name(&self) -> String {
        format!("{}-{}", self.name, self.hash())
    }
}
