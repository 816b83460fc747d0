//! Named cocycle families as written in scenario files.
//!
//! A cocycle is either a bare tag (`"anzai"`) or an object with a `tag`
//! field and family parameters:
//!
//! | tag               | parameters                                   | default            |
//! |-------------------|----------------------------------------------|--------------------|
//! | `constant`        | `value`: coordinates                         | all ones           |
//! | `trig`            | `coords`: one trig sum per target coordinate | `cos` each         |
//! | `coboundary`      | `b`: transfer function, per coordinate       | `cos` each         |
//! | `anzai`           | none                                         |                    |
//! | `heisenberg-lift` | `a`, `b`: trig sums                          | `cos`, `sin`       |
//! | `product`         | `factors`: list of cocycles                  | required           |

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::base::RotationSystem;
use crate::group::{GroupElement, GroupInstance};

use super::{Cocycle, CocycleError, Generator, TrigSum};

pub const COCYCLE_TAGS: [&str; 6] = ["constant", "trig", "coboundary", "anzai", "heisenberg-lift", "product"];

/// A registry tag with its (unvalidated against a target) parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub struct CocycleSpec {
    pub tag: String,
    pub params: Map<String, Value>,
}

impl CocycleSpec {
    pub fn new(tag: &str) -> CocycleSpec {
        CocycleSpec {
            tag: tag.to_string(),
            params: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: Value) -> CocycleSpec {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn build(&self, system: &RotationSystem, target: &GroupInstance) -> Result<Cocycle, CocycleError> {
        make_named_cocycle(&self.tag, &Value::Object(self.params.clone()), system, target)
    }
}

fn unknown(tag: &str) -> CocycleError {
    CocycleError::UnknownTag {
        tag: tag.to_string(),
        valid: COCYCLE_TAGS.join(", "),
    }
}

impl TryFrom<Value> for CocycleSpec {
    type Error = String;

    fn try_from(v: Value) -> Result<CocycleSpec, String> {
        let (tag, params) = match v {
            Value::String(s) => (s, Map::new()),
            Value::Object(mut m) => match m.remove("tag") {
                Some(Value::String(s)) => (s, m),
                _ => return Err("cocycle object needs a string field \"tag\"".into()),
            },
            _ => return Err("cocycle must be a tag string or an object with a \"tag\" field".into()),
        };
        if !COCYCLE_TAGS.contains(&tag.as_str()) {
            return Err(unknown(&tag).to_string());
        }
        if tag == "product" {
            let factors = params.get("factors").ok_or("product cocycle needs \"factors\"")?;
            let list: Vec<CocycleSpec> = serde_json::from_value(factors.clone()).map_err(|e| format!("factors: {e}"))?;
            if list.len() < 2 {
                return Err("product cocycle needs at least two factors".into());
            }
        }
        Ok(CocycleSpec { tag, params })
    }
}

impl From<CocycleSpec> for Value {
    fn from(s: CocycleSpec) -> Value {
        if s.params.is_empty() {
            return Value::String(s.tag);
        }
        let mut m = Map::new();
        m.insert("tag".into(), Value::String(s.tag));
        m.extend(s.params);
        Value::Object(m)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(TrigSum),
    Many(Vec<TrigSum>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    value: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrigParams {
    coords: Option<OneOrMany>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoboundaryParams {
    b: Option<OneOrMany>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LiftParams {
    a: Option<TrigSum>,
    b: Option<TrigSum>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductParams {
    factors: Vec<CocycleSpec>,
}

fn params<T: for<'de> Deserialize<'de>>(tag: &str, v: &Value) -> Result<T, CocycleError> {
    let v = if v.is_null() { Value::Object(Map::new()) } else { v.clone() };
    serde_path_to_error::deserialize(v).map_err(|e| CocycleError::Params {
        tag: tag.to_string(),
        msg: if e.path().to_string() == "." {
            e.inner().to_string()
        } else {
            format!("{}: {}", e.path(), e.inner())
        },
    })
}

fn sums_or_default(v: Option<OneOrMany>, dim: usize) -> Vec<TrigSum> {
    match v {
        Some(OneOrMany::One(s)) => vec![s],
        Some(OneOrMany::Many(v)) => v,
        None => vec![TrigSum::cos(); dim],
    }
}

/// Builds a cocycle from a registry tag and its parameters.
pub fn make_named_cocycle(
    tag: &str,
    p: &Value,
    system: &RotationSystem,
    target: &GroupInstance,
) -> Result<Cocycle, CocycleError> {
    let generator = generator(tag, p, system, target)?;
    Cocycle::new(system.clone(), target.clone(), generator)
}

fn generator(tag: &str, p: &Value, system: &RotationSystem, target: &GroupInstance) -> Result<Generator, CocycleError> {
    Ok(match tag {
        "constant" => {
            let c: ConstantParams = params(tag, p)?;
            let value = c.value.unwrap_or_else(|| vec![1.0; target.dim()]);
            let g = target.normalize(&GroupElement::from_f64(&value))?;
            Generator::Constant(g)
        }
        "trig" => {
            let t: TrigParams = params(tag, p)?;
            Generator::TrigSum(sums_or_default(t.coords, target.dim()))
        }
        "coboundary" => {
            let t: CoboundaryParams = params(tag, p)?;
            Generator::Coboundary(sums_or_default(t.b, target.dim()))
        }
        "anzai" => {
            let _: NoParams = params(tag, p)?;
            Generator::AnzaiIdentity
        }
        "heisenberg-lift" => {
            let t: LiftParams = params(tag, p)?;
            Generator::HeisenbergLift {
                a: t.a.unwrap_or_else(TrigSum::cos),
                b: t.b.unwrap_or_else(TrigSum::sin),
            }
        }
        "product" => {
            let t: ProductParams = params(tag, p)?;
            let GroupInstance::DirectProduct(factors) = target else {
                return Err(CocycleError::Invalid(format!("product cocycle needs a product target, got {target}")));
            };
            if factors.len() != t.factors.len() {
                return Err(CocycleError::Invalid(format!(
                    "{} factor cocycles for {} factor groups",
                    t.factors.len(),
                    factors.len()
                )));
            }
            let gens = t
                .factors
                .iter()
                .zip(factors)
                .map(|(s, f)| generator(&s.tag, &Value::Object(s.params.clone()), system, f))
                .collect::<Result<Vec<_>, _>>()?;
            Generator::Product(gens)
        }
        other => return Err(unknown(other)),
    })
}
