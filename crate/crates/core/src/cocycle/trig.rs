use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::base::{Frac128, TorusPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigFn {
    Cos,
    Sin,
}

/// `amp · fn(2π⟨k, x⟩ + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    #[serde(default = "default_k")]
    pub k: Vec<i64>,
    #[serde(default = "one")]
    pub amp: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(rename = "fn", default = "default_fn")]
    pub func: TrigFn,
}

fn default_k() -> Vec<i64> {
    vec![1]
}

fn one() -> f64 {
    1.0
}

fn default_fn() -> TrigFn {
    TrigFn::Cos
}

/// A real trigonometric polynomial on `T^d`: a constant plus finitely many
/// [`TrigTerm`]s.
///
/// In scenario files it is written as an object
/// `{"constant": c, "terms": [...]}`, a bare list of terms, or a shorthand
/// string `"[amp*]cos|sin[:k1,k2,...]"` such as `"0.5*sin:2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrigSumRepr")]
pub struct TrigSum {
    #[serde(default)]
    pub constant: f64,
    pub terms: Vec<TrigTerm>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TrigSumRepr {
    Short(String),
    Terms(Vec<TrigTerm>),
    Full {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        terms: Vec<TrigTerm>,
    },
}

impl TryFrom<TrigSumRepr> for TrigSum {
    type Error = String;

    fn try_from(r: TrigSumRepr) -> Result<TrigSum, String> {
        let s = match r {
            TrigSumRepr::Short(s) => s.parse()?,
            TrigSumRepr::Terms(terms) => TrigSum { constant: 0.0, terms },
            TrigSumRepr::Full { constant, terms } => TrigSum { constant, terms },
        };
        s.validate()?;
        Ok(s)
    }
}

impl TrigSum {
    pub fn cos() -> TrigSum {
        TrigSum::single(TrigFn::Cos, vec![1], 1.0)
    }

    pub fn sin() -> TrigSum {
        TrigSum::single(TrigFn::Sin, vec![1], 1.0)
    }

    pub fn single(func: TrigFn, k: Vec<i64>, amp: f64) -> TrigSum {
        TrigSum {
            constant: 0.0,
            terms: vec![TrigTerm { k, amp, phase: 0.0, func }],
        }
    }

    pub fn constant(c: f64) -> TrigSum {
        TrigSum {
            constant: c,
            terms: Vec::new(),
        }
    }

    fn validate(&self) -> Result<(), String> {
        if !self.constant.is_finite() {
            return Err("non-finite constant".into());
        }
        for t in &self.terms {
            if t.k.is_empty() {
                return Err("empty frequency vector".into());
            }
            if !(t.amp.is_finite() && t.phase.is_finite()) {
                return Err("non-finite amplitude or phase".into());
            }
        }
        Ok(())
    }

    /// Every term's frequency vector has length `d`.
    pub(crate) fn check_dim(&self, d: usize) -> Result<(), String> {
        self.validate()?;
        match self.terms.iter().find(|t| t.k.len() != d) {
            Some(t) => Err(format!("frequency {:?} does not match base dimension {d}", t.k)),
            None => Ok(()),
        }
    }

    /// Upper bound on `|value|`.
    pub fn sup_norm(&self) -> f64 {
        self.constant.abs() + self.terms.iter().map(|t| t.amp.abs()).sum::<f64>()
    }

    /// Value at `x`. The phase `⟨k, x⟩ mod 1` is formed exactly before the
    /// conversion to floating point.
    #[inline]
    pub fn eval(&self, x: &TorusPoint) -> f64 {
        let mut v = self.constant;
        for t in &self.terms {
            let theta = t
                .k
                .iter()
                .zip(x.coords())
                .fold(Frac128::ZERO, |acc, (k, c)| acc.wrapping_add(c.wrapping_mul_int(*k as i128)));
            let angle = TAU * theta.to_f64() + t.phase;
            v += t.amp
                * match t.func {
                    TrigFn::Cos => angle.cos(),
                    TrigFn::Sin => angle.sin(),
                };
        }
        v
    }
}

impl std::str::FromStr for TrigSum {
    type Err = String;

    fn from_str(s: &str) -> Result<TrigSum, String> {
        let bad = || format!("cannot read trigonometric term {s:?}; expected e.g. \"cos\", \"sin:2\" or \"0.5*cos:1,1\"");
        let s = s.trim();
        let (amp, rest) = match s.split_once('*') {
            Some((a, r)) => (a.trim().parse::<f64>().map_err(|_| bad())?, r.trim()),
            None => (1.0, s),
        };
        let (name, k) = match rest.split_once(':') {
            Some((n, ks)) => {
                let k = ks
                    .split(',')
                    .map(|v| v.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad())?;
                (n.trim(), k)
            }
            None => (rest, vec![1]),
        };
        let func = match name {
            "cos" => TrigFn::Cos,
            "sin" => TrigFn::Sin,
            _ => return Err(bad()),
        };
        let t = TrigSum::single(func, k, amp);
        t.validate()?;
        Ok(t)
    }
}

impl fmt::Display for TrigSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.constant != 0.0 || self.terms.is_empty() {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for t in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let name = match t.func {
                TrigFn::Cos => "cos",
                TrigFn::Sin => "sin",
            };
            write!(f, "{}*{}(2pi{:?}.x + {})", t.amp, name, t.k, t.phase)?;
        }
        Ok(())
    }
}
