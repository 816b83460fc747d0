use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{BaseError, DiophantineTag, Frac128};

/// Built-in quadratic irrationals, computed to the full 128 bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedAlpha {
    /// `(√5 - 1)/2`
    #[serde(rename = "golden")]
    Golden,
    /// `√2 - 1`
    #[serde(rename = "sqrt2m1")]
    Sqrt2Minus1,
    /// `√3 - 1`
    #[serde(rename = "sqrt3m1")]
    Sqrt3Minus1,
}

impl NamedAlpha {
    pub const ALL: [NamedAlpha; 3] = [NamedAlpha::Golden, NamedAlpha::Sqrt2Minus1, NamedAlpha::Sqrt3Minus1];

    pub fn name(self) -> &'static str {
        match self {
            NamedAlpha::Golden => "golden",
            NamedAlpha::Sqrt2Minus1 => "sqrt2m1",
            NamedAlpha::Sqrt3Minus1 => "sqrt3m1",
        }
    }

    /// Floor of the value times `2^128`.
    pub fn value(self) -> Frac128 {
        let one = BigUint::from(1u8) << 128u32;
        let sqrt_scaled = |k: u32| (BigUint::from(k) << 256u32).sqrt();
        let v = match self {
            NamedAlpha::Golden => (sqrt_scaled(5) - &one) >> 1u32,
            NamedAlpha::Sqrt2Minus1 => sqrt_scaled(2) - &one,
            NamedAlpha::Sqrt3Minus1 => sqrt_scaled(3) - &one,
        };
        Frac128(low_u128(&v))
    }

    pub fn tag(self) -> DiophantineTag {
        match self {
            NamedAlpha::Golden => DiophantineTag::Golden,
            _ => DiophantineTag::Quadratic,
        }
    }
}

fn low_u128(v: &BigUint) -> u128 {
    let digits = v.to_u64_digits();
    let lo = digits.first().copied().unwrap_or(0) as u128;
    let hi = digits.get(1).copied().unwrap_or(0) as u128;
    lo | (hi << 64)
}

/// A rotation number as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphaSpec {
    Named(NamedAlpha),
    /// Decimal expansion such as `"0.7548776662466927"`, rounded to the
    /// nearest 128-bit fraction.
    Decimal(String),
    /// Exactly 32 hex digits after `0x`, the numerator over `2^128`.
    Hex(String),
}

impl AlphaSpec {
    pub fn resolve(&self) -> Result<(Frac128, DiophantineTag), BaseError> {
        match self {
            AlphaSpec::Named(n) => Ok((n.value(), n.tag())),
            AlphaSpec::Decimal(s) => Ok((parse_decimal(s)?, DiophantineTag::Custom)),
            AlphaSpec::Hex(s) => {
                let digits = &s[2..];
                if digits.len() != 32 {
                    return Err(BaseError::BadAlpha(s.clone()));
                }
                let v = u128::from_str_radix(digits, 16).map_err(|_| BaseError::BadAlpha(s.clone()))?;
                Ok((Frac128(v), DiophantineTag::Custom))
            }
        }
    }
}

fn parse_decimal(s: &str) -> Result<Frac128, BaseError> {
    let bad = || BaseError::BadAlpha(s.to_string());
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let numer = if frac_part.is_empty() {
        BigUint::from(0u8)
    } else {
        BigUint::from_str(frac_part).map_err(|_| bad())?
    };
    let denom = BigUint::from(10u8).pow(frac_part.len() as u32);
    // round(numer * 2^128 / denom); the integer part vanishes mod 1
    let scaled = (numer << 129u32) / &denom;
    let rounded: BigUint = (scaled + 1u8) >> 1u32;
    let v = low_u128(&rounded);
    Ok(Frac128(if neg { v.wrapping_neg() } else { v }))
}

/// Reads a rotation number: a built-in name, `0x` followed by 32 hex
/// digits, or a decimal string.
pub fn parse_alpha(s: &str) -> Result<AlphaSpec, BaseError> {
    let t = s.trim();
    if let Some(n) = NamedAlpha::ALL.iter().find(|n| n.name() == t) {
        return Ok(AlphaSpec::Named(*n));
    }
    let spec = if t.starts_with("0x") || t.starts_with("0X") {
        AlphaSpec::Hex(t.to_string())
    } else {
        AlphaSpec::Decimal(t.to_string())
    };
    spec.resolve()?;
    Ok(spec)
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Named(n) => f.write_str(n.name()),
            AlphaSpec::Decimal(s) | AlphaSpec::Hex(s) => f.write_str(s),
        }
    }
}

impl Serialize for AlphaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AlphaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_alpha(&s).map_err(serde::de::Error::custom)
    }
}
