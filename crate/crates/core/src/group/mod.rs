//! Value groups: real vector spaces, integer lattices, tori, the real and
//! discrete Heisenberg groups, and finite direct products of these.
//!
//! Every instance is nilpotent (abelian or two-step), which is the setting in
//! which the orbit-closure structure results hold. Elements are flat
//! coordinate vectors whose layout is fixed by the instance; a direct product
//! concatenates the layouts of its factors.
//!
//! Heisenberg coordinates `(a, b, c)` stand for the unitriangular matrix
//! `[[1, a, c], [0, 1, b], [0, 0, 1]]`, so the law is
//! `(a, b, c)·(a', b', c') = (a + a', b + b', c + c' + a b')`.

mod search;
mod subgroup;

pub use search::{conjugacy_class_infimum, double_coset_infimum, SearchGrid};
pub use subgroup::{
    quotient_distance, quotient_norm, quotient_project, subgroup_elements, SubgroupKind,
    SubgroupSpec, TorusGenerator,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::dd::Dd;

/// Maximum nesting depth of direct products.
pub const MAX_PRODUCT_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("element not in {group}: {reason}")]
    NotInGroup { group: String, reason: String },
    #[error("invalid group instance: {0}")]
    InvalidInstance(String),
    #[error("unsupported quotient of {group} by {subgroup}")]
    UnsupportedQuotient { group: String, subgroup: String },
    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("search grid too large: {0} samples")]
    GridTooLarge(usize),
    #[error("unknown tag {tag:?}; valid tags: {valid}")]
    UnknownTag { tag: String, valid: String },
}

pub type Coords = SmallVec<[Dd; 4]>;

/// A group element as a flat coordinate vector.
#[derive(Clone, PartialEq, Default)]
pub struct GroupElement {
    coords: Coords,
}

impl GroupElement {
    pub fn from_f64(coords: &[f64]) -> GroupElement {
        GroupElement {
            coords: coords.iter().map(|&x| Dd::from_f64(x)).collect(),
        }
    }

    pub fn from_dd(coords: Coords) -> GroupElement {
        GroupElement { coords }
    }

    pub fn coords(&self) -> &[Dd] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i].to_f64()
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64()).collect()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.coords.iter().map(|c| c.to_f64()))
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GroupInstance {
    RealVector(usize),
    IntegerLattice(usize),
    Torus(usize),
    HeisenbergReal,
    HeisenbergDiscrete,
    DirectProduct(Vec<GroupInstance>),
}

impl GroupInstance {
    pub fn real(d: usize) -> Result<GroupInstance, GroupError> {
        GroupInstance::RealVector(d).validated()
    }

    pub fn lattice(d: usize) -> Result<GroupInstance, GroupError> {
        GroupInstance::IntegerLattice(d).validated()
    }

    pub fn torus(d: usize) -> Result<GroupInstance, GroupError> {
        GroupInstance::Torus(d).validated()
    }

    pub fn product(factors: Vec<GroupInstance>) -> Result<GroupInstance, GroupError> {
        GroupInstance::DirectProduct(factors).validated()
    }

    pub fn validated(self) -> Result<GroupInstance, GroupError> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        self.validate_at(1)
    }

    fn validate_at(&self, depth: usize) -> Result<(), GroupError> {
        match self {
            GroupInstance::RealVector(d)
            | GroupInstance::IntegerLattice(d)
            | GroupInstance::Torus(d) => {
                if *d == 0 {
                    return Err(GroupError::InvalidInstance(format!(
                        "{self} needs dimension >= 1"
                    )));
                }
                Ok(())
            }
            GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => Ok(()),
            GroupInstance::DirectProduct(fs) => {
                if fs.len() < 2 {
                    return Err(GroupError::InvalidInstance(
                        "direct product needs at least 2 factors".into(),
                    ));
                }
                if depth > MAX_PRODUCT_DEPTH {
                    return Err(GroupError::InvalidInstance(format!(
                        "direct products nest at most {MAX_PRODUCT_DEPTH} deep"
                    )));
                }
                fs.iter().try_for_each(|f| f.validate_at(depth + 1))
            }
        }
    }

    /// Number of coordinates of an element.
    pub fn dim(&self) -> usize {
        match self {
            GroupInstance::RealVector(d)
            | GroupInstance::IntegerLattice(d)
            | GroupInstance::Torus(d) => *d,
            GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => 3,
            GroupInstance::DirectProduct(fs) => fs.iter().map(|f| f.dim()).sum(),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => false,
            GroupInstance::DirectProduct(fs) => fs.iter().all(|f| f.is_abelian()),
            _ => true,
        }
    }

    pub fn is_compact(&self) -> bool {
        match self {
            GroupInstance::Torus(_) => true,
            GroupInstance::DirectProduct(fs) => fs.iter().all(|f| f.is_compact()),
            _ => false,
        }
    }

    /// Discrete kinds only admit integer coordinates.
    pub fn is_discrete(&self) -> bool {
        match self {
            GroupInstance::IntegerLattice(_) | GroupInstance::HeisenbergDiscrete => true,
            GroupInstance::DirectProduct(fs) => fs.iter().all(|f| f.is_discrete()),
            _ => false,
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: SmallVec::from_elem(Dd::ZERO, self.dim()),
        }
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        g.coords.iter().all(|c| c.to_f64() == 0.0)
    }

    /// Checks that `g` has this instance's layout and satisfies its
    /// coordinate constraints.
    pub fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        self.check_slice(&g.coords)
    }

    fn check_slice(&self, g: &[Dd]) -> Result<(), GroupError> {
        if g.len() != self.dim() {
            return Err(GroupError::DimensionMismatch {
                expected: self.dim(),
                got: g.len(),
            });
        }
        let not_in = |reason: String| GroupError::NotInGroup {
            group: self.to_string(),
            reason,
        };
        if g.iter().any(|c| !c.is_finite()) {
            return Err(not_in("non-finite coordinate".into()));
        }
        match self {
            GroupInstance::Torus(_) => {
                if let Some(c) = g.iter().find(|c| !(0.0..1.0).contains(&c.to_f64())) {
                    return Err(not_in(format!("torus coordinate {c} outside [0, 1)")));
                }
            }
            GroupInstance::IntegerLattice(_) | GroupInstance::HeisenbergDiscrete => {
                if let Some(c) = g.iter().find(|c| c.floor() != **c) {
                    return Err(not_in(format!("non-integer coordinate {c}")));
                }
            }
            GroupInstance::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    f.check_slice(&g[off..off + f.dim()])?;
                    off += f.dim();
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn check_len(&self, g: &GroupElement) -> Result<(), GroupError> {
        if g.coords.len() != self.dim() {
            return Err(GroupError::DimensionMismatch {
                expected: self.dim(),
                got: g.coords.len(),
            });
        }
        Ok(())
    }

    /// Reduces torus coordinates into `[0, 1)`; other kinds are returned as is.
    pub fn normalize(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_len(g)?;
        let mut out = g.clone();
        self.normalize_in_place(&mut out.coords);
        Ok(out)
    }

    fn normalize_in_place(&self, g: &mut [Dd]) {
        match self {
            GroupInstance::Torus(_) => g.iter_mut().for_each(|c| *c = c.fract_unit()),
            GroupInstance::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    f.normalize_in_place(&mut g[off..off + f.dim()]);
                    off += f.dim();
                }
            }
            _ => {}
        }
    }

    /// `g·h` under the group law.
    pub fn compose(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_len(g)?;
        self.check_len(h)?;
        Ok(self.compose_unchecked(g, h))
    }

    /// `g·h` for elements already known to have this layout.
    pub(crate) fn compose_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let mut out = SmallVec::from_elem(Dd::ZERO, g.coords.len());
        self.compose_into(&g.coords, &h.coords, &mut out);
        GroupElement { coords: out }
    }

    fn compose_into(&self, g: &[Dd], h: &[Dd], out: &mut [Dd]) {
        match self {
            GroupInstance::RealVector(_) | GroupInstance::IntegerLattice(_) => {
                for i in 0..g.len() {
                    out[i] = g[i] + h[i];
                }
            }
            GroupInstance::Torus(_) => {
                for i in 0..g.len() {
                    out[i] = (g[i] + h[i]).fract_unit();
                }
            }
            GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => {
                out[0] = g[0] + h[0];
                out[1] = g[1] + h[1];
                out[2] = g[2] + h[2] + g[0] * h[1];
            }
            GroupInstance::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    let r = off..off + f.dim();
                    f.compose_into(&g[r.clone()], &h[r.clone()], &mut out[r]);
                    off += f.dim();
                }
            }
        }
    }

    pub fn invert(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_len(g)?;
        Ok(self.invert_unchecked(g))
    }

    pub(crate) fn invert_unchecked(&self, g: &GroupElement) -> GroupElement {
        let mut out = SmallVec::from_elem(Dd::ZERO, g.coords.len());
        self.invert_into(&g.coords, &mut out);
        GroupElement { coords: out }
    }

    fn invert_into(&self, g: &[Dd], out: &mut [Dd]) {
        match self {
            GroupInstance::RealVector(_) | GroupInstance::IntegerLattice(_) => {
                for i in 0..g.len() {
                    out[i] = -g[i];
                }
            }
            GroupInstance::Torus(_) => {
                for i in 0..g.len() {
                    out[i] = (-g[i]).fract_unit();
                }
            }
            GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => {
                out[0] = -g[0];
                out[1] = -g[1];
                out[2] = g[0] * g[1] - g[2];
            }
            GroupInstance::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    let r = off..off + f.dim();
                    f.invert_into(&g[r.clone()], &mut out[r]);
                    off += f.dim();
                }
            }
        }
    }

    /// `g·h·g⁻¹`.
    pub fn conjugate(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_len(g)?;
        self.check_len(h)?;
        Ok(self.conjugate_unchecked(g, h))
    }

    pub(crate) fn conjugate_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let gh = self.compose_unchecked(g, h);
        self.compose_unchecked(&gh, &self.invert_unchecked(g))
    }

    /// Left-invariant distance `|g⁻¹h|`.
    ///
    /// Euclidean for vector and lattice kinds, max of circle distances on
    /// tori, the homogeneous gauge on Heisenberg groups and the max over
    /// factors for products. The Heisenberg gauge is
    /// `((a² + b²)² + (c - ab/2)²)^(1/4)`: the central coordinate is taken in
    /// its symmetric (exponential) form so that `|g⁻¹| = |g|`. It is only a
    /// quasi-metric.
    pub fn distance(&self, g: &GroupElement, h: &GroupElement) -> Result<f64, GroupError> {
        self.check_len(g)?;
        self.check_len(h)?;
        Ok(self.distance_unchecked(g, h))
    }

    pub(crate) fn distance_unchecked(&self, g: &GroupElement, h: &GroupElement) -> f64 {
        self.distance_slices(&g.coords, &h.coords)
    }

    fn distance_slices(&self, g: &[Dd], h: &[Dd]) -> f64 {
        match self {
            GroupInstance::RealVector(_) | GroupInstance::IntegerLattice(_) => g
                .iter()
                .zip(h)
                .map(|(x, y)| {
                    let d = (*y - *x).to_f64();
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            GroupInstance::Torus(_) => g
                .iter()
                .zip(h)
                .map(|(x, y)| circle_distance_dd(*x, *y))
                .fold(0.0, f64::max),
            GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => {
                let da = h[0] - g[0];
                let db = h[1] - g[1];
                // central coordinate of g⁻¹h
                let dc = h[2] - g[2] - g[0] * db;
                heisenberg_gauge(da, db, dc)
            }
            GroupInstance::DirectProduct(fs) => {
                let mut off = 0;
                let mut best = 0.0f64;
                for f in fs {
                    let r = off..off + f.dim();
                    best = best.max(f.distance_slices(&g[r.clone()], &h[r]));
                    off += f.dim();
                }
                best
            }
        }
    }

    /// Distance from the identity.
    pub fn norm(&self, g: &GroupElement) -> Result<f64, GroupError> {
        self.check_len(g)?;
        Ok(self.norm_unchecked(g))
    }

    pub(crate) fn norm_unchecked(&self, g: &GroupElement) -> f64 {
        let id = self.identity();
        self.distance_slices(&id.coords, &g.coords)
    }

    /// Upper bound on the distance between two elements, `+inf` if unbounded.
    pub fn diameter(&self) -> f64 {
        match self {
            GroupInstance::Torus(_) => 0.5,
            GroupInstance::DirectProduct(fs) => fs.iter().map(|f| f.diameter()).fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }

    /// For each coordinate used by spatial indexes, whether it is periodic
    /// with period 1. The indexed coordinates are chosen so that the
    /// distance between two elements is at least the (circle) difference of
    /// any single indexed coordinate.
    pub(crate) fn index_layout(&self) -> Vec<bool> {
        match self {
            GroupInstance::RealVector(d) | GroupInstance::IntegerLattice(d) => vec![false; *d],
            GroupInstance::Torus(d) => vec![true; *d],
            GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => vec![false, false],
            GroupInstance::DirectProduct(fs) => fs.iter().flat_map(|f| f.index_layout()).collect(),
        }
    }

    pub(crate) fn index_coords(&self, g: &[Dd], out: &mut Vec<f64>) {
        match self {
            GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => {
                out.push(g[0].to_f64());
                out.push(g[1].to_f64());
            }
            GroupInstance::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    f.index_coords(&g[off..off + f.dim()], out);
                    off += f.dim();
                }
            }
            _ => out.extend(g.iter().map(|c| c.to_f64())),
        }
    }

    /// Stable string tag, e.g. `"heisenberg-real"` or `"product(torus:1,real:1)"`.
    pub fn tag(&self) -> String {
        self.to_string()
    }

    pub const VALID_TAGS: &'static str =
        "real:<d>, lattice:<d>, torus:<d>, heisenberg-real, heisenberg-discrete, product(<tag>,<tag>,...)";
}

#[inline]
pub(crate) fn circle_distance_dd(x: Dd, y: Dd) -> f64 {
    let d = (y - x).fract_unit().to_f64();
    d.min(1.0 - d)
}

/// `((a² + b²)² + (c - ab/2)²)^(1/4)` for the matrix coordinates `(a, b, c)`.
#[inline]
pub(crate) fn heisenberg_gauge(a: Dd, b: Dd, c: Dd) -> f64 {
    let z = (c - (a * b).mul_f64(0.5)).to_f64();
    let a = a.to_f64();
    let b = b.to_f64();
    let r2 = a * a + b * b;
    (r2 * r2 + z * z).sqrt().sqrt()
}

impl fmt::Display for GroupInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupInstance::RealVector(d) => write!(f, "real:{d}"),
            GroupInstance::IntegerLattice(d) => write!(f, "lattice:{d}"),
            GroupInstance::Torus(d) => write!(f, "torus:{d}"),
            GroupInstance::HeisenbergReal => f.write_str("heisenberg-real"),
            GroupInstance::HeisenbergDiscrete => f.write_str("heisenberg-discrete"),
            GroupInstance::DirectProduct(fs) => {
                f.write_str("product(")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{g}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for GroupInstance {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<GroupInstance, GroupError> {
        let s = s.trim();
        let unknown = || GroupError::UnknownTag {
            tag: s.to_string(),
            valid: GroupInstance::VALID_TAGS.to_string(),
        };
        if let Some(inner) = s.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            let mut factors = Vec::new();
            let mut depth = 0usize;
            let mut start = 0;
            for (i, ch) in inner.char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' => depth = depth.checked_sub(1).ok_or_else(unknown)?,
                    ',' if depth == 0 => {
                        factors.push(inner[start..i].parse()?);
                        start = i + 1;
                    }
                    _ => {}
                }
            }
            factors.push(inner[start..].parse()?);
            return GroupInstance::product(factors);
        }
        match s {
            "heisenberg-real" => return Ok(GroupInstance::HeisenbergReal),
            "heisenberg-discrete" => return Ok(GroupInstance::HeisenbergDiscrete),
            _ => {}
        }
        let (kind, d) = s.split_once(':').ok_or_else(unknown)?;
        let d: usize = d.parse().map_err(|_| unknown())?;
        match kind {
            "real" => GroupInstance::real(d),
            "lattice" => GroupInstance::lattice(d),
            "torus" => GroupInstance::torus(d),
            _ => Err(unknown()),
        }
    }
}

impl TryFrom<String> for GroupInstance {
    type Error = GroupError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<GroupInstance> for String {
    fn from(g: GroupInstance) -> String {
        g.to_string()
    }
}
