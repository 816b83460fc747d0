//! The base system: a minimal rotation `x ↦ x + α` on the torus `T^d`.
//!
//! Coordinates are exact 128-bit binary fractions of a full turn, so
//! `T^n x = x + n·α (mod 1)` is one wrapping multiply-add with no drift, the
//! action composes bit-exactly and the max-circle metric is invariant
//! bit-for-bit. Every 128-bit fraction is rational; all statements about
//! irrational rotations hold to working precision.

mod alpha;
mod contfrac;
mod returns;

pub use alpha::{parse_alpha, AlphaSpec, NamedAlpha};
pub use contfrac::{continued_fraction, ContinuedFraction, MAX_CF_DEPTH};
pub use returns::{best_return_times, brute_force_return_times, ReturnTimes, BRUTE_FORCE_MAX_N, MAX_RETURN_N};

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::dd::Dd;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaseError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rotation number {0} is rational to working precision")]
    RationalAlpha(String),
    #[error("torus dimension must be at least 1")]
    ZeroDimension,
    #[error("rotation exponent {0} exceeds 2^62 in magnitude")]
    ExponentOverflow(i128),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("return-time scan over {requested} steps exceeds the budget of {limit}")]
    BudgetExceeded { requested: u64, limit: u64 },
    #[error("cannot parse rotation number {0:?}")]
    BadAlpha(String),
}

/// An element of `R/Z` as the numerator of a fraction with denominator `2^128`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Frac128(pub u128);

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

impl Frac128 {
    pub const ZERO: Frac128 = Frac128(0);
    pub const HALF: Frac128 = Frac128(1 << 127);

    /// Nearest representable fraction to `x mod 1`. Exact when `x` is a
    /// dyadic with at most 128 fractional bits, which covers every `f64` in
    /// `[2^-75, 1)`.
    pub fn from_f64(x: f64) -> Frac128 {
        assert!(x.is_finite(), "non-finite torus coordinate");
        let x = x - x.floor();
        if x == 0.0 {
            return Frac128::ZERO;
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let (mant, e) = if exp == 0 {
            (bits & ((1 << 52) - 1), -1074)
        } else {
            ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
        };
        // x = mant · 2^e, numerator = mant · 2^(e + 128)
        let shift = e + 128;
        if shift >= 0 {
            Frac128((mant as u128) << shift)
        } else if shift > -64 {
            let s = (-shift) as u32;
            let q = (mant as u128) >> s;
            let rem = (mant as u128) & ((1u128 << s) - 1);
            let half = 1u128 << (s - 1);
            Frac128(if rem > half || (rem == half && q & 1 == 1) { q + 1 } else { q })
        } else {
            Frac128::ZERO
        }
    }

    /// Nearest `f64` in `[0, 1)`; values rounding up to 1 map to 0.
    pub fn to_f64(self) -> f64 {
        let v = self.0 as f64 / TWO_POW_128;
        if v >= 1.0 {
            0.0
        } else {
            v
        }
    }

    /// About 106 bits of the fraction as a double-double.
    pub fn to_dd(self) -> Dd {
        let top = (self.0 >> 75) as f64 * 2f64.powi(-53);
        let rest = (self.0 & ((1u128 << 75) - 1)) as f64 * 2f64.powi(-128);
        Dd::from_parts(top, rest)
    }

    #[inline]
    pub fn wrapping_add(self, o: Frac128) -> Frac128 {
        Frac128(self.0.wrapping_add(o.0))
    }

    #[inline]
    pub fn wrapping_sub(self, o: Frac128) -> Frac128 {
        Frac128(self.0.wrapping_sub(o.0))
    }

    /// `n·self mod 1`, exact for every integer `n`.
    #[inline]
    pub fn wrapping_mul_int(self, n: i128) -> Frac128 {
        Frac128(self.0.wrapping_mul(n as u128))
    }

    /// Distance to the nearest integer, `‖self‖ ∈ [0, 1/2]`, as a fraction.
    #[inline]
    pub fn circle_norm(self) -> Frac128 {
        Frac128(self.0.min(self.0.wrapping_neg()))
    }

    #[inline]
    pub fn circle_distance(self, o: Frac128) -> Frac128 {
        self.wrapping_sub(o).circle_norm()
    }

    pub fn to_hex(self) -> String {
        format!("0x{:032x}", self.0)
    }
}

impl fmt::Debug for Frac128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frac128({} = {})", self.to_hex(), self.to_f64())
    }
}

/// Declared Diophantine type of a rotation number; informational only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiophantineTag {
    Golden,
    Quadratic,
    LiouvilleLike,
    Custom,
}

/// A point of `T^d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    coords: SmallVec<[Frac128; 2]>,
}

impl TorusPoint {
    pub fn new(coords: &[Frac128]) -> TorusPoint {
        TorusPoint {
            coords: SmallVec::from_slice(coords),
        }
    }

    pub fn from_f64(coords: &[f64]) -> TorusPoint {
        TorusPoint {
            coords: coords.iter().map(|&x| Frac128::from_f64(x)).collect(),
        }
    }

    pub fn zero(d: usize) -> TorusPoint {
        TorusPoint {
            coords: SmallVec::from_elem(Frac128::ZERO, d),
        }
    }

    pub fn coords(&self) -> &[Frac128] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64()).collect()
    }

    /// Translation by `v` (not necessarily a multiple of the rotation vector).
    pub fn translate(&self, v: &[Frac128]) -> TorusPoint {
        TorusPoint {
            coords: self.coords.iter().zip(v).map(|(a, b)| a.wrapping_add(*b)).collect(),
        }
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords.iter().map(|c| c.to_f64())).finish()
    }
}

/// Largest accepted `|n|` in `T^n`.
pub const MAX_EXPONENT: i128 = 1 << 62;

/// The rotation `T x = x + α` on `T^d`.
#[derive(Clone, PartialEq, Eq)]
pub struct RotationSystem {
    alpha: SmallVec<[Frac128; 2]>,
    tag: DiophantineTag,
}

impl RotationSystem {
    /// Rejects rotation numbers whose binary expansion terminates within 64
    /// bits (these are short dyadic rationals, e.g. `0.25` or any plain
    /// `f64` cast) and zero.
    pub fn new(alpha: &[Frac128], tag: DiophantineTag) -> Result<RotationSystem, BaseError> {
        if alpha.is_empty() {
            return Err(BaseError::ZeroDimension);
        }
        if let Some(a) = alpha.iter().find(|a| a.0 == 0 || a.0.trailing_zeros() >= 64) {
            return Err(BaseError::RationalAlpha(a.to_hex()));
        }
        Ok(RotationSystem {
            alpha: SmallVec::from_slice(alpha),
            tag,
        })
    }

    /// One-dimensional rotation by the golden mean `(√5 - 1)/2`.
    pub fn golden() -> RotationSystem {
        RotationSystem::new(&[NamedAlpha::Golden.value()], DiophantineTag::Golden)
            .expect("golden mean is irrational")
    }

    pub fn from_specs(specs: &[AlphaSpec]) -> Result<RotationSystem, BaseError> {
        let mut alpha = Vec::with_capacity(specs.len());
        let mut tags = Vec::with_capacity(specs.len());
        for s in specs {
            let (a, t) = s.resolve()?;
            alpha.push(a);
            tags.push(t);
        }
        let tag = if tags.iter().all(|t| *t == tags[0]) {
            tags[0]
        } else {
            DiophantineTag::Custom
        };
        RotationSystem::new(&alpha, tag)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Frac128] {
        &self.alpha
    }

    pub fn tag(&self) -> DiophantineTag {
        self.tag
    }

    fn check_point(&self, x: &TorusPoint) -> Result<(), BaseError> {
        if x.dim() != self.dim() {
            return Err(BaseError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// `T^n x`, computed as `x + n·α` in one step.
    pub fn rotate(&self, x: &TorusPoint, n: i64) -> Result<TorusPoint, BaseError> {
        self.check_point(x)?;
        if (n as i128).abs() > MAX_EXPONENT {
            return Err(BaseError::ExponentOverflow(n as i128));
        }
        Ok(self.rotate_unchecked(x, n))
    }

    #[inline]
    pub(crate) fn rotate_unchecked(&self, x: &TorusPoint, n: i64) -> TorusPoint {
        TorusPoint {
            coords: x
                .coords
                .iter()
                .zip(&self.alpha)
                .map(|(c, a)| c.wrapping_add(a.wrapping_mul_int(n as i128)))
                .collect(),
        }
    }

    /// `T x`.
    #[inline]
    pub(crate) fn step(&self, x: &TorusPoint) -> TorusPoint {
        x.translate(&self.alpha)
    }

    /// `T⁻¹ x`.
    #[inline]
    pub(crate) fn step_back(&self, x: &TorusPoint) -> TorusPoint {
        TorusPoint {
            coords: x.coords.iter().zip(&self.alpha).map(|(c, a)| c.wrapping_sub(*a)).collect(),
        }
    }

    /// `δ(x, y)`: max over coordinates of the circle distance.
    pub fn base_distance(&self, x: &TorusPoint, y: &TorusPoint) -> Result<f64, BaseError> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(base_distance_exact(x, y).to_f64_exact())
    }

    /// `max_i ‖n α_i‖`, i.e. `δ(T^n x, x)` for every `x`.
    #[inline]
    pub fn displacement(&self, n: i64) -> Frac128 {
        self.alpha
            .iter()
            .map(|a| a.wrapping_mul_int(n as i128).circle_norm())
            .max()
            .unwrap_or(Frac128::ZERO)
    }
}

impl fmt::Debug for RotationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RotationSystem")
            .field("alpha", &self.alpha.iter().map(|a| a.to_hex()).collect::<Vec<_>>())
            .field("tag", &self.tag)
            .finish()
    }
}

/// `δ(x, y)` as an exact fraction. Panics on dimension mismatch in debug builds.
#[inline]
pub(crate) fn base_distance_exact(x: &TorusPoint, y: &TorusPoint) -> Frac128 {
    debug_assert_eq!(x.dim(), y.dim());
    x.coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| a.circle_distance(*b))
        .max()
        .unwrap_or(Frac128::ZERO)
}

impl Frac128 {
    /// Like [`Frac128::to_f64`] but maps `1/2` and other values to the
    /// correctly rounded double without the wrap at 1 (distances live in
    /// `[0, 1/2]`).
    #[inline]
    pub(crate) fn to_f64_exact(self) -> f64 {
        self.0 as f64 / TWO_POW_128
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(rng: &mut impl Rng, d: usize) -> RotationSystem {
        let alpha: Vec<Frac128> = (0..d).map(|_| Frac128(rng.gen::<u128>() | 1)).collect();
        RotationSystem::new(&alpha, DiophantineTag::Custom).unwrap()
    }

    fn random_point(rng: &mut impl Rng, d: usize) -> TorusPoint {
        TorusPoint::new(&(0..d).map(|_| Frac128(rng.gen())).collect::<Vec<_>>())
    }

    #[test]
    fn from_f64_is_exact_on_dyadics() {
        assert_eq!(Frac128::from_f64(0.5), Frac128::HALF);
        assert_eq!(Frac128::from_f64(0.25).0, 1u128 << 126);
        assert_eq!(Frac128::from_f64(-0.25).0, 3u128 << 126);
        for x in [0.1, 0.3, 0.999, 1e-10] {
            assert_eq!(Frac128::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn to_dd_keeps_low_bits() {
        let x = Frac128((1u128 << 127) | 1);
        let d = x.to_dd();
        assert_eq!(d.hi(), 0.5);
        assert_eq!(d.lo(), 2f64.powi(-128));
    }

    #[test]
    fn dyadic_alpha_rejected() {
        assert!(matches!(
            RotationSystem::new(&[Frac128::from_f64(0.25)], DiophantineTag::Custom),
            Err(BaseError::RationalAlpha(_))
        ));
        assert!(RotationSystem::new(&[Frac128::from_f64(0.618_033_988_749_894_9)], DiophantineTag::Custom).is_err());
        assert!(RotationSystem::new(&[], DiophantineTag::Custom).is_err());
    }

    #[test]
    fn rotate_examples() {
        let s = RotationSystem::golden();
        let x = TorusPoint::from_f64(&[0.3]);
        assert_eq!(s.rotate(&x, 0).unwrap(), x);
        let y = s.rotate(&x, 1).unwrap();
        assert_eq!(y.coords()[0].wrapping_sub(x.coords()[0]), s.alpha()[0]);
        assert_eq!(s.rotate(&s.rotate(&x, 5).unwrap(), -5).unwrap(), x);
        assert!(matches!(s.rotate(&x, i64::MAX), Err(BaseError::ExponentOverflow(_))));
        assert!(s.rotate(&TorusPoint::zero(2), 1).is_err());
    }

    #[test]
    fn base_distance_examples() {
        let s1 = RotationSystem::golden();
        let x = TorusPoint::from_f64(&[0.05]);
        assert_eq!(s1.base_distance(&x, &x).unwrap(), 0.0);
        let d = s1.base_distance(&x, &TorusPoint::from_f64(&[0.95])).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        let s2 = RotationSystem::from_specs(&[AlphaSpec::Named(NamedAlpha::Golden), AlphaSpec::Named(NamedAlpha::Sqrt2Minus1)]).unwrap();
        let d = s2
            .base_distance(&TorusPoint::from_f64(&[0.1, 0.5]), &TorusPoint::from_f64(&[0.2, 0.5]))
            .unwrap();
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn direct_rotation_matches_stepping() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for d in 1..=3 {
            let s = random_system(&mut rng, d);
            let x = random_point(&mut rng, d);
            let mut y = x.clone();
            let mut z = x.clone();
            for n in 1..=10_000i64 {
                y = s.step(&y);
                z = s.step_back(&z);
                if n % 997 == 0 || n == 10_000 {
                    assert_eq!(y, s.rotate(&x, n).unwrap());
                    assert_eq!(z, s.rotate(&x, -n).unwrap());
                }
            }
        }
    }

    #[test]
    fn rotation_is_an_exact_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for _ in 0..1000 {
            let d = rng.gen_range(1..=3);
            let s = random_system(&mut rng, d);
            let x = random_point(&mut rng, d);
            let y = random_point(&mut rng, d);
            let n = rng.gen_range(-1_000_000..=1_000_000);
            let before = s.base_distance(&x, &y).unwrap();
            let after = s.base_distance(&s.rotate(&x, n).unwrap(), &s.rotate(&y, n).unwrap()).unwrap();
            assert_eq!(before.to_bits(), after.to_bits());
            let (k, l) = (rng.gen_range(-1i64 << 40..1 << 40), rng.gen_range(-1i64 << 40..1 << 40));
            assert_eq!(
                s.rotate(&s.rotate(&x, k).unwrap(), l).unwrap(),
                s.rotate(&x, k + l).unwrap()
            );
        }
    }
}
