//! Cocycles `f: X → G` over a rotation and their products `f(n, x)`.

mod eval;
mod registry;
mod trig;

pub use eval::{
    evaluate_cocycle, evaluate_cocycle_with_budget, skew_iterate, skew_iterate_stepwise, values_at_times,
    verify_cocycle_identity, SignedValues, TREE_THRESHOLD,
};
pub use registry::{make_named_cocycle, CocycleSpec, COCYCLE_TAGS};
pub use trig::{TrigFn, TrigSum, TrigTerm};

use thiserror::Error;

use crate::base::{BaseError, RotationSystem, TorusPoint};
use crate::budget::Exhausted;
use crate::dd::Dd;
use crate::group::{GroupElement, GroupError, GroupInstance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CocycleError {
    #[error(transparent)]
    Base(#[from] BaseError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid cocycle: {0}")]
    Invalid(String),
    #[error("unknown cocycle tag {tag:?}; valid tags: {valid}")]
    UnknownTag { tag: String, valid: String },
    #[error("bad parameters for cocycle {tag:?}: {msg}")]
    Params { tag: String, msg: String },
    #[error("product stopped after {done} of {requested} factors")]
    Budget {
        /// Product of the factors evaluated so far.
        partial: GroupElement,
        done: u64,
        requested: u64,
    },
    #[error(transparent)]
    Exhausted(#[from] Exhausted),
}

/// The map `x ↦ f(x)`, one of a closed list of continuous families.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Constant(GroupElement),
    /// One trigonometric polynomial per coordinate of the target; torus
    /// coordinates are reduced mod 1.
    TrigSum(Vec<TrigSum>),
    /// `f(x) = b(Tx)·b(x)⁻¹` with `b` given coordinatewise.
    Coboundary(Vec<TrigSum>),
    /// `f(x) = x` into `Torus(1)` over a one-dimensional rotation.
    AnzaiIdentity,
    /// `f(x) = (a(x), b(x), 0)` into the real Heisenberg group.
    HeisenbergLift { a: TrigSum, b: TrigSum },
    /// Factorwise generators into a direct product.
    Product(Vec<Generator>),
}

impl Generator {
    pub fn tag(&self) -> &'static str {
        match self {
            Generator::Constant(_) => "constant",
            Generator::TrigSum(_) => "trig",
            Generator::Coboundary(_) => "coboundary",
            Generator::AnzaiIdentity => "anzai",
            Generator::HeisenbergLift { .. } => "heisenberg-lift",
            Generator::Product(_) => "product",
        }
    }

    fn validate(&self, base: &RotationSystem, target: &GroupInstance) -> Result<(), CocycleError> {
        let invalid = |m: String| Err(CocycleError::Invalid(m));
        let d = base.dim();
        let per_coord = |sums: &[TrigSum]| -> Result<(), CocycleError> {
            if target.is_discrete() {
                return invalid(format!("{} cocycles cannot take values in the discrete group {target}", self.tag()));
            }
            if sums.len() != target.dim() {
                return invalid(format!(
                    "{} coordinate functions given for a {}-dimensional target",
                    sums.len(),
                    target.dim()
                ));
            }
            for s in sums {
                s.check_dim(d).map_err(CocycleError::Invalid)?;
            }
            Ok(())
        };
        match self {
            Generator::Constant(c) => Ok(target.check(c)?),
            Generator::TrigSum(sums) | Generator::Coboundary(sums) => per_coord(sums),
            Generator::AnzaiIdentity => {
                if d != 1 || *target != GroupInstance::Torus(1) {
                    return invalid(format!("anzai needs a 1-dimensional base and target torus:1, got d={d}, {target}"));
                }
                Ok(())
            }
            Generator::HeisenbergLift { a, b } => {
                if *target != GroupInstance::HeisenbergReal {
                    return invalid(format!("heisenberg-lift needs target heisenberg-real, got {target}"));
                }
                a.check_dim(d).map_err(CocycleError::Invalid)?;
                b.check_dim(d).map_err(CocycleError::Invalid)
            }
            Generator::Product(gens) => {
                let GroupInstance::DirectProduct(factors) = target else {
                    return invalid(format!("product cocycle needs a product target, got {target}"));
                };
                if gens.len() != factors.len() {
                    return invalid(format!("{} factor cocycles for {} factor groups", gens.len(), factors.len()));
                }
                gens.iter().zip(factors).try_for_each(|(g, f)| g.validate(base, f))
            }
        }
    }

    fn eval_into(&self, base: &RotationSystem, target: &GroupInstance, x: &TorusPoint, out: &mut Vec<Dd>) {
        match self {
            Generator::Constant(c) => out.extend_from_slice(c.coords()),
            Generator::TrigSum(sums) => {
                let torus = matches!(target, GroupInstance::Torus(_));
                out.extend(sums.iter().map(|s| {
                    let v = Dd::from_f64(s.eval(x));
                    if torus {
                        v.fract_unit()
                    } else {
                        v
                    }
                }));
            }
            Generator::Coboundary(sums) => {
                let b_tx = transfer(sums, target, &base.step(x));
                let b_x = transfer(sums, target, x);
                let v = target.compose_unchecked(&b_tx, &target.invert_unchecked(&b_x));
                out.extend_from_slice(v.coords());
            }
            Generator::AnzaiIdentity => out.push(x.coords()[0].to_dd()),
            Generator::HeisenbergLift { a, b } => {
                out.push(Dd::from_f64(a.eval(x)));
                out.push(Dd::from_f64(b.eval(x)));
                out.push(Dd::ZERO);
            }
            Generator::Product(gens) => {
                let GroupInstance::DirectProduct(factors) = target else {
                    unreachable!("validated at construction")
                };
                for (g, f) in gens.iter().zip(factors) {
                    g.eval_into(base, f, x, out);
                }
            }
        }
    }

    fn has_closed_form(&self) -> bool {
        match self {
            Generator::Constant(_) | Generator::Coboundary(_) | Generator::AnzaiIdentity => true,
            Generator::Product(gens) => gens.iter().all(|g| g.has_closed_form()),
            _ => false,
        }
    }

    fn closed_form_into(&self, base: &RotationSystem, target: &GroupInstance, n: i64, x: &TorusPoint, out: &mut Vec<Dd>) {
        match self {
            Generator::Constant(c) => out.extend_from_slice(constant_power(target, c, n).coords()),
            Generator::Coboundary(sums) => {
                let b_nx = transfer(sums, target, &base.rotate_unchecked(x, n));
                let b_x = transfer(sums, target, x);
                out.extend_from_slice(target.compose_unchecked(&b_nx, &target.invert_unchecked(&b_x)).coords());
            }
            Generator::AnzaiIdentity => {
                let n = n as i128;
                let v = x.coords()[0]
                    .wrapping_mul_int(n)
                    .wrapping_add(base.alpha()[0].wrapping_mul_int(n * (n - 1) / 2));
                out.push(v.to_dd());
            }
            Generator::Product(gens) => {
                let GroupInstance::DirectProduct(factors) = target else {
                    unreachable!("validated at construction")
                };
                for (g, f) in gens.iter().zip(factors) {
                    g.closed_form_into(base, f, n, x, out);
                }
            }
            Generator::TrigSum(_) | Generator::HeisenbergLift { .. } => unreachable!("no closed form"),
        }
    }
}

/// `b(x)` as a group element.
fn transfer(sums: &[TrigSum], target: &GroupInstance, x: &TorusPoint) -> GroupElement {
    let v: Vec<f64> = sums.iter().map(|s| s.eval(x)).collect();
    let g = GroupElement::from_f64(&v);
    target.normalize(&g).expect("layout checked at construction")
}

/// `c^n` in closed form for the implemented groups.
fn constant_power(target: &GroupInstance, c: &GroupElement, n: i64) -> GroupElement {
    let nf = n as f64;
    let coords = c.coords();
    match target {
        GroupInstance::RealVector(_) | GroupInstance::IntegerLattice(_) => {
            GroupElement::from_dd(coords.iter().map(|v| v.mul_f64(nf)).collect())
        }
        GroupInstance::Torus(_) => GroupElement::from_dd(coords.iter().map(|v| v.mul_f64(nf).fract_unit()).collect()),
        GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => {
            let (a, b, cc) = (coords[0], coords[1], coords[2]);
            // (a, b, c)^n = (na, nb, nc + n(n-1)/2 · ab); n(n-1)/2 is exact in
            // a double for |n| <= 2^26 and split in two otherwise
            let tri = (n as i128) * (n as i128 - 1) / 2;
            let hi = (tri >> 26) as f64 * 67_108_864.0;
            let lo = (tri & ((1 << 26) - 1)) as f64;
            let ab = a * b;
            GroupElement::from_dd(
                [a.mul_f64(nf), b.mul_f64(nf), cc.mul_f64(nf) + ab.mul_f64(hi) + ab.mul_f64(lo)]
                    .into_iter()
                    .collect(),
            )
        }
        GroupInstance::DirectProduct(fs) => {
            let mut out = crate::group::Coords::new();
            let mut off = 0;
            for f in fs {
                let part = GroupElement::from_dd(coords[off..off + f.dim()].iter().copied().collect());
                out.extend_from_slice(constant_power(f, &part, n).coords());
                off += f.dim();
            }
            GroupElement::from_dd(out)
        }
    }
}

/// A cocycle generator together with its base rotation and target group.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocycle {
    system: RotationSystem,
    target: GroupInstance,
    generator: Generator,
}

impl Cocycle {
    pub fn new(system: RotationSystem, target: GroupInstance, generator: Generator) -> Result<Cocycle, CocycleError> {
        target.validate()?;
        generator.validate(&system, &target)?;
        let generator = match generator {
            Generator::Constant(c) => Generator::Constant(target.normalize(&c)?),
            g => g,
        };
        Ok(Cocycle {
            system,
            target,
            generator,
        })
    }

    pub fn system(&self) -> &RotationSystem {
        &self.system
    }

    pub fn target(&self) -> &GroupInstance {
        &self.target
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    fn check_point(&self, x: &TorusPoint) -> Result<(), CocycleError> {
        if x.dim() != self.system.dim() {
            return Err(BaseError::DimensionMismatch {
                expected: self.system.dim(),
                got: x.dim(),
            }
            .into());
        }
        Ok(())
    }

    /// `f(x)`.
    pub fn evaluate_generator(&self, x: &TorusPoint) -> Result<GroupElement, CocycleError> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &TorusPoint) -> GroupElement {
        let mut out = Vec::with_capacity(self.target.dim());
        self.generator.eval_into(&self.system, &self.target, x, &mut out);
        GroupElement::from_dd(out.into_iter().collect())
    }

    /// Whether [`Cocycle::closed_form`] is available.
    pub fn has_closed_form(&self) -> bool {
        self.generator.has_closed_form()
    }

    /// `f(n, x)` without forming the product, for constants (group powers),
    /// coboundaries (telescoping), Anzai (`n·x + n(n-1)/2·α`) and products
    /// of these. `None` for the other families.
    pub fn closed_form(&self, n: i64, x: &TorusPoint) -> Option<GroupElement> {
        if !self.has_closed_form() || x.dim() != self.system.dim() {
            return None;
        }
        if n == 0 {
            return Some(self.target.identity());
        }
        let mut out = Vec::with_capacity(self.target.dim());
        self.generator.closed_form_into(&self.system, &self.target, n, x, &mut out);
        Some(GroupElement::from_dd(out.into_iter().collect()))
    }

    /// Upper bound on `|f(n, x)|` coordinates for coboundaries: twice the
    /// sup norm of the transfer function, summed over coordinates.
    pub fn transfer_bound(&self) -> Option<f64> {
        match &self.generator {
            Generator::Coboundary(sums) => Some(2.0 * sums.iter().map(|s| s.sup_norm()).sum::<f64>()),
            _ => None,
        }
    }
}

/// A point `(x, g)` of `X × G`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewState {
    pub x: TorusPoint,
    pub g: GroupElement,
}

impl SkewState {
    pub fn new(x: TorusPoint, g: GroupElement) -> SkewState {
        SkewState { x, g }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::base::{AlphaSpec, NamedAlpha};

    pub(crate) fn golden() -> RotationSystem {
        RotationSystem::golden()
    }

    /// One cocycle per built-in family, over the golden rotation.
    pub(crate) fn all_families() -> Vec<Cocycle> {
        let s = golden();
        let hg = GroupInstance::HeisenbergReal;
        vec![
            Cocycle::new(
                s.clone(),
                hg.clone(),
                Generator::Constant(GroupElement::from_f64(&[0.3, -0.2, 0.1])),
            )
            .unwrap(),
            Cocycle::new(
                s.clone(),
                GroupInstance::RealVector(2),
                Generator::TrigSum(vec![TrigSum::cos(), "0.5*sin:2".parse().unwrap()]),
            )
            .unwrap(),
            Cocycle::new(s.clone(), GroupInstance::RealVector(1), Generator::Coboundary(vec![TrigSum::cos()])).unwrap(),
            Cocycle::new(s.clone(), GroupInstance::Torus(1), Generator::AnzaiIdentity).unwrap(),
            Cocycle::new(
                s.clone(),
                hg,
                Generator::HeisenbergLift {
                    a: TrigSum::cos(),
                    b: TrigSum::sin(),
                },
            )
            .unwrap(),
            Cocycle::new(
                s,
                GroupInstance::DirectProduct(vec![GroupInstance::Torus(1), GroupInstance::RealVector(1)]),
                Generator::Product(vec![Generator::AnzaiIdentity, Generator::Coboundary(vec![TrigSum::cos()])]),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn generator_examples() {
        let s = golden();
        let x = TorusPoint::from_f64(&[0.3]);
        let c = GroupElement::from_f64(&[2.5]);
        let f = Cocycle::new(s.clone(), GroupInstance::RealVector(1), Generator::Constant(c.clone())).unwrap();
        assert_eq!(f.evaluate_generator(&x).unwrap(), c);

        let anzai = Cocycle::new(s.clone(), GroupInstance::Torus(1), Generator::AnzaiIdentity).unwrap();
        assert!((anzai.evaluate_generator(&x).unwrap().coord(0) - 0.3).abs() < 1e-16);

        let cob = Cocycle::new(s.clone(), GroupInstance::RealVector(1), Generator::Coboundary(vec![TrigSum::cos()])).unwrap();
        let alpha = s.alpha()[0].to_f64();
        let expect = (std::f64::consts::TAU * (0.3 + alpha)).cos() - (std::f64::consts::TAU * 0.3).cos();
        assert!((cob.evaluate_generator(&x).unwrap().coord(0) - expect).abs() < 1e-14);

        assert!(cob.evaluate_generator(&TorusPoint::zero(2)).is_err());
    }

    #[test]
    fn construction_errors() {
        let s = golden();
        assert!(Cocycle::new(s.clone(), GroupInstance::RealVector(1), Generator::AnzaiIdentity).is_err());
        assert!(Cocycle::new(s.clone(), GroupInstance::IntegerLattice(1), Generator::TrigSum(vec![TrigSum::cos()])).is_err());
        assert!(Cocycle::new(
            s.clone(),
            GroupInstance::RealVector(2),
            Generator::TrigSum(vec![TrigSum::cos()])
        )
        .is_err());
        assert!(Cocycle::new(
            s.clone(),
            GroupInstance::Torus(1),
            Generator::HeisenbergLift {
                a: TrigSum::cos(),
                b: TrigSum::sin()
            }
        )
        .is_err());
        assert!(Cocycle::new(
            s.clone(),
            GroupInstance::IntegerLattice(1),
            Generator::Constant(GroupElement::from_f64(&[0.5]))
        )
        .is_err());
        let s2 = RotationSystem::from_specs(&[AlphaSpec::Named(NamedAlpha::Golden), AlphaSpec::Named(NamedAlpha::Sqrt2Minus1)]).unwrap();
        assert!(Cocycle::new(s2, GroupInstance::Torus(1), Generator::AnzaiIdentity).is_err());
    }

    #[test]
    fn constant_power_matches_repeated_product() {
        let hg = GroupInstance::HeisenbergReal;
        let c = GroupElement::from_f64(&[0.7, -1.3, 0.4]);
        let mut acc = hg.identity();
        for n in 1..=50i64 {
            acc = hg.compose(&c, &acc).unwrap();
            assert!(hg.distance(&acc, &constant_power(&hg, &c, n)).unwrap() < 1e-12);
        }
        let inv = constant_power(&hg, &c, -7);
        let back = hg.compose(&inv, &constant_power(&hg, &c, 7)).unwrap();
        assert!(hg.norm(&back).unwrap() < 1e-12);
        let big = constant_power(&hg, &c, 3_000_000_000);
        let expect_c = 0.4 * 3e9 + 3e9 * (3e9 - 1.0) / 2.0 * (0.7 * -1.3);
        assert!((big.coord(2) - expect_c).abs() / expect_c.abs() < 1e-15);
    }
}
