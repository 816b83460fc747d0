//! Closed subgroups with canonical coset representatives.
//!
//! Only pairings with an exact canonical form are accepted; anything else is
//! an [`GroupError::UnsupportedQuotient`]. Every supported pairing is a normal
//! subgroup (abelian ambient groups, the Heisenberg centre, products of
//! those), so conjugating the subgroup never changes it and the conjugator
//! does not enter the quotient map.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{circle_distance_dd, GroupElement, GroupError, GroupInstance};
use crate::dd::Dd;

/// A subgroup of `Torus(d)` generator acting on one coordinate: the cyclic
/// group of order `order` on that coordinate, or the whole circle when
/// `order == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGenerator {
    pub coord: usize,
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SubgroupKind {
    Trivial,
    Full,
    CenterOfHeisenberg,
    LatticeZd(usize),
    TorusSubgroup(Vec<TorusGenerator>),
    VectorSubspace(Vec<Vec<f64>>),
    ProductOfSpecs(Vec<SubgroupSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub kind: SubgroupKind,
    /// `c` in `cHc⁻¹`; `None` is the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugator: Option<Vec<f64>>,
}

impl SubgroupSpec {
    pub fn new(kind: SubgroupKind) -> SubgroupSpec {
        SubgroupSpec {
            kind,
            conjugator: None,
        }
    }

    pub fn trivial() -> SubgroupSpec {
        SubgroupSpec::new(SubgroupKind::Trivial)
    }

    pub fn full() -> SubgroupSpec {
        SubgroupSpec::new(SubgroupKind::Full)
    }

    pub fn center() -> SubgroupSpec {
        SubgroupSpec::new(SubgroupKind::CenterOfHeisenberg)
    }

    pub fn lattice(d: usize) -> SubgroupSpec {
        SubgroupSpec::new(SubgroupKind::LatticeZd(d))
    }

    pub fn subspace(basis: Vec<Vec<f64>>) -> SubgroupSpec {
        SubgroupSpec::new(SubgroupKind::VectorSubspace(basis))
    }

    pub fn conjugated(mut self, by: &GroupElement) -> SubgroupSpec {
        self.conjugator = Some(by.to_f64_vec());
        self
    }

    pub fn conjugator(&self, g: &GroupInstance) -> GroupElement {
        match &self.conjugator {
            Some(c) => GroupElement::from_f64(c),
            None => g.identity(),
        }
    }

    /// Checks that `(g, self)` is a supported pairing.
    pub fn check(&self, g: &GroupInstance) -> Result<(), GroupError> {
        if let Some(c) = &self.conjugator {
            g.check(&GroupElement::from_f64(c))?;
        }
        let unsupported = || GroupError::UnsupportedQuotient {
            group: g.to_string(),
            subgroup: self.to_string(),
        };
        match (&self.kind, g) {
            (SubgroupKind::Trivial | SubgroupKind::Full, _) => Ok(()),
            (
                SubgroupKind::CenterOfHeisenberg,
                GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete,
            ) => Ok(()),
            (
                SubgroupKind::LatticeZd(k),
                GroupInstance::RealVector(d) | GroupInstance::IntegerLattice(d),
            ) if k == d => Ok(()),
            (SubgroupKind::TorusSubgroup(gens), GroupInstance::Torus(d)) => {
                if gens.is_empty() {
                    return Err(GroupError::InvalidSubgroup("torus subgroup without generators".into()));
                }
                if let Some(t) = gens.iter().find(|t| t.coord >= *d) {
                    return Err(GroupError::InvalidSubgroup(format!(
                        "generator on coordinate {} of torus:{d}",
                        t.coord
                    )));
                }
                Ok(())
            }
            (SubgroupKind::VectorSubspace(basis), GroupInstance::RealVector(d)) => {
                orthonormal_basis(basis, *d).map(|_| ())
            }
            (SubgroupKind::ProductOfSpecs(specs), GroupInstance::DirectProduct(fs))
                if specs.len() == fs.len() =>
            {
                specs.iter().zip(fs).try_for_each(|(s, f)| s.check(f))
            }
            _ => Err(unsupported()),
        }
    }

    pub fn tag(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SubgroupKind::Trivial => f.write_str("trivial"),
            SubgroupKind::Full => f.write_str("full"),
            SubgroupKind::CenterOfHeisenberg => f.write_str("center"),
            SubgroupKind::LatticeZd(d) => write!(f, "lattice:{d}"),
            SubgroupKind::TorusSubgroup(gens) => {
                f.write_str("torus-subgroup(")?;
                for (i, t) in gens.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}/{}", t.coord, t.order)?;
                }
                f.write_str(")")
            }
            SubgroupKind::VectorSubspace(b) => write!(f, "subspace(dim {})", b.len()),
            SubgroupKind::ProductOfSpecs(specs) => {
                f.write_str("product(")?;
                for (i, s) in specs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Gram-Schmidt on the given spanning vectors of a subspace of `R^d`.
fn orthonormal_basis(basis: &[Vec<f64>], d: usize) -> Result<Vec<Vec<f64>>, GroupError> {
    if basis.is_empty() {
        return Err(GroupError::InvalidSubgroup("empty subspace basis".into()));
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    for v in basis {
        if v.len() != d {
            return Err(GroupError::InvalidSubgroup(format!(
                "basis vector of length {} in R^{d}",
                v.len()
            )));
        }
        let mut w = v.clone();
        for e in &out {
            let p: f64 = w.iter().zip(e).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(e).for_each(|(a, b)| *a -= p * b);
        }
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        let scale = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n <= 1e-12 * scale.max(1e-300) {
            return Err(GroupError::InvalidSubgroup("linearly dependent subspace basis".into()));
        }
        out.push(w.into_iter().map(|a| a / n).collect());
    }
    Ok(out)
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    a / gcd(a, b) * b
}

/// Per-coordinate reduction for a torus subgroup: `None` kills the
/// coordinate, `Some(m)` reduces it modulo `1/m`.
fn torus_moduli(gens: &[TorusGenerator], d: usize) -> Vec<Option<u64>> {
    let mut moduli: Vec<Option<u64>> = vec![Some(1); d];
    for t in gens {
        moduli[t.coord] = match (moduli[t.coord], t.order) {
            (_, 0) | (None, _) => None,
            (Some(m), k) => Some(lcm(m, k as u64)),
        };
    }
    moduli
}

/// Canonical representative of the left coset `gH`.
///
/// Two elements get the same representative iff `g⁻¹g' ∈ H`: exactly for
/// lattice and centre kinds, up to rounding for subspaces.
pub fn quotient_project(
    g: &GroupInstance,
    h: &SubgroupSpec,
    x: &GroupElement,
) -> Result<GroupElement, GroupError> {
    h.check(g)?;
    if x.len() != g.dim() {
        return Err(GroupError::DimensionMismatch {
            expected: g.dim(),
            got: x.len(),
        });
    }
    let mut out: SmallVec<[Dd; 4]> = SmallVec::from_slice(x.coords());
    project_into(g, h, &mut out)?;
    Ok(GroupElement::from_dd(out))
}

fn project_into(g: &GroupInstance, h: &SubgroupSpec, x: &mut [Dd]) -> Result<(), GroupError> {
    match (&h.kind, g) {
        (SubgroupKind::Trivial, _) => {}
        (SubgroupKind::Full, _) => x.iter_mut().for_each(|c| *c = Dd::ZERO),
        (SubgroupKind::CenterOfHeisenberg, _) => x[2] = Dd::ZERO,
        (SubgroupKind::LatticeZd(_), GroupInstance::RealVector(_)) => {
            x.iter_mut().for_each(|c| *c = c.fract_unit())
        }
        (SubgroupKind::LatticeZd(_), _) => x.iter_mut().for_each(|c| *c = Dd::ZERO),
        (SubgroupKind::TorusSubgroup(gens), _) => {
            for (c, m) in x.iter_mut().zip(torus_moduli(gens, g.dim())) {
                *c = match m {
                    None => Dd::ZERO,
                    Some(1) => *c,
                    Some(m) => {
                        let k = c.mul_f64(m as f64).floor();
                        (*c - k.mul_f64(1.0 / m as f64)).fract_unit()
                    }
                };
            }
        }
        (SubgroupKind::VectorSubspace(basis), _) => {
            let e = orthonormal_basis(basis, x.len())?;
            let v: Vec<f64> = x.iter().map(|c| c.to_f64()).collect();
            let mut w = v.clone();
            for b in &e {
                let p: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(b).for_each(|(a, b)| *a -= p * b);
            }
            x.iter_mut().zip(w).for_each(|(c, a)| *c = Dd::from_f64(a));
        }
        (SubgroupKind::ProductOfSpecs(specs), GroupInstance::DirectProduct(fs)) => {
            let mut off = 0;
            for (s, f) in specs.iter().zip(fs) {
                project_into(f, s, &mut x[off..off + f.dim()])?;
                off += f.dim();
            }
        }
        _ => {
            return Err(GroupError::UnsupportedQuotient {
                group: g.to_string(),
                subgroup: h.to_string(),
            })
        }
    }
    Ok(())
}

/// Distance between the cosets `xH` and `yH`, i.e. the infimum of the
/// group distance over coset representatives.
pub fn quotient_distance(
    g: &GroupInstance,
    h: &SubgroupSpec,
    x: &GroupElement,
    y: &GroupElement,
) -> Result<f64, GroupError> {
    let px = quotient_project(g, h, x)?;
    let py = quotient_project(g, h, y)?;
    Ok(coset_distance(g, h, px.coords(), py.coords()))
}

/// Distance from the identity coset to `xH`.
pub fn quotient_norm(g: &GroupInstance, h: &SubgroupSpec, x: &GroupElement) -> Result<f64, GroupError> {
    quotient_distance(g, h, &g.identity(), x)
}

fn coset_distance(g: &GroupInstance, h: &SubgroupSpec, x: &[Dd], y: &[Dd]) -> f64 {
    match (&h.kind, g) {
        (SubgroupKind::Trivial, _) => g.distance_slices(x, y),
        (SubgroupKind::Full, _) => 0.0,
        (SubgroupKind::CenterOfHeisenberg, _) => {
            let da = (y[0] - x[0]).to_f64();
            let db = (y[1] - x[1]).to_f64();
            (da * da + db * db).sqrt()
        }
        (SubgroupKind::LatticeZd(_), GroupInstance::RealVector(_)) => x
            .iter()
            .zip(y)
            .map(|(a, b)| circle_distance_dd(*a, *b).powi(2))
            .sum::<f64>()
            .sqrt(),
        (SubgroupKind::LatticeZd(_), _) => 0.0,
        (SubgroupKind::TorusSubgroup(gens), _) => x
            .iter()
            .zip(y)
            .zip(torus_moduli(gens, g.dim()))
            .map(|((a, b), m)| match m {
                None => 0.0,
                Some(m) => {
                    let m = m as f64;
                    circle_distance_dd(a.mul_f64(m), b.mul_f64(m)) / m
                }
            })
            .fold(0.0, f64::max),
        (SubgroupKind::VectorSubspace(_), _) => g.distance_slices(x, y),
        (SubgroupKind::ProductOfSpecs(specs), GroupInstance::DirectProduct(fs)) => {
            let mut off = 0;
            let mut best = 0.0f64;
            for (s, f) in specs.iter().zip(fs) {
                let r = off..off + f.dim();
                best = best.max(coset_distance(f, s, &x[r.clone()], &y[r]));
                off += f.dim();
            }
            best
        }
        _ => f64::NAN,
    }
}

/// Elements of `H` (conjugated by the spec's conjugator) within distance
/// `radius` of the identity, sampled with parameter step `step` along
/// continuous directions. Lattice and cyclic kinds are enumerated exactly.
pub fn subgroup_elements(
    g: &GroupInstance,
    h: &SubgroupSpec,
    radius: f64,
    step: f64,
) -> Result<Vec<GroupElement>, GroupError> {
    h.check(g)?;
    if !(step > 0.0) || !(radius >= 0.0) {
        return Err(GroupError::Degenerate(format!("radius {radius}, step {step}")));
    }
    let raw = raw_subgroup_elements(g, h, radius, step)?;
    let c = h.conjugator(g);
    let conj = !g.is_identity(&c);
    Ok(raw
        .into_iter()
        .map(|x| if conj { g.conjugate_unchecked(&c, &x) } else { x })
        .filter(|x| g.norm_unchecked(x) <= radius)
        .collect())
}

const MAX_SUBGROUP_SAMPLES: usize = 2_000_000;

fn axis_samples(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).floor() as i64;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn cartesian(factors: Vec<Vec<Vec<f64>>>) -> Result<Vec<Vec<f64>>, GroupError> {
    let total = factors.iter().map(|f| f.len()).product::<usize>();
    if total > MAX_SUBGROUP_SAMPLES {
        return Err(GroupError::GridTooLarge(total));
    }
    let mut acc: Vec<Vec<f64>> = vec![Vec::new()];
    for f in factors {
        acc = acc
            .iter()
            .flat_map(|prefix| {
                f.iter().map(move |part| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(part);
                    v
                })
            })
            .collect();
    }
    Ok(acc)
}

fn raw_subgroup_elements(
    g: &GroupInstance,
    h: &SubgroupSpec,
    radius: f64,
    step: f64,
) -> Result<Vec<GroupElement>, GroupError> {
    let coords = raw_coords(g, h, radius, step)?;
    Ok(coords.iter().map(|v| GroupElement::from_f64(v)).collect())
}

fn raw_coords(
    g: &GroupInstance,
    h: &SubgroupSpec,
    radius: f64,
    step: f64,
) -> Result<Vec<Vec<f64>>, GroupError> {
    let d = g.dim();
    match (&h.kind, g) {
        (SubgroupKind::Trivial, _) => Ok(vec![vec![0.0; d]]),
        (SubgroupKind::Full, _) => {
            let axes = full_axes(g, radius, step);
            cartesian(axes.into_iter().map(|a| a.into_iter().map(|x| vec![x]).collect()).collect())
        }
        (SubgroupKind::CenterOfHeisenberg, _) => {
            // |(0, 0, t)| = sqrt|t|
            let t = radius * radius;
            let ts = if g.is_discrete() {
                let k = t.floor() as i64;
                (-k..=k).map(|i| i as f64).collect()
            } else {
                axis_samples(-t, t, step)
            };
            Ok(ts.into_iter().map(|t| vec![0.0, 0.0, t]).collect())
        }
        (SubgroupKind::LatticeZd(_), GroupInstance::RealVector(_)) => {
            let k = radius.floor() as i64;
            let axis: Vec<Vec<f64>> = (-k..=k).map(|i| vec![i as f64]).collect();
            cartesian(vec![axis; d])
        }
        (SubgroupKind::LatticeZd(_), _) => Ok(vec![vec![0.0; d]]),
        (SubgroupKind::TorusSubgroup(gens), _) => {
            let axes: Vec<Vec<Vec<f64>>> = torus_moduli(gens, d)
                .into_iter()
                .map(|m| match m {
                    None => axis_samples(0.0, 1.0 - step * 0.5, step).into_iter().map(|x| vec![x]).collect(),
                    Some(m) => (0..m).map(|k| vec![k as f64 / m as f64]).collect(),
                })
                .collect();
            cartesian(axes)
        }
        (SubgroupKind::VectorSubspace(basis), _) => {
            let e = orthonormal_basis(basis, d)?;
            let ts = axis_samples(-radius, radius, step);
            let params = cartesian(vec![ts.into_iter().map(|t| vec![t]).collect(); e.len()])?;
            Ok(params
                .into_iter()
                .map(|p| {
                    let mut v = vec![0.0; d];
                    for (t, b) in p.iter().zip(&e) {
                        v.iter_mut().zip(b).for_each(|(a, b)| *a += t * b);
                    }
                    v
                })
                .collect())
        }
        (SubgroupKind::ProductOfSpecs(specs), GroupInstance::DirectProduct(fs)) => {
            let parts = specs
                .iter()
                .zip(fs)
                .map(|(s, f)| raw_coords(f, s, radius, step))
                .collect::<Result<Vec<_>, _>>()?;
            cartesian(parts)
        }
        _ => Err(GroupError::UnsupportedQuotient {
            group: g.to_string(),
            subgroup: h.to_string(),
        }),
    }
}

/// Per-coordinate sample axes covering the ball of radius `radius` in `g`.
pub(super) fn full_axes(g: &GroupInstance, radius: f64, step: f64) -> Vec<Vec<f64>> {
    match g {
        GroupInstance::RealVector(d) => vec![axis_samples(-radius, radius, step); *d],
        GroupInstance::IntegerLattice(d) => {
            let k = radius.floor() as i64;
            vec![(-k..=k).map(|i| i as f64).collect(); *d]
        }
        GroupInstance::Torus(d) => vec![axis_samples(0.0, 1.0 - step * 0.5, step); *d],
        GroupInstance::HeisenbergReal => {
            let c = radius * radius;
            vec![
                axis_samples(-radius, radius, step),
                axis_samples(-radius, radius, step),
                axis_samples(-c, c, step),
            ]
        }
        GroupInstance::HeisenbergDiscrete => {
            let k = radius.floor() as i64;
            let kc = (radius * radius).floor() as i64;
            vec![
                (-k..=k).map(|i| i as f64).collect(),
                (-k..=k).map(|i| i as f64).collect(),
                (-kc..=kc).map(|i| i as f64).collect(),
            ]
        }
        GroupInstance::DirectProduct(fs) => fs.iter().flat_map(|f| full_axes(f, radius, step)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::tests::random_element;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn project_examples() {
        let hg = GroupInstance::HeisenbergReal;
        let p = quotient_project(&hg, &SubgroupSpec::center(), &GroupElement::from_f64(&[1.5, -2.0, 7.3])).unwrap();
        assert_eq!(p.to_f64_vec(), vec![1.5, -2.0, 0.0]);
        let r1 = GroupInstance::RealVector(1);
        let p = quotient_project(&r1, &SubgroupSpec::lattice(1), &GroupElement::from_f64(&[3.25])).unwrap();
        assert_eq!(p.to_f64_vec(), vec![0.25]);
        let p = quotient_project(&r1, &SubgroupSpec::lattice(1), &GroupElement::from_f64(&[-0.75])).unwrap();
        assert_eq!(p.to_f64_vec(), vec![0.25]);
        for spec in [SubgroupSpec::trivial(), SubgroupSpec::full(), SubgroupSpec::center()] {
            let p = quotient_project(&hg, &spec, &hg.identity()).unwrap();
            assert!(hg.is_identity(&p));
        }
    }

    #[test]
    fn unsupported_pairings_rejected() {
        assert!(matches!(
            quotient_project(&GroupInstance::RealVector(2), &SubgroupSpec::center(), &GroupElement::from_f64(&[0.0, 0.0])),
            Err(GroupError::UnsupportedQuotient { .. })
        ));
        assert!(SubgroupSpec::lattice(2).check(&GroupInstance::RealVector(3)).is_err());
        assert!(SubgroupSpec::subspace(vec![vec![1.0, 0.0]]).check(&GroupInstance::HeisenbergReal).is_err());
        assert!(SubgroupSpec::subspace(vec![vec![1.0, 1.0], vec![2.0, 2.0]])
            .check(&GroupInstance::RealVector(2))
            .is_err());
    }

    #[test]
    fn projection_is_idempotent_and_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cases = [
            (GroupInstance::HeisenbergReal, SubgroupSpec::center()),
            (GroupInstance::HeisenbergDiscrete, SubgroupSpec::center()),
            (GroupInstance::RealVector(2), SubgroupSpec::lattice(2)),
            (GroupInstance::IntegerLattice(2), SubgroupSpec::lattice(2)),
        ];
        for (g, h) in &cases {
            for _ in 0..500 {
                let x = random_element(g, &mut rng);
                let p = quotient_project(g, h, &x).unwrap();
                let pp = quotient_project(g, h, &p).unwrap();
                assert_eq!(p, pp, "{g} mod {h}");
                assert!(quotient_norm(g, h, &g.compose(&g.invert(&x).unwrap(), &p).unwrap()).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn same_coset_same_representative() {
        let hg = GroupInstance::HeisenbergReal;
        let x = GroupElement::from_f64(&[0.3, -1.25, 2.0]);
        let z = GroupElement::from_f64(&[0.0, 0.0, 5.5]);
        let xz = hg.compose(&x, &z).unwrap();
        assert_eq!(
            quotient_project(&hg, &SubgroupSpec::center(), &x).unwrap(),
            quotient_project(&hg, &SubgroupSpec::center(), &xz).unwrap()
        );
        let r2 = GroupInstance::RealVector(2);
        let v = GroupElement::from_f64(&[0.125, 0.75]);
        let w = GroupElement::from_f64(&[3.125, -4.25]);
        assert_eq!(
            quotient_project(&r2, &SubgroupSpec::lattice(2), &v).unwrap(),
            quotient_project(&r2, &SubgroupSpec::lattice(2), &w).unwrap()
        );
    }

    #[test]
    fn subspace_projection() {
        let r2 = GroupInstance::RealVector(2);
        let h = SubgroupSpec::subspace(vec![vec![1.0, 1.0]]);
        let p = quotient_project(&r2, &h, &GroupElement::from_f64(&[3.0, 1.0])).unwrap();
        assert!((p.coord(0) - 1.0).abs() < 1e-12 && (p.coord(1) + 1.0).abs() < 1e-12);
        let q = quotient_project(&r2, &h, &GroupElement::from_f64(&[5.0, 3.0])).unwrap();
        assert!(r2.distance(&p, &q).unwrap() < 1e-9);
        let pp = quotient_project(&r2, &h, &p).unwrap();
        assert!(r2.distance(&p, &pp).unwrap() < 1e-12);
    }

    #[test]
    fn torus_cyclic_subgroup() {
        let t = GroupInstance::Torus(2);
        let h = SubgroupSpec::new(SubgroupKind::TorusSubgroup(vec![
            TorusGenerator { coord: 0, order: 4 },
            TorusGenerator { coord: 1, order: 0 },
        ]));
        let p = quotient_project(&t, &h, &GroupElement::from_f64(&[0.8, 0.4])).unwrap();
        assert!((p.coord(0) - 0.05).abs() < 1e-15);
        assert_eq!(p.coord(1), 0.0);
        let d = quotient_distance(&t, &h, &GroupElement::from_f64(&[0.01, 0.0]), &GroupElement::from_f64(&[0.24, 0.9]))
            .unwrap();
        assert!((d - 0.02).abs() < 1e-12);
        assert_eq!(subgroup_elements(&t, &h, 0.5, 0.25).unwrap().len(), 16);
    }

    #[test]
    fn center_quotient_distance() {
        let hg = GroupInstance::HeisenbergReal;
        let d = quotient_distance(
            &hg,
            &SubgroupSpec::center(),
            &GroupElement::from_f64(&[1.0, 0.0, 9.0]),
            &GroupElement::from_f64(&[4.0, 4.0, -2.0]),
        )
        .unwrap();
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn center_elements_in_ball() {
        let hg = GroupInstance::HeisenbergReal;
        let els = subgroup_elements(&hg, &SubgroupSpec::center(), 2.0, 0.5).unwrap();
        assert_eq!(els.len(), 17);
        assert!(els.iter().all(|e| hg.norm(e).unwrap() <= 2.0));
    }
}
