//! Grid searches for the separation properties of nilpotent groups: double
//! cosets `HgH` with `g ∉ H` and conjugacy classes of `g ≠ 1` stay away
//! from the identity.
//!
//! Both searches return the minimum over a finite grid, which is an upper
//! bound on the true infimum. Positivity that survives grid refinement is
//! the evidence; nothing here is a certified bound.

use serde::{Deserialize, Serialize};

use super::subgroup::{full_axes, subgroup_elements};
use super::{GroupElement, GroupError, GroupInstance, SubgroupSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    /// Samples are drawn from the ball of this radius around the identity.
    pub range: f64,
    pub step: f64,
}

impl SearchGrid {
    pub fn new(range: f64, step: f64) -> SearchGrid {
        SearchGrid { range, step }
    }

    fn check(&self) -> Result<(), GroupError> {
        if !(self.step > 0.0 && self.range > 0.0 && self.range.is_finite()) {
            return Err(GroupError::Degenerate(format!(
                "search grid range {} step {}",
                self.range, self.step
            )));
        }
        Ok(())
    }

    /// The same range at half the step.
    pub fn refined(&self) -> SearchGrid {
        SearchGrid {
            range: self.range,
            step: self.step / 2.0,
        }
    }
}

const MAX_PAIRS: usize = 50_000_000;

/// `min |h₁·g·h₂|` over grid samples `h₁, h₂ ∈ H`.
///
/// The sample set of a subgroup is the set of its elements within
/// `grid.range`, so the grid must be wide enough to reach the minimizing
/// pair.
pub fn double_coset_infimum(
    g: &GroupInstance,
    h: &SubgroupSpec,
    x: &GroupElement,
    grid: SearchGrid,
) -> Result<f64, GroupError> {
    grid.check()?;
    g.check(x)?;
    h.check(g)?;
    if matches!(h.kind, super::SubgroupKind::Full) {
        return Ok(0.0);
    }
    let samples = subgroup_elements(g, h, grid.range, grid.step)?;
    if samples.len().saturating_mul(samples.len()) > MAX_PAIRS {
        return Err(GroupError::GridTooLarge(samples.len() * samples.len()));
    }
    let mut best = f64::INFINITY;
    for h1 in &samples {
        let h1x = g.compose_unchecked(h1, x);
        for h2 in &samples {
            let v = g.norm_unchecked(&g.compose_unchecked(&h1x, h2));
            if v < best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// `min |h·g·h⁻¹|` over a coordinate grid of `h` in the ball of radius
/// `grid.range`.
pub fn conjugacy_class_infimum(
    g: &GroupInstance,
    x: &GroupElement,
    grid: SearchGrid,
) -> Result<f64, GroupError> {
    grid.check()?;
    g.check(x)?;
    if g.is_identity(x) {
        return Err(GroupError::Degenerate(
            "the conjugacy class of the identity is trivial".into(),
        ));
    }
    if g.is_abelian() {
        return Ok(g.norm_unchecked(x));
    }
    let axes = full_axes(g, grid.range, grid.step);
    let total = axes.iter().map(|a| a.len()).try_fold(1usize, |acc, n| acc.checked_mul(n));
    match total {
        Some(t) if t <= MAX_PAIRS => {}
        Some(t) => return Err(GroupError::GridTooLarge(t)),
        None => return Err(GroupError::GridTooLarge(usize::MAX)),
    }
    let mut idx = vec![0usize; axes.len()];
    let mut coords = vec![0.0; axes.len()];
    let mut best = f64::INFINITY;
    'outer: loop {
        for (k, i) in idx.iter().enumerate() {
            coords[k] = axes[k][*i];
        }
        let h = GroupElement::from_f64(&coords);
        let v = g.norm_unchecked(&g.conjugate_unchecked(&h, x));
        if v < best {
            best = v;
        }
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(a: f64, b: f64, c: f64) -> GroupElement {
        GroupElement::from_f64(&[a, b, c])
    }

    /// Independent 1-d scan of `min_u N(a, b, u)` with the exponential form
    /// of the central coordinate.
    fn center_coset_oracle(a: f64, b: f64) -> f64 {
        let mut best = f64::INFINITY;
        for i in -20_000..=20_000 {
            let u = i as f64 * 1e-3;
            let r2 = a * a + b * b;
            best = best.min((r2 * r2 + u * u).powf(0.25));
        }
        best
    }

    #[test]
    fn identity_double_coset_is_zero() {
        let hg = GroupInstance::HeisenbergReal;
        for spec in [SubgroupSpec::center(), SubgroupSpec::trivial()] {
            let v = double_coset_infimum(&hg, &spec, &hg.identity(), SearchGrid::new(1.0, 0.1)).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn center_double_coset_examples() {
        let hg = GroupInstance::HeisenbergReal;
        let grid = SearchGrid::new(2.0, 0.01);
        let v = double_coset_infimum(&hg, &SubgroupSpec::center(), &h(1.0, 0.0, 0.0), grid).unwrap();
        assert!((v - center_coset_oracle(1.0, 0.0)).abs() < 1e-9);
        assert!((v - 1.0).abs() < 1e-9);
        let inside = double_coset_infimum(&hg, &SubgroupSpec::center(), &h(0.0, 0.0, 0.5), grid).unwrap();
        assert!(inside <= grid.step);
    }

    #[test]
    fn conjugacy_examples() {
        let t = GroupInstance::Torus(1);
        let v = conjugacy_class_infimum(&t, &GroupElement::from_f64(&[0.3]), SearchGrid::new(1.0, 0.1)).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
        let hg = GroupInstance::HeisenbergReal;
        let grid = SearchGrid::new(1.0, 0.05);
        let central = conjugacy_class_infimum(&hg, &h(0.0, 0.0, 1.0), grid).unwrap();
        assert!((central - 1.0).abs() < 1e-12);
        let v = conjugacy_class_infimum(&hg, &h(1.0, 0.0, 0.0), grid).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!(matches!(
            conjugacy_class_infimum(&hg, &hg.identity(), grid),
            Err(GroupError::Degenerate(_))
        ));
    }

    #[test]
    fn unsupported_subgroup_kind() {
        let r = GroupInstance::RealVector(1);
        assert!(double_coset_infimum(&r, &SubgroupSpec::center(), &GroupElement::from_f64(&[1.0]), SearchGrid::new(1.0, 0.1))
            .is_err());
    }
}
