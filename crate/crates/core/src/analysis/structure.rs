use serde::{Deserialize, Serialize};

use crate::base::{base_distance_exact, TorusPoint};
use crate::cloud::GridIndex;
use crate::cocycle::{evaluate_cocycle, Cocycle};
use crate::estimate::{conjugate_set, conjugation_window, hausdorff_within, EstimateKind, Provenance, SetEstimate};
use crate::group::{
    quotient_distance, quotient_norm, subgroup_elements, GroupElement, GroupInstance, SearchGrid, SubgroupKind,
    SubgroupSpec,
};

use super::AnalysisError;

/// Spread of a section around a single coset: with `p` the section point
/// nearest the identity, `max_q |p⁻¹q H|`.
pub fn section_coset_defect(section: &SetEstimate, h: &SubgroupSpec) -> Result<f64, AnalysisError> {
    let g = &section.group;
    h.check(g)?;
    if section.is_empty() {
        return Err(AnalysisError::Empty("section".into()));
    }
    if matches!(h.kind, SubgroupKind::Full) {
        return Ok(0.0);
    }
    let anchor = section
        .points
        .iter()
        .min_by(|a, b| g.norm_unchecked(a).total_cmp(&g.norm_unchecked(b)))
        .expect("non-empty");
    let inv = g.invert_unchecked(anchor);
    section.points.iter().try_fold(0.0f64, |acc, q| {
        Ok(acc.max(quotient_norm(g, h, &g.compose_unchecked(&inv, q))?))
    })
}

/// The section point nearest the identity, used as the coset anchor.
pub fn section_anchor(section: &SetEstimate) -> Option<GroupElement> {
    let g = &section.group;
    section
        .points
        .iter()
        .min_by(|a, b| g.norm_unchecked(a).total_cmp(&g.norm_unchecked(b)))
        .cloned()
}

/// `(δ(x, x'), d(g_x H, g_x' H))` for every pair of anchors.
pub fn gamma_modulus(
    group: &GroupInstance,
    h: &SubgroupSpec,
    anchors: &[(TorusPoint, GroupElement)],
) -> Result<Vec<(f64, f64)>, AnalysisError> {
    if anchors.len() < 2 {
        return Err(AnalysisError::Invalid(format!("{} anchors; at least 2 needed", anchors.len())));
    }
    let mut out = Vec::with_capacity(anchors.len() * (anchors.len() - 1) / 2);
    for (i, (x, gx)) in anchors.iter().enumerate() {
        for (y, gy) in &anchors[i + 1..] {
            out.push((
                base_distance_exact(x, y).to_f64_exact(),
                quotient_distance(group, h, gx, gy)?,
            ));
        }
    }
    Ok(out)
}

/// Running maximum of the quotient distance over pairs with base distance
/// at most each threshold.
pub fn modulus_envelope(scatter: &[(f64, f64)], thresholds: &[f64]) -> Vec<(f64, f64)> {
    thresholds
        .iter()
        .map(|&t| {
            let m = scatter
                .iter()
                .filter(|(d, _)| *d <= t)
                .map(|(_, q)| *q)
                .fold(0.0, f64::max);
            (t, m)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Components {
    /// Component label per point, numbered by first appearance.
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Largest distance from each component's first point to its members.
    pub radii: Vec<f64>,
    /// Smallest distance between points of different components; `None`
    /// for a single component or when the cloud is too large to check.
    pub min_gap: Option<f64>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

const BRUTE_GAP_MAX: usize = 4000;

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Classes of the relation "linked by a chain of steps of length at most
/// `scale`".
pub fn connected_components(a: &SetEstimate, scale: f64) -> Result<Components, AnalysisError> {
    if a.is_empty() {
        return Err(AnalysisError::Empty("estimate".into()));
    }
    if !(scale >= a.resolution) {
        return Err(AnalysisError::Invalid(format!(
            "scale {scale} is below the resolution {}",
            a.resolution
        )));
    }
    let g = &a.group;
    let n = a.points.len();
    let mut keys = Vec::with_capacity(n);
    let mut index = GridIndex::new(g.index_layout(), scale);
    for (i, p) in a.points.iter().enumerate() {
        let mut k = Vec::new();
        g.index_coords(p.coords(), &mut k);
        index.insert(&k, i as u32);
        keys.push(k);
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let mut links = Vec::new();
        index.for_each_candidate(&keys[i], scale, |j| {
            let j = j as usize;
            if j > i && g.distance_unchecked(&a.points[i], &a.points[j]) <= scale {
                links.push(j);
            }
            true
        });
        for j in links {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    let mut firsts = Vec::new();
    let mut radii = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = sizes.len();
            sizes.push(0);
            firsts.push(i);
            radii.push(0.0f64);
        }
        let l = label_of_root[r];
        labels.push(l);
        sizes[l] += 1;
        radii[l] = radii[l].max(g.distance_unchecked(&a.points[firsts[l]], &a.points[i]));
    }
    let min_gap = if sizes.len() > 1 && n <= BRUTE_GAP_MAX {
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                if labels[i] != labels[j] {
                    best = best.min(g.distance_unchecked(&a.points[i], &a.points[j]));
                }
            }
        }
        Some(best)
    } else {
        None
    };
    Ok(Components {
        labels,
        sizes,
        radii,
        min_gap,
    })
}

/// A constant choice `x ↦ H` of subgroups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Selection {
    Trivial,
    Center,
    Subspace { basis: Vec<Vec<f64>> },
}

impl Selection {
    pub fn subgroup(&self, group: &GroupInstance) -> Result<SubgroupSpec, AnalysisError> {
        let spec = match (self, group) {
            (Selection::Trivial, _) => SubgroupSpec::trivial(),
            (Selection::Center, GroupInstance::HeisenbergReal) => SubgroupSpec::center(),
            (Selection::Subspace { basis }, GroupInstance::RealVector(_)) => SubgroupSpec::subspace(basis.clone()),
            _ => {
                return Err(AnalysisError::Unsupported(format!(
                    "selection {} on {group}",
                    self.tag()
                )))
            }
        };
        spec.check(group)?;
        Ok(spec)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Selection::Trivial => "trivial",
            Selection::Center => "center",
            Selection::Subspace { .. } => "subspace",
        }
    }
}

fn selection_cloud(group: &GroupInstance, h: &SubgroupSpec, grid: SearchGrid) -> Result<SetEstimate, AnalysisError> {
    let pts = subgroup_elements(group, h, grid.range, grid.step)?;
    Ok(SetEstimate::from_points(
        group.clone(),
        pts,
        grid.step,
        grid.range,
        EstimateKind::Derived,
        Provenance::default(),
    )?)
}

/// Largest windowed Hausdorff distance between `H` and `f(n,x)·H·f(n,x)⁻¹`
/// over the samples, for a constant selection `H`.
pub fn consistent_selection_defect(
    f: &Cocycle,
    selection: &Selection,
    samples: &[(TorusPoint, i64)],
    grid: SearchGrid,
) -> Result<f64, AnalysisError> {
    let g = f.target();
    let h = selection.subgroup(g)?;
    let cloud = selection_cloud(g, &h, grid)?;
    let mut worst = 0.0f64;
    for (x, n) in samples {
        let c = evaluate_cocycle(f, *n, x)?;
        let moved = conjugate_set(&cloud, &c)?;
        // compare on a ball whose preimage under the conjugation stays in the window
        let cinv = g.invert_unchecked(&c);
        let mut inner = grid.range / 2.0;
        while conjugation_window(g, &cinv, inner) > grid.range {
            inner /= 2.0;
        }
        worst = worst.max(hausdorff_within(&moved, &cloud, inner)?);
    }
    Ok(worst)
}

/// `max_{a ∈ H, |a| ≤ W} max(0, d(a, E) - r)` for an estimate `E` of
/// resolution `r` and window `W`.
pub fn selection_containment_defect(
    selection: &Selection,
    e: &SetEstimate,
    grid: SearchGrid,
) -> Result<f64, AnalysisError> {
    let h = selection.subgroup(&e.group)?;
    let pts = subgroup_elements(&e.group, &h, grid.range.min(e.window), grid.step)?;
    let cloud = e.cloud();
    Ok(pts
        .iter()
        .map(|a| (cloud.nearest(a).map_or(f64::INFINITY, |(_, d)| d) - e.resolution).max(0.0))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionChain {
    /// Largest distance from a point of `P` to `C_x C_x⁻¹`.
    pub p_in_cc: f64,
    /// Largest distance from a point of `C_x C_x⁻¹` to `E`.
    pub cc_in_e: f64,
    /// Points of the windowed, deduplicated `C_x C_x⁻¹`.
    pub cc_points: usize,
}

const CC_SECTION_MAX: usize = 2000;

/// `{q·p⁻¹ : p, q ∈ C_x}` windowed and deduplicated like `e`.
pub fn section_quotients(section: &SetEstimate, e: &SetEstimate) -> Result<SetEstimate, AnalysisError> {
    let g = &section.group;
    let stride = section.points.len().div_ceil(CC_SECTION_MAX).max(1);
    let pts: Vec<&GroupElement> = section.points.iter().step_by(stride).collect();
    let mut out = Vec::with_capacity(pts.len() * pts.len());
    for p in &pts {
        let pinv = g.invert_unchecked(p);
        for q in &pts {
            out.push(g.compose_unchecked(q, &pinv));
        }
    }
    Ok(SetEstimate::from_points(
        g.clone(),
        out,
        e.resolution,
        e.window,
        EstimateKind::Derived,
        section.provenance.clone(),
    )?)
}

/// Directed containment distances for `P ⊆ C_x C_x⁻¹ ⊆ E`, counting only
/// points with norm at most `inner`.
pub fn inclusion_chain(
    p: &SetEstimate,
    section: &SetEstimate,
    e: &SetEstimate,
    inner: f64,
) -> Result<InclusionChain, AnalysisError> {
    if p.group != section.group || p.group != e.group {
        return Err(AnalysisError::Invalid("estimates belong to different groups".into()));
    }
    let g = &p.group;
    let cc = section_quotients(section, e)?;
    let directed = |from: &SetEstimate, to: &SetEstimate| {
        let cloud = to.cloud();
        from.points
            .iter()
            .filter(|q| g.norm_unchecked(q) <= inner)
            .map(|q| cloud.nearest(q).map_or(f64::INFINITY, |(_, d)| d))
            .fold(0.0, f64::max)
    };
    Ok(InclusionChain {
        p_in_cc: directed(p, &cc),
        cc_in_e: directed(&cc, e),
        cc_points: cc.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::RotationSystem;
    use crate::cocycle::{Generator, TrigSum};

    fn est(g: GroupInstance, pts: &[&[f64]], r: f64, w: f64) -> SetEstimate {
        SetEstimate::from_points(
            g,
            pts.iter().map(|c| GroupElement::from_f64(c)),
            r,
            w,
            EstimateKind::Derived,
            Provenance::default(),
        )
        .unwrap()
    }

    #[test]
    fn coset_defect_basics() {
        let h = GroupInstance::HeisenbergReal;
        let s = est(h.clone(), &[&[0.2, 0.1, 0.0], &[0.2, 0.1, 0.9], &[0.2, 0.1, -0.4]], 0.05, 5.0);
        assert_eq!(section_coset_defect(&s, &SubgroupSpec::full()).unwrap(), 0.0);
        assert!(section_coset_defect(&s, &SubgroupSpec::center()).unwrap() < 1e-12);
        assert!(section_coset_defect(&s, &SubgroupSpec::trivial()).unwrap() > 0.9);
        let single = est(h.clone(), &[&[1.0, 2.0, 3.0]], 0.05, 5.0);
        assert_eq!(section_coset_defect(&single, &SubgroupSpec::trivial()).unwrap(), 0.0);
        let empty = SetEstimate::empty(h, 0.05, 5.0, EstimateKind::Section, crate::estimate::EmptyFlag::NoNearbySamples);
        assert!(section_coset_defect(&empty, &SubgroupSpec::trivial()).is_err());
    }

    #[test]
    fn components_of_two_points() {
        let a = est(GroupInstance::RealVector(1), &[&[0.0], &[5.0]], 0.05, 10.0);
        let c = connected_components(&a, 1.0).unwrap();
        assert_eq!(c.count(), 2);
        assert_eq!(c.min_gap, Some(5.0));
        let one = est(GroupInstance::RealVector(1), &[&[0.0]], 0.05, 10.0);
        assert_eq!(connected_components(&one, 0.15).unwrap().count(), 1);
        assert!(connected_components(&one, 0.01).is_err());
    }

    #[test]
    fn components_on_the_circle_wrap() {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 * 0.025]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let a = est(GroupInstance::Torus(1), &refs, 0.02, 1.0);
        let c = connected_components(&a, 0.03).unwrap();
        assert_eq!(c.count(), 1);
        assert!(c.radii[0] >= 0.45);
        let gapped: Vec<&[f64]> = refs.iter().copied().filter(|p| !(0.3..0.4).contains(&p[0])).collect();
        let c = connected_components(&est(GroupInstance::Torus(1), &gapped, 0.02, 1.0), 0.03).unwrap();
        assert_eq!(c.count(), 1, "wrap-around joins the two arcs");
        let gapped: Vec<&[f64]> = gapped.into_iter().filter(|p| !(0.8..0.9).contains(&p[0])).collect();
        assert_eq!(connected_components(&est(GroupInstance::Torus(1), &gapped, 0.02, 1.0), 0.03).unwrap().count(), 2);
    }

    #[test]
    fn gamma_of_constant_anchor_is_zero() {
        let g = GroupInstance::Torus(1);
        let anchors: Vec<(TorusPoint, GroupElement)> = (0..10)
            .map(|i| (TorusPoint::from_f64(&[i as f64 / 10.0]), GroupElement::from_f64(&[0.3])))
            .collect();
        let m = gamma_modulus(&g, &SubgroupSpec::trivial(), &anchors).unwrap();
        assert_eq!(m.len(), 45);
        assert!(m.iter().all(|(_, q)| *q == 0.0));
        assert!(gamma_modulus(&g, &SubgroupSpec::trivial(), &anchors[..1]).is_err());
        let env = modulus_envelope(&[(0.1, 0.2), (0.3, 0.1), (0.05, 0.05)], &[0.0, 0.1, 1.0]);
        assert_eq!(env, vec![(0.0, 0.0), (0.1, 0.2), (1.0, 0.2)]);
    }

    #[test]
    fn selections() {
        let grid = SearchGrid::new(1.0, 0.05);
        let heis = Cocycle::new(
            RotationSystem::golden(),
            GroupInstance::HeisenbergReal,
            Generator::HeisenbergLift {
                a: TrigSum::cos(),
                b: TrigSum::sin(),
            },
        )
        .unwrap();
        let samples: Vec<(TorusPoint, i64)> = [(0.1, 3), (0.5, -17), (0.9, 250)]
            .iter()
            .map(|(x, n)| (TorusPoint::from_f64(&[*x]), *n))
            .collect();
        assert!(consistent_selection_defect(&heis, &Selection::Center, &samples, grid).unwrap() <= 1e-9);
        assert!(consistent_selection_defect(&heis, &Selection::Trivial, &samples, grid).unwrap() <= 1e-9);
        assert!(consistent_selection_defect(&heis, &Selection::Subspace { basis: vec![vec![1.0]] }, &samples, grid).is_err());

        let real = Cocycle::new(
            RotationSystem::golden(),
            GroupInstance::RealVector(2),
            Generator::TrigSum(vec![TrigSum::cos(), TrigSum::sin()]),
        )
        .unwrap();
        let sel = Selection::Subspace {
            basis: vec![vec![1.0, 1.0]],
        };
        assert!(consistent_selection_defect(&real, &sel, &samples, grid).unwrap() <= 1e-9);

        let e = est(GroupInstance::RealVector(2), &[&[0.0, 0.0]], 0.05, 5.0);
        assert_eq!(selection_containment_defect(&Selection::Trivial, &e, grid).unwrap(), 0.0);
        assert!(selection_containment_defect(&sel, &e, grid).unwrap() > 0.5);
    }

    #[test]
    fn chain_on_a_circle_and_a_point() {
        let circle: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 50.0]).collect();
        let refs: Vec<&[f64]> = circle.iter().map(|p| p.as_slice()).collect();
        let t = GroupInstance::Torus(1);
        let full = est(t.clone(), &refs, 0.05, 1.0);
        let chain = inclusion_chain(&full, &full, &full, 1.0).unwrap();
        assert!(chain.p_in_cc <= 0.05 && chain.cc_in_e <= 0.05);

        let r1 = GroupInstance::RealVector(1);
        let section = est(r1.clone(), &[&[0.7]], 0.05, 5.0);
        let e = est(r1.clone(), &[&[0.01]], 0.05, 5.0);
        let p = est(r1.clone(), &[&[-0.02]], 0.05, 5.0);
        let chain = inclusion_chain(&p, &section, &e, 5.0).unwrap();
        assert_eq!(chain.cc_points, 1);
        assert!((chain.p_in_cc - 0.02).abs() < 1e-12 && (chain.cc_in_e - 0.01).abs() < 1e-12);
        let none = SetEstimate::empty(r1, 0.05, 5.0, EstimateKind::EEstimate, crate::estimate::EmptyFlag::EscapedWindow);
        assert_eq!(inclusion_chain(&p, &section, &none, 5.0).unwrap().cc_in_e, f64::INFINITY);
    }
}
