//! Finite point-cloud approximations of subsets of `G` and the set calculus
//! used to compare them.

mod estimators;
mod io;

pub use estimators::{estimate_e, estimate_p, sample_ball, values_near_returns, EstimateOptions, ReturnSource};
pub use io::{read_estimate, write_estimate, EstimateSidecar};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::base::BaseError;
use crate::budget::Exhausted;
use crate::cloud::GridIndex;
use crate::cocycle::CocycleError;
use crate::group::{GroupElement, GroupError, GroupInstance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Base(#[from] BaseError),
    #[error(transparent)]
    Budget(#[from] Exhausted),
    #[error("invalid estimation parameter: {0}")]
    Invalid(String),
    #[error("incomparable estimates: {0}")]
    Incomparable(String),
    #[error("malformed estimate file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    PEstimate,
    EEstimate,
    Section,
    Derived,
}

impl EstimateKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimateKind::PEstimate => "P-estimate",
            EstimateKind::EEstimate => "E-estimate",
            EstimateKind::Section => "section",
            EstimateKind::Derived => "derived",
        }
    }
}

/// Why an estimate came out empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmptyFlag {
    /// No return time was found: recurrence was not observed.
    NoReturnTimes,
    /// Return times exist but every cocycle value left the window.
    EscapedWindow,
    /// No sampled state had its base point near the requested point.
    NoNearbySamples,
}

/// The parameters that produced an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub eps: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

/// A finite subset of `G ∩ B(1, window)` whose points are pairwise at least
/// `resolution / 2` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct SetEstimate {
    pub group: GroupInstance,
    pub points: Vec<GroupElement>,
    pub resolution: f64,
    pub window: f64,
    pub kind: EstimateKind,
    pub provenance: Provenance,
    pub flag: Option<EmptyFlag>,
}

impl SetEstimate {
    /// Windows and deduplicates `candidates` (greedy, in order).
    pub fn from_points(
        group: GroupInstance,
        candidates: impl IntoIterator<Item = GroupElement>,
        resolution: f64,
        window: f64,
        kind: EstimateKind,
        provenance: Provenance,
    ) -> Result<SetEstimate, EstimateError> {
        check_positive("resolution", resolution)?;
        if !(window > 0.0) {
            return Err(EstimateError::Invalid(format!("window {window} must be positive")));
        }
        let mut cloud = Cloud::new(&group, resolution / 2.0);
        for p in candidates {
            group.check(&p)?;
            if group.norm_unchecked(&p) <= window && cloud.nearest_within(&p, resolution / 2.0).is_none() {
                cloud.push(p);
            }
        }
        let points = cloud.points;
        Ok(SetEstimate {
            group,
            points,
            resolution,
            window,
            kind,
            provenance,
            flag: None,
        })
    }

    pub fn empty(group: GroupInstance, resolution: f64, window: f64, kind: EstimateKind, flag: EmptyFlag) -> SetEstimate {
        SetEstimate {
            group,
            points: Vec::new(),
            resolution,
            window,
            kind,
            provenance: Provenance::default(),
            flag: Some(flag),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest distance from the identity.
    pub fn radius(&self) -> f64 {
        self.points.iter().map(|p| self.group.norm_unchecked(p)).fold(0.0, f64::max)
    }

    /// Whether every point is within `tol` of the identity.
    pub fn is_identity_cluster(&self, tol: f64) -> bool {
        !self.is_empty() && self.radius() <= tol
    }

    /// The points within `window` of the identity, relabelled with that window.
    pub fn clip(&self, window: f64) -> SetEstimate {
        let mut out = self.clone();
        out.points.retain(|p| self.group.norm_unchecked(p) <= window);
        out.window = window;
        if out.points.is_empty() && out.flag.is_none() && !self.points.is_empty() {
            out.flag = Some(EmptyFlag::EscapedWindow);
        }
        out
    }

    pub(crate) fn cloud(&self) -> Cloud<'_> {
        let mut c = Cloud::new(&self.group, (self.resolution / 2.0).max(1e-6));
        for p in &self.points {
            c.push(p.clone());
        }
        c
    }

    /// `inf_{a ∈ self} d(a, q)`, `+inf` when empty.
    pub fn distance_to(&self, q: &GroupElement) -> f64 {
        self.cloud().nearest(q).map_or(f64::INFINITY, |(_, d)| d)
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), EstimateError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(EstimateError::Invalid(format!("{name} {v} must be positive and finite")))
    }
}

/// Group elements with a spatial index for nearest-neighbour queries.
pub(crate) struct Cloud<'g> {
    group: &'g GroupInstance,
    pub(crate) points: Vec<GroupElement>,
    index: GridIndex,
    buf: Vec<f64>,
}

impl<'g> Cloud<'g> {
    pub(crate) fn new(group: &'g GroupInstance, cell: f64) -> Cloud<'g> {
        Cloud {
            group,
            points: Vec::new(),
            index: GridIndex::new(group.index_layout(), cell),
            buf: Vec::new(),
        }
    }

    fn keys(&mut self, p: &GroupElement) -> Vec<f64> {
        self.buf.clear();
        self.group.index_coords(p.coords(), &mut self.buf);
        self.buf.clone()
    }

    pub(crate) fn push(&mut self, p: GroupElement) {
        let k = self.keys(&p);
        self.index.insert(&k, self.points.len() as u32);
        self.points.push(p);
    }

    pub(crate) fn nearest(&self, q: &GroupElement) -> Option<(usize, f64)> {
        let mut k = Vec::new();
        self.group.index_coords(q.coords(), &mut k);
        self.index
            .nearest(&k, |id| self.group.distance_unchecked(q, &self.points[id as usize]))
            .map(|(id, d)| (id as usize, d))
    }

    /// Some point strictly closer than `radius`, if any.
    pub(crate) fn nearest_within(&self, q: &GroupElement, radius: f64) -> Option<usize> {
        let mut k = Vec::new();
        self.group.index_coords(q.coords(), &mut k);
        let mut hit = None;
        self.index.for_each_candidate(&k, radius, |id| {
            if self.group.distance_unchecked(q, &self.points[id as usize]) < radius {
                hit = Some(id as usize);
                false
            } else {
                true
            }
        });
        hit
    }
}

/// `sup_{a ∈ A} inf_{b ∈ B} d(a, b)` over the points of `a` accepted by `keep`.
fn directed(a: &SetEstimate, b: &Cloud<'_>, keep: impl Fn(&GroupElement) -> bool) -> f64 {
    let mut worst = 0.0f64;
    for p in a.points.iter().filter(|p| keep(p)) {
        if worst > 0.0 && b.nearest_within(p, worst).is_some() {
            continue;
        }
        let d = b.nearest(p).map_or(f64::INFINITY, |(_, d)| d);
        worst = worst.max(d);
    }
    worst
}

fn check_comparable(a: &SetEstimate, b: &SetEstimate) -> Result<(), EstimateError> {
    if a.group != b.group {
        return Err(EstimateError::Incomparable(format!("groups {} and {}", a.group, b.group)));
    }
    Ok(())
}

/// Hausdorff distance between two estimates over the same group and window.
/// Two empty estimates are at distance 0; empty against non-empty is `+inf`.
pub fn hausdorff_distance(a: &SetEstimate, b: &SetEstimate) -> Result<f64, EstimateError> {
    check_comparable(a, b)?;
    if a.window != b.window {
        return Err(EstimateError::Incomparable(format!("windows {} and {}", a.window, b.window)));
    }
    Ok(hausdorff_unchecked(a, b, f64::INFINITY))
}

/// Hausdorff distance restricted to the ball of radius `inner`: every point
/// of either set with norm at most `inner` is matched against the whole of
/// the other set. Both windows must be at least `inner`, which removes the
/// spurious mismatches at the window boundary.
pub fn hausdorff_within(a: &SetEstimate, b: &SetEstimate, inner: f64) -> Result<f64, EstimateError> {
    check_comparable(a, b)?;
    if a.window < inner || b.window < inner {
        return Err(EstimateError::Incomparable(format!(
            "inner radius {inner} exceeds window {} or {}",
            a.window, b.window
        )));
    }
    Ok(hausdorff_unchecked(a, b, inner))
}

fn hausdorff_unchecked(a: &SetEstimate, b: &SetEstimate, inner: f64) -> f64 {
    let g = &a.group;
    let keep = |p: &GroupElement| inner.is_infinite() || g.norm_unchecked(p) <= inner;
    let a_in = a.points.iter().any(keep);
    let b_in = b.points.iter().any(keep);
    match (a_in, b_in) {
        (false, false) => 0.0,
        _ => {
            let ca = a.cloud();
            let cb = b.cloud();
            directed(a, &cb, keep).max(directed(b, &ca, keep))
        }
    }
}

/// Window that contains `g·B(1, w)·g⁻¹`.
pub fn conjugation_window(group: &GroupInstance, g: &GroupElement, w: f64) -> f64 {
    fn bound(group: &GroupInstance, g: &[crate::dd::Dd], w: f64) -> f64 {
        match group {
            GroupInstance::HeisenbergReal | GroupInstance::HeisenbergDiscrete => {
                // the central part moves by p·b - q·a, at most |(p, q)|·|(a, b)| <= |(p, q)|·w
                let (p, q) = (g[0].to_f64(), g[1].to_f64());
                (w * w + p.hypot(q) * w).sqrt()
            }
            GroupInstance::DirectProduct(fs) => {
                let mut off = 0;
                let mut out = w;
                for f in fs {
                    out = out.max(bound(f, &g[off..off + f.dim()], w));
                    off += f.dim();
                }
                out
            }
            _ => w,
        }
    }
    bound(group, g.coords(), w)
}

/// `{g·a·g⁻¹ : a ∈ A}`, with the window enlarged to contain the image.
pub fn conjugate_set(a: &SetEstimate, g: &GroupElement) -> Result<SetEstimate, EstimateError> {
    a.group.check(g)?;
    let window = conjugation_window(&a.group, g, a.window);
    let mut out = a.clone();
    out.points = a.points.iter().map(|p| a.group.conjugate_unchecked(g, p)).collect();
    out.window = window;
    out.kind = EstimateKind::Derived;
    out.provenance
        .notes
        .push(format!("conjugated by {:?}; window {} -> {}", g.to_f64_vec(), a.window, window));
    Ok(out)
}

/// `{a⁻¹ : a ∈ A}`. The gauges are symmetric, so the window is unchanged.
pub fn invert_set(a: &SetEstimate) -> SetEstimate {
    let mut out = a.clone();
    out.points = a.points.iter().map(|p| a.group.invert_unchecked(p)).collect();
    out.kind = EstimateKind::Derived;
    out.provenance.notes.push("inverted".into());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemigroupDefect {
    pub defect: f64,
    /// Number of products that stayed inside the shrunken window.
    pub pairs: usize,
    /// Set when fewer than two points were available.
    pub undefined: bool,
}

const MAX_SEMIGROUP_POINTS: usize = 3000;

/// Largest distance from a product `a·b` (with `|a·b| <= W - r`) to the
/// estimate. Estimates with more than a few thousand points are thinned
/// with a fixed stride first.
pub fn semigroup_defect(a: &SetEstimate) -> SemigroupDefect {
    let g = &a.group;
    let limit = a.window - a.resolution;
    let stride = a.points.len().div_ceil(MAX_SEMIGROUP_POINTS).max(1);
    let pts: Vec<&GroupElement> = a.points.iter().step_by(stride).collect();
    let cloud = a.cloud();
    let mut defect = 0.0f64;
    let mut pairs = 0;
    for p in &pts {
        for q in &pts {
            let pq = g.compose_unchecked(p, q);
            if g.norm_unchecked(&pq) > limit {
                continue;
            }
            pairs += 1;
            let d = cloud.nearest(&pq).map_or(f64::INFINITY, |(_, d)| d);
            defect = defect.max(d);
        }
    }
    SemigroupDefect {
        defect,
        pairs,
        undefined: a.points.len() < 2,
    }
}

/// Largest gap between a regular grid on the circle and the first
/// coordinate of the estimate (for `Torus(1)`-valued estimates).
pub fn circle_coverage_gap(a: &SetEstimate, step: f64) -> f64 {
    let mut xs: Vec<f64> = a.points.iter().map(|p| p.coord(0).rem_euclid(1.0)).collect();
    if xs.is_empty() {
        return 0.5;
    }
    xs.sort_by(|p, q| p.total_cmp(q));
    let n = (1.0 / step).ceil() as usize;
    let mut worst = 0.0f64;
    for i in 0..n {
        let t = i as f64 * step;
        let j = xs.partition_point(|&v| v < t);
        let after = xs[j % xs.len()];
        let before = xs[(j + xs.len() - 1) % xs.len()];
        let circ = |u: f64| {
            let d = (u - t).rem_euclid(1.0);
            d.min(1.0 - d)
        };
        worst = worst.max(circ(after).min(circ(before)));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(points: &[f64], w: f64) -> SetEstimate {
        SetEstimate::from_points(
            GroupInstance::RealVector(1),
            points.iter().map(|&v| GroupElement::from_f64(&[v])),
            0.01,
            w,
            EstimateKind::Derived,
            Provenance::default(),
        )
        .unwrap()
    }

    #[test]
    fn dedup_and_window() {
        let a = real(&[0.0, 0.001, 0.5, 0.502, 0.51, 3.0], 1.0);
        let v: Vec<f64> = a.points.iter().map(|p| p.coord(0)).collect();
        assert_eq!(v, vec![0.0, 0.5, 0.51]);
        for (i, p) in a.points.iter().enumerate() {
            for q in &a.points[i + 1..] {
                assert!(a.group.distance(p, q).unwrap() >= a.resolution / 2.0);
            }
        }
    }

    #[test]
    fn hausdorff_examples() {
        let a = real(&[0.0], 1.0);
        let b = real(&[0.0, 0.3], 1.0);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert!((hausdorff_distance(&a, &b).unwrap() - 0.3).abs() < 1e-15);
        let e = real(&[], 1.0);
        assert_eq!(hausdorff_distance(&e, &e).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&a, &e).unwrap(), f64::INFINITY);
        let c = real(&[0.0], 2.0);
        assert!(matches!(hausdorff_distance(&a, &c), Err(EstimateError::Incomparable(_))));
        assert_eq!(hausdorff_within(&a, &c, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn conjugation_and_inversion() {
        let hg = GroupInstance::HeisenbergReal;
        let a = SetEstimate::from_points(
            hg.clone(),
            [GroupElement::from_f64(&[0.0, 1.0, 0.0])],
            0.01,
            2.0,
            EstimateKind::EEstimate,
            Provenance::default(),
        )
        .unwrap();
        let c = conjugate_set(&a, &GroupElement::from_f64(&[1.0, 0.0, 0.0])).unwrap();
        assert!(hg.distance(&c.points[0], &GroupElement::from_f64(&[0.0, 1.0, 1.0])).unwrap() < 1e-12);
        assert!(c.window > a.window);
        assert!(c.points.iter().all(|p| hg.norm(p).unwrap() <= c.window));
        let same = conjugate_set(&a, &hg.identity()).unwrap();
        assert_eq!(same.points, a.points);

        let t = SetEstimate::from_points(
            GroupInstance::Torus(1),
            [GroupElement::from_f64(&[0.2])],
            0.01,
            0.5,
            EstimateKind::EEstimate,
            Provenance::default(),
        )
        .unwrap();
        let inv = invert_set(&t);
        assert!((inv.points[0].coord(0) - 0.8).abs() < 1e-15);
        let id = real(&[0.0], 1.0);
        assert_eq!(invert_set(&id).points[0].coord(0), 0.0);
    }

    #[test]
    fn conjugation_window_bounds_random_images() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let hg = GroupInstance::HeisenbergReal;
        for _ in 0..2000 {
            let g = GroupElement::from_f64(&[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]);
            let a = GroupElement::from_f64(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let w = hg.norm(&a).unwrap();
            let img = hg.conjugate(&g, &a).unwrap();
            assert!(hg.norm(&img).unwrap() <= conjugation_window(&hg, &g, w) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn semigroup_examples() {
        let id = real(&[0.0], 1.0);
        let s = semigroup_defect(&id);
        assert_eq!(s.defect, 0.0);
        assert!(s.undefined);
        let two = SetEstimate::from_points(
            GroupInstance::RealVector(1),
            [0.0, 1.0].map(|v| GroupElement::from_f64(&[v])),
            0.01,
            1.5,
            EstimateKind::PEstimate,
            Provenance::default(),
        )
        .unwrap();
        let s = semigroup_defect(&two);
        assert_eq!(s.defect, 0.0);
        assert_eq!(s.pairs, 3);
        let dense = SetEstimate::from_points(
            GroupInstance::Torus(1),
            (0..20).map(|i| GroupElement::from_f64(&[i as f64 * 0.05])),
            0.05,
            0.5,
            EstimateKind::PEstimate,
            Provenance::default(),
        )
        .unwrap();
        assert!(semigroup_defect(&dense).defect <= 0.1);
        assert!(circle_coverage_gap(&dense, 0.001) <= 0.05);
    }
}
