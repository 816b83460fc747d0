use serde::{Deserialize, Serialize};

use crate::base::{base_distance_exact, Frac128, TorusPoint};
use crate::budget::Budget;
use crate::cloud::GridIndex;
use crate::cocycle::{Cocycle, SkewState};
use crate::dd::Dd;
use crate::estimate::{EmptyFlag, EstimateKind, Provenance, SetEstimate};
use crate::group::{quotient_norm, quotient_project, GroupElement, GroupInstance, SubgroupSpec};

use super::AnalysisError;

/// Which orbit indices `n` a sample keeps.
#[derive(Debug, Clone, PartialEq)]
pub struct StridePlan {
    /// Indices range over `-max_n ..= max_n`.
    pub max_n: u64,
    /// Every index divisible by `stride` is kept.
    pub stride: u64,
    /// Additionally keep every state whose base point is within
    /// `focus_eta` of one of these points (for vertical sections).
    pub focus: Vec<TorusPoint>,
    pub focus_eta: f64,
    /// Use closed-form cocycle values where the family has them; when
    /// false every value is an accumulated product.
    pub closed_forms: bool,
}

impl StridePlan {
    pub fn new(max_n: u64, stride: u64) -> StridePlan {
        StridePlan {
            max_n,
            stride,
            focus: Vec::new(),
            focus_eta: 0.0,
            closed_forms: true,
        }
    }

    pub fn with_focus(mut self, points: Vec<TorusPoint>, eta: f64) -> StridePlan {
        self.focus = points;
        self.focus_eta = eta;
        self
    }

    pub fn stepwise(mut self) -> StridePlan {
        self.closed_forms = false;
        self
    }
}

/// States `T_f^n (x_0, g_0)` for the indices of a [`StridePlan`], stored
/// column-wise, sorted by `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitClosureSample {
    group: GroupInstance,
    base_dim: usize,
    subgroup: Option<SubgroupSpec>,
    indices: Vec<i64>,
    base: Vec<Frac128>,
    values: Vec<Dd>,
    reduced: Option<Vec<Dd>>,
    /// Set when the budget stopped the scan early.
    pub truncated: bool,
}

struct Column {
    indices: Vec<i64>,
    base: Vec<Frac128>,
    values: Vec<Dd>,
    truncated: bool,
}

const POLL_EVERY: u64 = 1 << 14;

fn scan(f: &Cocycle, s0: &SkewState, plan: &StridePlan, forward: bool, budget: &Budget) -> Column {
    let g = f.target();
    let sys = f.system();
    let mut col = Column {
        indices: Vec::new(),
        base: Vec::new(),
        values: Vec::new(),
        truncated: false,
    };
    let focus_eta = Frac128::from_f64(plan.focus_eta.clamp(0.0, 0.5));
    let closed = plan.closed_forms && f.has_closed_form();
    let mut x = s0.x.clone();
    let mut acc = s0.g.clone();
    for j in 1..=plan.max_n {
        if j % POLL_EVERY == 0 && budget.poll(j, plan.max_n).is_err() {
            col.truncated = true;
            break;
        }
        if forward {
            if !closed {
                acc = g.compose_unchecked(&f.eval_unchecked(&x), &acc);
            }
            x = sys.step(&x);
        } else {
            x = sys.step_back(&x);
            if !closed {
                acc = g.compose_unchecked(&g.invert_unchecked(&f.eval_unchecked(&x)), &acc);
            }
        }
        let keep = j % plan.stride == 0 || plan.focus.iter().any(|p| base_distance_exact(&x, p) < focus_eta);
        if keep {
            let n = if forward { j as i64 } else { -(j as i64) };
            let v = if closed {
                g.compose_unchecked(&f.closed_form(n, &s0.x).expect("closed form"), &s0.g)
            } else {
                acc.clone()
            };
            col.indices.push(n);
            col.base.extend_from_slice(x.coords());
            col.values.extend_from_slice(v.coords());
        }
    }
    col
}

/// Samples the orbit of `s0` under the skew product in both time directions.
pub fn sample_orbit_closure(
    f: &Cocycle,
    s0: &SkewState,
    plan: &StridePlan,
    subgroup: Option<&SubgroupSpec>,
    budget: &Budget,
) -> Result<OrbitClosureSample, AnalysisError> {
    let g = f.target();
    g.check(&s0.g)?;
    if s0.x.dim() != f.system().dim() {
        return Err(AnalysisError::Invalid(format!(
            "start point has dimension {}, base has {}",
            s0.x.dim(),
            f.system().dim()
        )));
    }
    if plan.stride == 0 {
        return Err(AnalysisError::Invalid("stride must be at least 1".into()));
    }
    if let Some(h) = subgroup {
        h.check(g)?;
    }
    if plan.focus.iter().any(|p| p.dim() != f.system().dim()) {
        return Err(AnalysisError::Invalid("focus point has the wrong dimension".into()));
    }
    // the closed-form path needs only cheap base steps, so it is not metered
    budget
        .admit(if plan.closed_forms && f.has_closed_form() { 0 } else { 2 * plan.max_n })
        .map_err(AnalysisError::Budget)?;
    let (back, fwd) = rayon::join(|| scan(f, s0, plan, false, budget), || scan(f, s0, plan, true, budget));
    let d = f.system().dim();
    let gd = g.dim();
    let total = back.indices.len() + 1 + fwd.indices.len();
    let mut out = OrbitClosureSample {
        group: g.clone(),
        base_dim: d,
        subgroup: subgroup.cloned(),
        indices: Vec::with_capacity(total),
        base: Vec::with_capacity(total * d),
        values: Vec::with_capacity(total * gd),
        reduced: None,
        truncated: back.truncated || fwd.truncated,
    };
    for k in (0..back.indices.len()).rev() {
        out.indices.push(back.indices[k]);
        out.base.extend_from_slice(&back.base[k * d..(k + 1) * d]);
        out.values.extend_from_slice(&back.values[k * gd..(k + 1) * gd]);
    }
    out.indices.push(0);
    out.base.extend_from_slice(s0.x.coords());
    out.values.extend_from_slice(s0.g.coords());
    out.indices.extend_from_slice(&fwd.indices);
    out.base.extend_from_slice(&fwd.base);
    out.values.extend_from_slice(&fwd.values);
    if let Some(h) = subgroup {
        let mut red = Vec::with_capacity(out.values.len());
        for k in 0..out.len() {
            red.extend_from_slice(quotient_project(g, h, &out.value(k))?.coords());
        }
        out.reduced = Some(red);
    }
    Ok(out)
}

impl OrbitClosureSample {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn group(&self) -> &GroupInstance {
        &self.group
    }

    pub fn subgroup(&self) -> Option<&SubgroupSpec> {
        self.subgroup.as_ref()
    }

    pub fn index(&self, k: usize) -> i64 {
        self.indices[k]
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn base_point(&self, k: usize) -> TorusPoint {
        TorusPoint::new(&self.base[k * self.base_dim..(k + 1) * self.base_dim])
    }

    pub(crate) fn base_coords(&self, k: usize) -> &[Frac128] {
        &self.base[k * self.base_dim..(k + 1) * self.base_dim]
    }

    pub fn value(&self, k: usize) -> GroupElement {
        let gd = self.group.dim();
        GroupElement::from_dd(self.values[k * gd..(k + 1) * gd].iter().copied().collect())
    }

    /// The reduced component `g H` of state `k`, when a subgroup was set.
    pub fn reduced(&self, k: usize) -> Option<GroupElement> {
        let gd = self.group.dim();
        self.reduced
            .as_ref()
            .map(|r| GroupElement::from_dd(r[k * gd..(k + 1) * gd].iter().copied().collect()))
    }

    pub fn state(&self, k: usize) -> SkewState {
        SkewState::new(self.base_point(k), self.value(k))
    }

    /// Keeps every `step`-th state (and the `n = 0` state).
    pub fn thinned(&self, max_len: usize) -> OrbitClosureSample {
        if self.len() <= max_len || max_len == 0 {
            return self.clone();
        }
        let step = self.len().div_ceil(max_len);
        let (d, gd) = (self.base_dim, self.group.dim());
        let mut out = OrbitClosureSample {
            indices: Vec::new(),
            base: Vec::new(),
            values: Vec::new(),
            reduced: self.reduced.as_ref().map(|_| Vec::new()),
            ..self.clone()
        };
        for k in 0..self.len() {
            if k % step == 0 || self.indices[k] == 0 {
                out.indices.push(self.indices[k]);
                out.base.extend_from_slice(&self.base[k * d..(k + 1) * d]);
                out.values.extend_from_slice(&self.values[k * gd..(k + 1) * gd]);
                if let (Some(r), Some(o)) = (&self.reduced, out.reduced.as_mut()) {
                    o.extend_from_slice(&r[k * gd..(k + 1) * gd]);
                }
            }
        }
        out
    }

    /// Counts of sampled base points per cell of a grid with `cells` cells
    /// per axis (row-major).
    pub fn coverage_histogram(&self, cells: usize) -> Vec<u64> {
        let d = self.base_dim;
        let mut hist = vec![0u64; cells.pow(d as u32)];
        for k in 0..self.len() {
            let mut idx = 0;
            for c in self.base_coords(k) {
                idx = idx * cells + ((c.to_f64() * cells as f64) as usize).min(cells - 1);
            }
            hist[idx] += 1;
        }
        hist
    }
}

/// Largest `δ`-distance from a cell center of a `grid`-spaced grid on `X`
/// to the nearest sampled base point.
pub fn surjectivity_defect(sample: &OrbitClosureSample, grid: f64) -> Result<f64, AnalysisError> {
    if !(grid > 0.0 && grid <= 0.25) {
        return Err(AnalysisError::Invalid(format!("grid {grid} outside (0, 0.25]")));
    }
    if sample.is_empty() {
        return Err(AnalysisError::Empty("orbit sample".into()));
    }
    let d = sample.base_dim;
    let mut index = GridIndex::new(vec![true; d], grid);
    let pts: Vec<Vec<f64>> = (0..sample.len())
        .map(|k| sample.base_coords(k).iter().map(|c| c.to_f64()).collect())
        .collect();
    for (k, p) in pts.iter().enumerate() {
        index.insert(p, k as u32);
    }
    let m = (1.0 / grid).ceil() as usize;
    let circ = |a: f64, b: f64| {
        let t = (a - b).rem_euclid(1.0);
        t.min(1.0 - t)
    };
    let mut worst = 0.0f64;
    let mut center = vec![0.0; d];
    for cell in 0..m.pow(d as u32) {
        let mut rest = cell;
        for c in center.iter_mut() {
            *c = ((rest % m) as f64 + 0.5) / m as f64;
            rest /= m;
        }
        let (_, dist) = index
            .nearest(&center, |id| {
                pts[id as usize]
                    .iter()
                    .zip(&center)
                    .map(|(a, b)| circ(*a, *b))
                    .fold(0.0, f64::max)
            })
            .expect("non-empty");
        worst = worst.max(dist);
    }
    Ok(worst)
}

/// `(N, sup_{|n| <= N} |g_n H|)` for each checkpoint.
pub fn compactness_profile(
    sample: &OrbitClosureSample,
    h: &SubgroupSpec,
    checkpoints: &[u64],
) -> Result<Vec<(u64, f64)>, AnalysisError> {
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::Invalid("checkpoints must be strictly increasing".into()));
    }
    let g = &sample.group;
    let mut by_abs: Vec<(u64, f64)> = Vec::with_capacity(sample.len());
    for k in 0..sample.len() {
        by_abs.push((sample.indices[k].unsigned_abs(), quotient_norm(g, h, &sample.value(k))?));
    }
    by_abs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut running = 0.0f64;
    let mut i = 0;
    for &c in checkpoints {
        while i < by_abs.len() && by_abs[i].0 <= c {
            running = running.max(by_abs[i].1);
            i += 1;
        }
        out.push((c, running));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompactnessVerdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl CompactnessVerdict {
    pub fn name(self) -> &'static str {
        match self {
            CompactnessVerdict::Bounded => "bounded",
            CompactnessVerdict::Unbounded => "unbounded",
            CompactnessVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Reads a radius profile: unbounded when the radius at least doubles
/// between every pair of consecutive checkpoints, bounded when the last
/// step grew by no more than 10% plus `tol`.
pub fn compactness_verdict(profile: &[(u64, f64)], tol: f64) -> CompactnessVerdict {
    if profile.len() < 2 {
        return CompactnessVerdict::Inconclusive;
    }
    if profile.windows(2).all(|w| w[0].1 > 0.0 && w[1].1 >= 2.0 * w[0].1) {
        return CompactnessVerdict::Unbounded;
    }
    let (prev, last) = (profile[profile.len() - 2].1, profile[profile.len() - 1].1);
    if last.is_finite() && last <= 1.1 * prev + tol {
        CompactnessVerdict::Bounded
    } else {
        CompactnessVerdict::Inconclusive
    }
}

/// The `G`-components of sampled states whose base point lies within `eta`
/// of `x`, deduplicated at `r` and clipped to the window `w`.
pub fn vertical_section(
    sample: &OrbitClosureSample,
    x: &TorusPoint,
    eta: f64,
    r: f64,
    w: f64,
) -> Result<SetEstimate, AnalysisError> {
    if !(eta > 0.0) {
        return Err(AnalysisError::Invalid(format!("eta {eta} must be positive")));
    }
    if x.dim() != sample.base_dim {
        return Err(AnalysisError::Invalid("section point has the wrong dimension".into()));
    }
    let e = Frac128::from_f64(eta.min(0.5));
    let candidates = (0..sample.len())
        .filter(|&k| base_distance_exact(&TorusPoint::new(sample.base_coords(k)), x) < e)
        .map(|k| sample.value(k));
    let mut est = SetEstimate::from_points(
        sample.group.clone(),
        candidates.collect::<Vec<_>>(),
        r,
        w,
        EstimateKind::Section,
        Provenance {
            x: x.to_f64_vec(),
            eta: Some(eta),
            n: sample.indices.last().map(|n| n.unsigned_abs()),
            ..Provenance::default()
        },
    )?;
    if est.is_empty() {
        est.flag = Some(EmptyFlag::NoNearbySamples);
    }
    Ok(est)
}

/// Points of `X × G` with the metric `max(δ, d_G)`.
pub(crate) struct ProductCloud<'a> {
    group: &'a GroupInstance,
    base: Vec<TorusPoint>,
    values: Vec<GroupElement>,
    index: GridIndex,
}

impl<'a> ProductCloud<'a> {
    pub(crate) fn new(group: &'a GroupInstance, base_dim: usize, cell: f64) -> ProductCloud<'a> {
        let mut layout = vec![true; base_dim];
        layout.extend(group.index_layout());
        ProductCloud {
            group,
            base: Vec::new(),
            values: Vec::new(),
            index: GridIndex::new(layout, cell),
        }
    }

    fn key(&self, x: &TorusPoint, g: &GroupElement) -> Vec<f64> {
        let mut k: Vec<f64> = x.coords().iter().map(|c| c.to_f64()).collect();
        self.group.index_coords(g.coords(), &mut k);
        k
    }

    pub(crate) fn push(&mut self, x: TorusPoint, g: GroupElement) {
        let k = self.key(&x, &g);
        self.index.insert(&k, self.base.len() as u32);
        self.base.push(x);
        self.values.push(g);
    }

    fn dist(&self, x: &TorusPoint, g: &GroupElement, i: usize) -> f64 {
        base_distance_exact(x, &self.base[i])
            .to_f64_exact()
            .max(self.group.distance_unchecked(g, &self.values[i]))
    }

    pub(crate) fn nearest(&self, x: &TorusPoint, g: &GroupElement) -> f64 {
        let k = self.key(x, g);
        self.index
            .nearest(&k, |id| self.dist(x, g, id as usize))
            .map_or(f64::INFINITY, |(_, d)| d)
    }

    /// Whether some point is strictly closer than `radius`.
    /// Distance to the nearest point closer than `radius`, if any.
    pub(crate) fn nearest_within(&self, x: &TorusPoint, g: &GroupElement, radius: f64) -> Option<f64> {
        let k = self.key(x, g);
        self.index
            .nearest_below(&k, radius, |id| self.dist(x, g, id as usize))
            .map(|(_, d)| d)
    }

    pub(crate) fn any_within(&self, x: &TorusPoint, g: &GroupElement, radius: f64) -> bool {
        let k = self.key(x, g);
        let mut hit = false;
        self.index.for_each_candidate(&k, radius, |id| {
            hit = self.dist(x, g, id as usize) < radius;
            !hit
        });
        hit
    }
}

/// The sample after the right translation `(x, g) ↦ (x, g·h⁻¹)`.
pub fn right_translate(sample: &OrbitClosureSample, h: &GroupElement) -> Result<OrbitClosureSample, AnalysisError> {
    let g = &sample.group;
    g.check(h)?;
    let hinv = g.invert_unchecked(h);
    let mut out = sample.clone();
    out.values.clear();
    for k in 0..sample.len() {
        out.values.extend_from_slice(g.compose_unchecked(&sample.value(k), &hinv).coords());
    }
    if let Some(hs) = &sample.subgroup {
        let mut red = Vec::with_capacity(out.values.len());
        for k in 0..out.len() {
            red.extend_from_slice(quotient_project(g, hs, &out.value(k))?.coords());
        }
        out.reduced = Some(red);
    }
    Ok(out)
}

/// Hausdorff distance between two samples as subsets of `X × G`.
pub fn sample_hausdorff(a: &OrbitClosureSample, b: &OrbitClosureSample, cell: f64) -> Result<f64, AnalysisError> {
    sample_hausdorff_capped(a, b, cell, f64::INFINITY)
}

/// `min(H(a, b), cap)`. Searches never look further than `cap`, so large
/// distances cost no more than small ones.
pub fn sample_hausdorff_capped(
    a: &OrbitClosureSample,
    b: &OrbitClosureSample,
    cell: f64,
    cap: f64,
) -> Result<f64, AnalysisError> {
    if a.group != b.group || a.base_dim != b.base_dim {
        return Err(AnalysisError::Invalid("samples live in different spaces".into()));
    }
    if !(cap > 0.0) {
        return Err(AnalysisError::Invalid(format!("cap {cap} must be positive")));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(if a.is_empty() && b.is_empty() { 0.0 } else { cap });
    }
    fn build(s: &OrbitClosureSample, cell: f64) -> ProductCloud<'_> {
        let mut c = ProductCloud::new(&s.group, s.base_dim, cell);
        for k in 0..s.len() {
            c.push(s.base_point(k), s.value(k));
        }
        c
    }
    let (ca, cb) = (build(a, cell), build(b, cell));
    let directed = |from: &OrbitClosureSample, to: &ProductCloud<'_>| {
        let mut worst = 0.0f64;
        for k in 0..from.len() {
            let (x, g) = (from.base_point(k), from.value(k));
            if worst > 0.0 && to.any_within(&x, &g, worst) {
                continue;
            }
            let d = if cap.is_finite() {
                to.nearest_within(&x, &g, cap).unwrap_or(cap)
            } else {
                to.nearest(&x, &g)
            };
            worst = worst.max(d.min(cap));
            if worst >= cap {
                break;
            }
        }
        worst
    };
    let ab = directed(a, &cb);
    if ab >= cap {
        return Ok(cap);
    }
    Ok(ab.max(directed(b, &ca)))
}

/// Largest sample size used by [`stabilizer_candidates`].
pub const STABILIZER_SAMPLE: usize = 20_000;

/// For each probe `h`, the Hausdorff distance in `X × G` between the sample
/// and its right translate by `h`, saturated at `cap`. Long samples are
/// thinned first.
pub fn stabilizer_candidates(
    sample: &OrbitClosureSample,
    probes: &SetEstimate,
    cell: f64,
    cap: f64,
) -> Result<Vec<(GroupElement, f64)>, AnalysisError> {
    if sample.is_empty() {
        return Err(AnalysisError::Empty("orbit sample".into()));
    }
    if probes.group != sample.group {
        return Err(AnalysisError::Invalid("probes belong to a different group".into()));
    }
    let thin = sample.thinned(STABILIZER_SAMPLE);
    probes
        .points
        .iter()
        .map(|h| {
            let moved = right_translate(&thin, h)?;
            Ok((h.clone(), sample_hausdorff_capped(&thin, &moved, cell, cap)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::RotationSystem;
    use crate::cocycle::{Generator, TrigSum};

    fn cocycle(target: GroupInstance, gen: Generator) -> Cocycle {
        Cocycle::new(RotationSystem::golden(), target, gen).unwrap()
    }

    fn start(f: &Cocycle) -> SkewState {
        SkewState::new(TorusPoint::from_f64(&[0.3]), f.target().identity())
    }

    #[test]
    fn zero_length_sample_is_start_state() {
        let f = cocycle(GroupInstance::Torus(1), Generator::AnzaiIdentity);
        let s = sample_orbit_closure(&f, &start(&f), &StridePlan::new(0, 1), None, &Budget::UNLIMITED).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.state(0), start(&f));
        let d = surjectivity_defect(&s, 0.1).unwrap();
        assert!(d > 0.4);
    }

    #[test]
    fn states_match_skew_iteration() {
        for f in crate::cocycle::tests::all_families() {
            let s0 = SkewState::new(TorusPoint::from_f64(&[0.3]), f.target().identity());
            let s = sample_orbit_closure(&f, &s0, &StridePlan::new(2000, 7), None, &Budget::UNLIMITED).unwrap();
            let slow = sample_orbit_closure(&f, &s0, &StridePlan::new(2000, 7).stepwise(), None, &Budget::UNLIMITED).unwrap();
            assert_eq!(s.len(), 2 * (2000 / 7) + 1);
            assert_eq!(s.indices(), slow.indices());
            for k in (0..s.len()).step_by(37) {
                let direct = crate::cocycle::skew_iterate(&f, &s0, s.index(k)).unwrap();
                assert_eq!(direct.x, s.base_point(k));
                assert!(f.target().distance(&direct.g, &s.value(k)).unwrap() < 1e-9);
                assert!(f.target().distance(&slow.value(k), &s.value(k)).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn golden_orbit_is_grid_dense() {
        let f = cocycle(GroupInstance::Torus(1), Generator::AnzaiIdentity);
        let s = sample_orbit_closure(&f, &start(&f), &StridePlan::new(10_000, 1), None, &Budget::UNLIMITED).unwrap();
        assert!(surjectivity_defect(&s, 0.01).unwrap() <= 0.01);
        assert!(surjectivity_defect(&s, 0.3).is_err());
        assert_eq!(s.coverage_histogram(10).iter().sum::<u64>(), s.len() as u64);
    }

    #[test]
    fn profiles_and_verdicts() {
        let c = cocycle(GroupInstance::RealVector(1), Generator::Constant(GroupElement::from_f64(&[1.0])));
        let s = sample_orbit_closure(&c, &start(&c), &StridePlan::new(100_000, 100), None, &Budget::UNLIMITED).unwrap();
        let p = compactness_profile(&s, &SubgroupSpec::trivial(), &[1000, 10_000, 100_000]).unwrap();
        assert_eq!(p, vec![(1000, 1000.0), (10_000, 10_000.0), (100_000, 100_000.0)]);
        assert_eq!(compactness_verdict(&p, 0.05), CompactnessVerdict::Unbounded);

        let b = cocycle(GroupInstance::RealVector(1), Generator::Coboundary(vec![TrigSum::cos()]));
        let s = sample_orbit_closure(&b, &start(&b), &StridePlan::new(100_000, 10), None, &Budget::UNLIMITED).unwrap();
        let p = compactness_profile(&s, &SubgroupSpec::trivial(), &[1000, 10_000, 100_000]).unwrap();
        assert!(p.iter().all(|(_, r)| *r <= 2.0));
        assert_eq!(compactness_verdict(&p, 0.05), CompactnessVerdict::Bounded);

        let t = cocycle(GroupInstance::Torus(1), Generator::AnzaiIdentity);
        let s = sample_orbit_closure(&t, &start(&t), &StridePlan::new(10_000, 1), None, &Budget::UNLIMITED).unwrap();
        let p = compactness_profile(&s, &SubgroupSpec::trivial(), &[100, 10_000]).unwrap();
        assert!(p.iter().all(|(_, r)| *r <= 0.5));
    }

    #[test]
    fn coboundary_section_is_a_point() {
        let b = cocycle(GroupInstance::RealVector(1), Generator::Coboundary(vec![TrigSum::cos()]));
        let x0 = TorusPoint::from_f64(&[0.3]);
        let x = TorusPoint::from_f64(&[0.7]);
        let plan = StridePlan::new(100_000, 1000).with_focus(vec![x.clone()], 0.001);
        let s = sample_orbit_closure(&b, &start(&b), &plan, None, &Budget::UNLIMITED).unwrap();
        let sec = vertical_section(&s, &x, 0.001, 0.05, 5.0).unwrap();
        let expect = (std::f64::consts::TAU * 0.7).cos() - (std::f64::consts::TAU * 0.3).cos();
        assert!(!sec.is_empty());
        assert!(sec.points.iter().all(|p| (p.coord(0) - expect).abs() < 0.01));
        let none = vertical_section(&sample_orbit_closure(&b, &start(&b), &StridePlan::new(0, 1), None, &Budget::UNLIMITED).unwrap(), &x, 0.001, 0.05, 5.0).unwrap();
        assert_eq!(none.flag, Some(EmptyFlag::NoNearbySamples));
        let at_start = vertical_section(&s, &x0, 1e-9, 0.05, 5.0).unwrap();
        assert_eq!(at_start.points, vec![GroupElement::from_f64(&[0.0])]);
    }

    #[test]
    fn orbits_from_one_fiber_are_right_translates() {
        for f in crate::cocycle::tests::all_families() {
            let g = f.target();
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
            let g1 = crate::group::tests::random_element(g, &mut rng);
            let g2 = crate::group::tests::random_element(g, &mut rng);
            let x = TorusPoint::from_f64(&[0.41]);
            let plan = StridePlan::new(3000, 3);
            let s1 = sample_orbit_closure(&f, &SkewState::new(x.clone(), g1.clone()), &plan, None, &Budget::UNLIMITED).unwrap();
            let s2 = sample_orbit_closure(&f, &SkewState::new(x, g2.clone()), &plan, None, &Budget::UNLIMITED).unwrap();
            // translating by k = g1⁻¹g2 means passing h = k⁻¹
            let h = g.compose(&g.invert(&g2).unwrap(), &g1).unwrap();
            let moved = right_translate(&s1, &h).unwrap();
            assert!(sample_hausdorff(&moved, &s2, 0.05).unwrap() < 1e-9);
            assert!(sample_hausdorff(&s1, &s2, 0.05).unwrap() > 0.0);
        }
    }

    #[test]
    fn stabilizers_of_anzai_and_coboundary() {
        let probes = |g: GroupInstance, v: &[f64]| {
            SetEstimate::from_points(
                g,
                v.iter().map(|c| GroupElement::from_f64(&[*c])),
                0.01,
                10.0,
                EstimateKind::Derived,
                Provenance::default(),
            )
            .unwrap()
        };
        let t = cocycle(GroupInstance::Torus(1), Generator::AnzaiIdentity);
        let s = sample_orbit_closure(&t, &start(&t), &StridePlan::new(20_000, 1), None, &Budget::UNLIMITED).unwrap();
        let c = stabilizer_candidates(&s, &probes(GroupInstance::Torus(1), &[0.0, 0.25, 0.5, 0.9]), 0.02, 1.0).unwrap();
        assert_eq!(c[0].1, 0.0);
        assert!(c.iter().all(|(_, d)| *d <= 0.1), "{c:?}");

        let b = cocycle(GroupInstance::RealVector(1), Generator::Coboundary(vec![TrigSum::cos()]));
        let s = sample_orbit_closure(&b, &start(&b), &StridePlan::new(20_000, 1), None, &Budget::UNLIMITED).unwrap();
        let c = stabilizer_candidates(&s, &probes(GroupInstance::RealVector(1), &[0.0, 0.5, 1.0]), 0.02, 1.0).unwrap();
        assert!(c[0].1 < 1e-12);
        assert!(c[1].1 >= 0.4 && c[2].1 == 1.0, "{c:?}");
        let short = stabilizer_candidates(&s, &probes(GroupInstance::RealVector(1), &[0.5]), 0.02, 0.1).unwrap();
        assert_eq!(short[0].1, 0.1);
    }
}
