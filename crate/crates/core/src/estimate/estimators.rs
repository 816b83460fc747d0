use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::base::{best_return_times, brute_force_return_times, Frac128, TorusPoint};
use crate::budget::{Budget, Exhausted};
use crate::cocycle::{values_at_times, Cocycle};
use crate::group::GroupElement;

use super::{check_positive, Cloud, EmptyFlag, EstimateError, EstimateKind, Provenance, SetEstimate};

/// How return times and cocycle values are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnSource {
    /// Continued-fraction return times and closed-form cocycle values where
    /// available.
    Fast,
    /// Linear scans only: brute-force return times and stepwise products.
    Oracle,
}

#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    pub source: ReturnSource,
    /// `max_steps` bounds the total number of cocycle factors evaluated.
    pub budget: Budget,
}

impl Default for EstimateOptions {
    fn default() -> EstimateOptions {
        EstimateOptions {
            source: ReturnSource::Fast,
            budget: Budget::UNLIMITED,
        }
    }
}

impl EstimateOptions {
    pub fn oracle() -> EstimateOptions {
        EstimateOptions {
            source: ReturnSource::Oracle,
            ..EstimateOptions::default()
        }
    }

    fn fast(&self) -> bool {
        self.source == ReturnSource::Fast
    }

    /// Admits the work for `scans` prefix scans over `times` and returns the
    /// budget to hand to each scan (deadline only).
    fn admit(&self, f: &Cocycle, times: &[u64], scans: usize) -> Result<Budget, Exhausted> {
        let per_scan = if self.fast() && f.has_closed_form() {
            2 * times.len() as u64
        } else {
            2 * times.last().copied().unwrap_or(0)
        };
        self.budget.admit(per_scan.saturating_mul(scans as u64))?;
        Ok(Budget {
            max_steps: None,
            deadline: self.budget.deadline,
        })
    }
}

fn return_times(f: &Cocycle, eps: f64, n: u64, opts: &EstimateOptions) -> Result<Vec<u64>, EstimateError> {
    match opts.source {
        ReturnSource::Fast => {
            let r = best_return_times(f.system(), eps, n)?;
            if r.capped {
                return Err(EstimateError::Invalid(format!(
                    "more than {} return times below {n} at eps {eps}",
                    r.times.len()
                )));
            }
            Ok(r.times)
        }
        ReturnSource::Oracle => Ok(brute_force_return_times(f.system(), eps, n)?),
    }
}

/// `f(±n, y)` for `n` in `times`, kept when inside the window, in the order
/// `f(n_1, y), f(-n_1, y), f(n_2, y), ...`.
pub fn values_near_returns(
    f: &Cocycle,
    y: &TorusPoint,
    times: &[u64],
    window: f64,
    opts: &EstimateOptions,
) -> Result<Vec<GroupElement>, EstimateError> {
    let budget = opts.admit(f, times, 1)?;
    windowed_values(f, y, times, window, opts.fast(), &budget)
}

fn windowed_values(
    f: &Cocycle,
    y: &TorusPoint,
    times: &[u64],
    window: f64,
    fast: bool,
    budget: &Budget,
) -> Result<Vec<GroupElement>, EstimateError> {
    let v = values_at_times(f, y, times, fast, budget)?;
    let g = f.target();
    Ok(v.forward
        .into_iter()
        .zip(v.backward)
        .flat_map(|(a, b)| [a, b])
        .filter(|p| g.norm_unchecked(p) <= window)
        .collect())
}

fn check_common(n: u64, r: f64, w: f64) -> Result<(), EstimateError> {
    if n == 0 {
        return Err(EstimateError::Invalid("N must be at least 1".into()));
    }
    check_positive("resolution", r)?;
    check_positive("window", w)
}

/// Inner approximation of `P_x(f) ∩ B(1, W)`.
///
/// Values `f(±n, x)` are collected at the return times of every level of
/// the schedule. Since the return-time sets are nested, a value is kept
/// when it comes from the finest level with any return, or lies within
/// `r / 2` of a value at that level.
pub fn estimate_p(
    f: &Cocycle,
    x: &TorusPoint,
    eps_schedule: &[f64],
    n: u64,
    r: f64,
    w: f64,
    opts: &EstimateOptions,
) -> Result<SetEstimate, EstimateError> {
    check_common(n, r, w)?;
    if eps_schedule.len() < 2 {
        return Err(EstimateError::Invalid("the eps schedule needs at least two levels".into()));
    }
    if eps_schedule.windows(2).any(|p| !(p[1] < p[0])) || eps_schedule.iter().any(|e| !(*e > 0.0)) {
        return Err(EstimateError::Invalid(format!("eps schedule {eps_schedule:?} must be positive and strictly decreasing")));
    }
    if x.dim() != f.system().dim() {
        return Err(crate::base::BaseError::DimensionMismatch {
            expected: f.system().dim(),
            got: x.dim(),
        }
        .into());
    }
    let provenance = Provenance {
        x: x.to_f64_vec(),
        eps: eps_schedule.to_vec(),
        n: Some(n),
        ..Provenance::default()
    };
    let times = return_times(f, eps_schedule[0], n, opts)?;
    if times.is_empty() {
        let mut e = SetEstimate::empty(f.target().clone(), r, w, EstimateKind::PEstimate, EmptyFlag::NoReturnTimes);
        e.provenance = provenance;
        return Ok(e);
    }
    let budget = opts.admit(f, &times, 1)?;
    let v = values_at_times(f, x, &times, opts.fast(), &budget)?;
    let fractions: Vec<Frac128> = eps_schedule.iter().map(|&e| Frac128::from_f64(e.min(0.5))).collect();
    let level = |t: u64| {
        let d = f.system().displacement(t as i64);
        fractions.iter().rposition(|e| d < *e).unwrap_or(0)
    };
    let g = f.target();
    let mut by_level: Vec<Vec<GroupElement>> = vec![Vec::new(); eps_schedule.len()];
    let mut any_return_at = vec![false; eps_schedule.len()];
    for (&t, (a, b)) in times.iter().zip(v.forward.iter().zip(&v.backward)) {
        let l = level(t);
        any_return_at[l] = true;
        for p in [a, b] {
            if g.norm_unchecked(p) <= w {
                by_level[l].push(p.clone());
            }
        }
    }
    let finest = any_return_at.iter().rposition(|&b| b).expect("at least one return");
    let mut notes = Vec::new();
    if finest == 0 {
        notes.push("only the coarsest level had return times; stability not checked".to_string());
    }
    let mut reference = Cloud::new(g, r / 2.0);
    for p in &by_level[finest] {
        reference.push(p.clone());
    }
    let finest_points = by_level[finest].clone();
    let mut candidates = finest_points;
    for pts in by_level.iter().take(finest) {
        for p in pts {
            if reference.nearest(p).is_some_and(|(_, d)| d <= r / 2.0) {
                candidates.push(p.clone());
            }
        }
    }
    let mut est = SetEstimate::from_points(g.clone(), candidates, r, w, EstimateKind::PEstimate, provenance)?;
    est.provenance.notes = notes;
    if est.is_empty() {
        est.flag = Some(EmptyFlag::EscapedWindow);
    }
    Ok(est)
}

/// `m` points of the `δ`-ball `B(x, eta)`: `x` itself followed by `m - 1`
/// seeded uniform samples of the cube `x + (-eta, eta)^d`.
pub fn sample_ball(x: &TorusPoint, eta: f64, m: usize, seed: u64) -> Vec<TorusPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = Frac128::from_f64(eta.min(0.5)).0.max(1);
    let mut out = Vec::with_capacity(m);
    if m == 0 {
        return out;
    }
    out.push(x.clone());
    for _ in 1..m {
        let offsets: Vec<Frac128> = (0..x.dim())
            .map(|_| {
                if half >= Frac128::HALF.0 {
                    Frac128(rng.gen())
                } else {
                    Frac128(rng.gen_range(1..2 * half).wrapping_sub(half))
                }
            })
            .collect();
        out.push(x.translate(&offsets));
    }
    out
}

/// Inner approximation of `E_x(f) ∩ B(1, W)`: values `f(±n, y)` for `m`
/// sampled `y ∈ B(x, eta)` and every return time `|n| <= N` with
/// `δ(T^n y, y) < eps`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_e(
    f: &Cocycle,
    x: &TorusPoint,
    eps: f64,
    eta: f64,
    m: usize,
    n: u64,
    r: f64,
    w: f64,
    seed: u64,
    opts: &EstimateOptions,
) -> Result<SetEstimate, EstimateError> {
    check_common(n, r, w)?;
    check_positive("eta", eta)?;
    check_positive("eps", eps)?;
    if m == 0 {
        return Err(EstimateError::Invalid("m must be at least 1".into()));
    }
    if x.dim() != f.system().dim() {
        return Err(crate::base::BaseError::DimensionMismatch {
            expected: f.system().dim(),
            got: x.dim(),
        }
        .into());
    }
    let provenance = Provenance {
        x: x.to_f64_vec(),
        eps: vec![eps],
        n: Some(n),
        eta: Some(eta),
        m: Some(m),
        seed: Some(seed),
        notes: Vec::new(),
    };
    let times = return_times(f, eps, n, opts)?;
    if times.is_empty() {
        let mut e = SetEstimate::empty(f.target().clone(), r, w, EstimateKind::EEstimate, EmptyFlag::NoReturnTimes);
        e.provenance = provenance;
        return Ok(e);
    }
    let budget = opts.admit(f, &times, m)?;
    let ys = sample_ball(x, eta, m, seed);
    let fast = opts.fast();
    let per_y: Vec<Vec<GroupElement>> = ys
        .par_iter()
        .map(|y| windowed_values(f, y, &times, w, fast, &budget))
        .collect::<Result<_, _>>()?;
    let mut est = SetEstimate::from_points(
        f.target().clone(),
        per_y.into_iter().flatten(),
        r,
        w,
        EstimateKind::EEstimate,
        provenance,
    )?;
    if est.is_empty() {
        est.flag = Some(EmptyFlag::EscapedWindow);
    }
    Ok(est)
}
