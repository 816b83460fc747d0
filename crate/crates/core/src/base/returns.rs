//! Return times `n >= 1` with `δ(T^n x, x) < ε`. By invariance of `δ` they
//! do not depend on `x`.
//!
//! The fast generator uses the three-gap structure of a rotation: once
//! `‖q_{k-1}α‖ + ‖q_kα‖ < 2ε`, consecutive returns to `(-ε, ε)` are at most
//! `q_k + q_{k-1}` apart, and every such gap `m` itself satisfies
//! `‖mα‖ < 2ε`. The candidate gaps are generated recursively at `2ε` and the
//! returns are walked one gap at a time.

use serde::Serialize;

use super::{continued_fraction, BaseError, Frac128, RotationSystem, MAX_CF_DEPTH};

/// Largest scan range accepted by [`best_return_times`].
pub const MAX_RETURN_N: u64 = 1_000_000_000;
/// Largest scan range accepted by [`brute_force_return_times`].
pub const BRUTE_FORCE_MAX_N: u64 = 10_000_000;
/// Output lists are capped at this many entries.
pub const MAX_RETURN_COUNT: usize = 1 << 26;

const DIRECT_SCAN_BELOW: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReturnTimes {
    pub times: Vec<u64>,
    /// `true` when the list stopped at [`MAX_RETURN_COUNT`] before `max_n`.
    pub capped: bool,
}

fn eps_fraction(eps: f64) -> Result<Option<Frac128>, BaseError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(BaseError::InvalidParameter(format!("return radius {eps} must be positive")));
    }
    if eps > 0.5 {
        return Ok(None);
    }
    Ok(Some(Frac128::from_f64(eps)))
}

/// Exhaustive scan of `1..=max_n`; the reference for [`best_return_times`].
pub fn brute_force_return_times(s: &RotationSystem, eps: f64, max_n: u64) -> Result<Vec<u64>, BaseError> {
    if max_n > BRUTE_FORCE_MAX_N {
        return Err(BaseError::BudgetExceeded {
            requested: max_n,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    let e = eps_fraction(eps)?;
    let mut out = Vec::new();
    let mut pos: Vec<Frac128> = vec![Frac128::ZERO; s.dim()];
    for n in 1..=max_n {
        let mut inside = true;
        for (p, a) in pos.iter_mut().zip(s.alpha()) {
            *p = p.wrapping_add(*a);
            if let Some(e) = e {
                inside &= p.circle_norm() < e;
            }
        }
        if inside {
            out.push(n);
        }
    }
    Ok(out)
}

/// All `n` in `1..=max_n` with `δ(T^n x, x) < ε`.
pub fn best_return_times(s: &RotationSystem, eps: f64, max_n: u64) -> Result<ReturnTimes, BaseError> {
    if max_n > MAX_RETURN_N {
        return Err(BaseError::BudgetExceeded {
            requested: max_n,
            limit: MAX_RETURN_N,
        });
    }
    let Some(e) = eps_fraction(eps)? else {
        let count = (max_n as usize).min(MAX_RETURN_COUNT);
        return Ok(ReturnTimes {
            times: (1..=count as u64).collect(),
            capped: (count as u64) < max_n,
        });
    };
    let first = s.alpha()[0];
    let rest = &s.alpha()[1..];
    let candidates = gap_candidates(first, e, max_n)?;
    let mut times = Vec::new();
    let mut capped = false;
    walk(first, e, max_n, &candidates, |n| {
        let ok = rest.iter().all(|a| a.wrapping_mul_int(n as i128).circle_norm() < e);
        if ok {
            if times.len() == MAX_RETURN_COUNT {
                capped = true;
                return false;
            }
            times.push(n);
        }
        true
    });
    Ok(ReturnTimes { times, capped })
}

/// Returns of a single rotation number, as a plain list.
fn returns_1d(alpha: Frac128, e: Frac128, max_n: u64) -> Result<Vec<u64>, BaseError> {
    if max_n <= DIRECT_SCAN_BELOW {
        return Ok(scan_1d(alpha, e, max_n));
    }
    let candidates = gap_candidates(alpha, e, max_n)?;
    let mut out = Vec::new();
    walk(alpha, e, max_n, &candidates, |n| {
        out.push(n);
        true
    });
    Ok(out)
}

fn scan_1d(alpha: Frac128, e: Frac128, max_n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = Frac128::ZERO;
    for n in 1..=max_n {
        p = p.wrapping_add(alpha);
        if p.circle_norm() < e {
            out.push(n);
        }
    }
    out
}

/// Every possible gap between consecutive returns to `(-e, e)` that can
/// occur below `max_n`, in increasing order.
fn gap_candidates(alpha: Frac128, e: Frac128, max_n: u64) -> Result<Vec<u64>, BaseError> {
    let bound = max_gap(alpha, e)?.map_or(max_n, |g| g.min(max_n));
    let doubled = match e.0.checked_mul(2) {
        Some(v) if v <= Frac128::HALF.0 => Frac128(v),
        _ => return Ok((1..=bound).collect()),
    };
    returns_1d(alpha, doubled, bound)
}

/// Upper bound `q_k + q_{k-1}` on gaps between returns to `(-e, e)`, or
/// `None` when the expansion runs out first.
fn max_gap(alpha: Frac128, e: Frac128) -> Result<Option<u64>, BaseError> {
    let cf = continued_fraction(alpha, MAX_CF_DEPTH)?;
    let width = e.0.saturating_mul(2);
    // q_0 = 1 is skipped: ‖α‖ differs from |α - p_0| when α > 1/2
    for w in cf.entries.windows(2).skip(1) {
        let (q0, q1) = (w[0].1, w[1].1);
        let d0 = alpha.wrapping_mul_int(q0 as i128).circle_norm().0;
        let d1 = alpha.wrapping_mul_int(q1 as i128).circle_norm().0;
        if d0.saturating_add(d1) < width {
            return Ok(Some(q0.saturating_add(q1)));
        }
    }
    Ok(None)
}

/// Visits the returns in `1..=max_n` in order. `visit` returns `false` to stop.
fn walk(alpha: Frac128, e: Frac128, max_n: u64, candidates: &[u64], mut visit: impl FnMut(u64) -> bool) {
    let mut n = 0u64;
    let mut pos = Frac128::ZERO;
    'outer: loop {
        for &m in candidates {
            let next = n + m;
            if next > max_n {
                break 'outer;
            }
            let p = pos.wrapping_add(alpha.wrapping_mul_int(m as i128));
            if p.circle_norm() < e {
                n = next;
                pos = p;
                if !visit(n) {
                    break 'outer;
                }
                continue 'outer;
            }
        }
        break;
    }
}
